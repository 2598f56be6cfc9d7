"""Staggered Cartesian grid: primal cells plus the seven shifted locations.

A scalar field lives at one of eight locations identified by which of the
three axes are half-shifted.  Along a shifted axis the stored slot ``m``
corresponds to the half-index position ``m - 1/2`` (coordinate
``x_lo + m*dx``); along an unshifted axis slot ``i`` is the cell center
``x_lo + (i + 1/2)*dx``.  Under periodic boundaries every location stores
exactly ``n`` entries per axis (the wrapped slot 0 doubles as slot n);
under outflow boundaries a shifted axis stores ``n + 1`` entries.
Degenerate axes (``n == 1``) carry a single entry at every location and all
derivatives along them vanish.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

AXES = (0, 1, 2)


class Boundary(Enum):
    PERIODIC = "periodic"
    OUTFLOW = "outflow"


class Location(Enum):
    """Staggered storage sites, identified by the half-shifted axes."""

    CELL = (False, False, False)
    FACE_X = (True, False, False)
    FACE_Y = (False, True, False)
    FACE_Z = (False, False, True)
    EDGE_X = (False, True, True)
    EDGE_Y = (True, False, True)
    EDGE_Z = (True, True, False)
    NODE = (True, True, True)

    @property
    def shifted(self) -> tuple[bool, bool, bool]:
        return self.value

    def toggled(self, axis: int) -> "Location":
        s = list(self.value)
        s[axis] = not s[axis]
        return _BY_SHIFT[tuple(s)]


_BY_SHIFT = {loc.value: loc for loc in Location}

FACE_LOCS = (Location.FACE_X, Location.FACE_Y, Location.FACE_Z)
EDGE_LOCS = (Location.EDGE_X, Location.EDGE_Y, Location.EDGE_Z)


class GridError(ValueError):
    pass


class StaggerError(ValueError):
    """Raised when field shapes/locations are inconsistent with an operation."""


def _sl(ndim: int, axis: int, s: slice) -> tuple:
    idx = [slice(None)] * ndim
    idx[axis] = s
    return tuple(idx)


@dataclass(frozen=True)
class StaggeredGrid:
    """Uniform Cartesian grid with per-axis extents and boundary types."""

    n: tuple[int, int, int]
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]
    boundary: tuple[Boundary, Boundary, Boundary]

    def __post_init__(self):
        if len(self.n) != 3 or any(int(s) != s or s < 1 for s in self.n):
            raise GridError(f"cell counts must be positive integers, got {self.n}")
        for a in AXES:
            if not self.hi[a] > self.lo[a]:
                raise GridError(f"empty extent along axis {a}")

    @property
    def dx(self) -> tuple[float, float, float]:
        return tuple((self.hi[a] - self.lo[a]) / self.n[a] for a in AXES)

    @property
    def cell_volume(self) -> float:
        d = self.dx
        return d[0] * d[1] * d[2]

    def degenerate(self, axis: int) -> bool:
        return self.n[axis] == 1

    def axis_size(self, axis: int, shifted: bool) -> int:
        if not shifted or self.degenerate(axis):
            return self.n[axis]
        if self.boundary[axis] is Boundary.PERIODIC:
            return self.n[axis]
        return self.n[axis] + 1

    def shape(self, loc: Location) -> tuple[int, int, int]:
        return tuple(self.axis_size(a, loc.shifted[a]) for a in AXES)

    def zeros(self, loc: Location) -> np.ndarray:
        return np.zeros(self.shape(loc))

    def axis_coords(self, axis: int, shifted: bool) -> np.ndarray:
        d = self.dx[axis]
        m = np.arange(self.axis_size(axis, shifted), dtype=float)
        if shifted and not self.degenerate(axis):
            return self.lo[axis] + m * d
        return self.lo[axis] + (m + 0.5) * d

    def mesh(self, loc: Location) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable coordinate arrays for every slot of ``loc``."""
        cs = [self.axis_coords(a, loc.shifted[a]) for a in AXES]
        return tuple(np.meshgrid(*cs, indexing="ij"))

    # -- elementary shift kernels ------------------------------------------

    def _pad(self, a: np.ndarray, axis: int, before: int, after: int) -> np.ndarray:
        if before == 0 and after == 0:
            return a
        mode = "wrap" if self.boundary[axis] is Boundary.PERIODIC else "edge"
        width = [(0, 0)] * a.ndim
        width[axis - 3] = (before, after)
        return np.pad(a, width, mode=mode)

    def diff_up(self, a: np.ndarray, axis: int) -> np.ndarray:
        """Difference an unshifted axis onto the shifted one: out[m] = a[m] - a[m-1]."""
        ax = axis - 3
        if self.degenerate(axis):
            return np.zeros_like(a)
        if self.boundary[axis] is Boundary.PERIODIC:
            ap = self._pad(a, axis, 1, 0)
        else:
            ap = self._pad(a, axis, 1, 1)
        return ap[_sl(a.ndim, ax, slice(1, None))] - ap[_sl(a.ndim, ax, slice(None, -1))]

    def diff_down(self, a: np.ndarray, axis: int) -> np.ndarray:
        """Difference a shifted axis onto the unshifted one: out[i] = a[i+1] - a[i]."""
        ax = axis - 3
        if self.degenerate(axis):
            return np.zeros_like(a)
        if self.boundary[axis] is Boundary.PERIODIC:
            a = self._pad(a, axis, 0, 1)
        return a[_sl(a.ndim, ax, slice(1, None))] - a[_sl(a.ndim, ax, slice(None, -1))]

    def _two_point(self, a, axis, up, combine):
        ax = axis - 3
        if self.degenerate(axis):
            return a.copy()
        if self.boundary[axis] is Boundary.PERIODIC:
            a = self._pad(a, axis, 1, 0) if up else self._pad(a, axis, 0, 1)
        elif up:
            a = self._pad(a, axis, 1, 1)
        return combine(a[_sl(a.ndim, ax, slice(1, None))], a[_sl(a.ndim, ax, slice(None, -1))])

    def avg_up(self, a: np.ndarray, axis: int) -> np.ndarray:
        """Two-point average from an unshifted axis onto the shifted one."""
        return self._two_point(a, axis, True, lambda l, r: 0.5 * (l + r))

    def avg_down(self, a: np.ndarray, axis: int) -> np.ndarray:
        """Two-point average from a shifted axis onto the unshifted one."""
        return self._two_point(a, axis, False, lambda l, r: 0.5 * (l + r))

    def max_up(self, a: np.ndarray, axis: int) -> np.ndarray:
        return self._two_point(a, axis, True, np.maximum)

    def max_down(self, a: np.ndarray, axis: int) -> np.ndarray:
        return self._two_point(a, axis, False, np.maximum)

    # -- location-aware wrappers -------------------------------------------

    def _check(self, a: np.ndarray, loc: Location, what: str = "field"):
        if tuple(a.shape[-3:]) != self.shape(loc):
            raise StaggerError(
                f"{what} shape {a.shape[-3:]} does not match {loc.name} "
                f"storage {self.shape(loc)}"
            )

    def avg(self, a: np.ndarray, loc: Location, axis: int) -> tuple[np.ndarray, Location]:
        """Single-axis two-point average toggling the staggering of ``axis``."""
        self._check(a, loc)
        if loc.shifted[axis]:
            return self.avg_down(a, axis), loc.toggled(axis)
        return self.avg_up(a, axis), loc.toggled(axis)

    def diff(self, a: np.ndarray, loc: Location, axis: int) -> tuple[np.ndarray, Location]:
        """Single-axis undivided difference toggling the staggering of ``axis``."""
        self._check(a, loc)
        if loc.shifted[axis]:
            return self.diff_down(a, axis), loc.toggled(axis)
        return self.diff_up(a, axis), loc.toggled(axis)

    def avg2_product(
        self,
        x: np.ndarray,
        loc_x: Location,
        y: np.ndarray,
        loc_y: Location,
        target: Location,
    ) -> np.ndarray:
        """Double-average product <<x>_a y>_b landing on ``target``.

        Axis ``a`` toggles ``loc_x`` onto ``loc_y``; axis ``b`` toggles
        ``loc_y`` onto ``target``.  Raises StaggerError when no such pair of
        axes exists.
        """
        self._check(x, loc_x, "x_field")
        self._check(y, loc_y, "y_field")
        ax_a = [a for a in AXES if loc_x.toggled(a) is loc_y]
        ax_b = [b for b in AXES if loc_y.toggled(b) is target]
        if len(ax_a) != 1 or len(ax_b) != 1:
            raise StaggerError(
                f"no single-axis toggles map {loc_x.name} -> {loc_y.name} -> {target.name}"
            )
        inner, _ = self.avg(x, loc_x, ax_a[0])
        out, _ = self.avg(inner * y, loc_y, ax_b[0])
        return out


def make_grid(
    n,
    lo,
    hi,
    boundary=("periodic", "periodic", "periodic"),
) -> StaggeredGrid:
    bcs = tuple(b if isinstance(b, Boundary) else Boundary(b) for b in boundary)
    return StaggeredGrid(tuple(int(s) for s in n), tuple(map(float, lo)), tuple(map(float, hi)), bcs)
