"""Field containers, solver parameters, equation of state and wave speeds.

Gaussian-style units are used throughout: magnetic pressure is B^2/(8 pi)
and the Alfven speed is |B|/sqrt(4 pi rho).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .grid import AXES, EDGE_LOCS, FACE_LOCS, Location, StaggeredGrid

FOUR_PI = 4.0 * np.pi


class EigenSet(Enum):
    """Which split of the MHD spectrum bounds the explicit time step."""

    V = "v"
    VB = "vb"
    FULL = "full"


class FieldError(ValueError):
    pass


class PositivityError(RuntimeError):
    """An inadmissible (non-positive density/pressure) state was produced."""

    def __init__(self, what: str, t: float | None = None, where=None):
        self.what = what
        self.t = t
        self.where = where
        msg = f"positivity failure: {what}"
        if t is not None:
            msg += f" at t={t!r}"
        if where is not None:
            msg += f" (first offending index {where})"
        super().__init__(msg)


@dataclass(frozen=True)
class Params:
    """Physical and numerical knobs of the scheme."""

    gamma: float = 5.0 / 3.0
    mu: float = 0.0
    eta: float = 0.0
    prandtl: float = 1.0
    cv: float = 1.0
    cfl: float = 0.9
    theta_b: float = 1.0
    theta_p: float = 1.0
    alpha: float = 1.0
    picard_r: int = 2
    picard_s: int = 2
    cg_tol: float = 1e-10
    cg_maxit: int = 1000
    eigen_set: EigenSet = EigenSet.V
    limiter_on: bool = True
    second_order: bool = False
    dt_fixed: float | None = None
    dt_max: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise FieldError(f"gamma must exceed 1, got {self.gamma}")
        if self.mu < 0 or self.eta < 0:
            raise FieldError("transport coefficients must be non-negative")
        if self.mu > 0 and not self.prandtl > 0:
            raise FieldError("Prandtl number must be positive when mu > 0")
        if not self.cv > 0:
            raise FieldError("cv must be positive")
        if not 0.0 < self.cfl <= 1.0:
            raise FieldError(f"cfl must lie in (0, 1], got {self.cfl}")
        for name in ("theta_b", "theta_p"):
            th = getattr(self, name)
            if not 0.5 <= th <= 1.0:
                raise FieldError(f"{name} must lie in [1/2, 1], got {th}")
        if self.alpha < 0:
            raise FieldError("stabilization alpha must be non-negative")
        if self.picard_r < 1 or self.picard_s < 1:
            raise FieldError("Picard sweep counts must be at least 1")
        if self.dt_fixed is not None and not self.dt_fixed > 0:
            raise FieldError("dt_fixed must be positive")
        if not self.dt_max > 0:
            raise FieldError("dt_max must be positive")

    @property
    def kappa(self) -> float:
        """Heat conductivity tied to viscosity through the Prandtl number."""
        if self.mu == 0.0:
            return 0.0
        return self.gamma * self.cv * self.mu / self.prandtl

    @property
    def gas_constant(self) -> float:
        return (self.gamma - 1.0) * self.cv

    def with_(self, **kw) -> "Params":
        return replace(self, **kw)


# -- equation of state -------------------------------------------------------


class IdealGas:
    """gamma-law gas: rho*e = p/(gamma-1).  Other closures can implement the
    same four methods and be swapped in where an ``eos`` argument is taken."""

    def __init__(self, gamma: float):
        self.gamma = gamma

    def internal_energy(self, p, rho):
        return p / ((self.gamma - 1.0) * rho)

    def pressure(self, e, rho):
        return (self.gamma - 1.0) * rho * e

    def enthalpy(self, p, rho):
        return self.gamma * p / ((self.gamma - 1.0) * rho)

    def temperature(self, p, rho, cv):
        return p / (rho * (self.gamma - 1.0) * cv)


def sound_speed(p, rho, gamma):
    return np.sqrt(gamma * p / rho)


def wave_speeds(rho, p, bx, by, bz, gamma, axis: int):
    """Sound, Alfven, slow and fast magnetosonic speeds along ``axis``.

    ``bx`` is the component along ``axis``; by/bz the transverse ones.  The
    fast/slow radicand is clamped to zero when it sits within round-off of
    degeneracy.
    """
    c2 = gamma * p / rho
    b2 = (bx * bx + by * by + bz * bz) / (FOUR_PI * rho)
    ca2 = bx * bx / (FOUR_PI * rho)
    s = b2 + c2
    rad = s * s - 4.0 * ca2 * c2
    rad = np.where(np.abs(rad) < 1e-14 * s * s, 0.0, rad)
    root = np.sqrt(np.maximum(rad, 0.0))
    cf2 = 0.5 * (s + root)
    cs2 = 0.5 * np.maximum(s - root, 0.0)
    return np.sqrt(c2), np.sqrt(ca2), np.sqrt(cs2), np.sqrt(cf2)


# -- staggered vector containers ---------------------------------------------


class _Vector3:
    LOCS: tuple[Location, Location, Location]

    def __init__(self, grid: StaggeredGrid, x, y, z):
        for a, (comp, loc) in enumerate(zip((x, y, z), self.LOCS)):
            if comp.shape != grid.shape(loc):
                raise FieldError(
                    f"component {a} shape {comp.shape} != {loc.name} shape {grid.shape(loc)}"
                )
        self.grid = grid
        self.comps = [np.asarray(x, dtype=float), np.asarray(y, dtype=float), np.asarray(z, dtype=float)]

    @classmethod
    def zeros(cls, grid: StaggeredGrid):
        return cls(grid, *(grid.zeros(loc) for loc in cls.LOCS))

    @property
    def x(self):
        return self.comps[0]

    @property
    def y(self):
        return self.comps[1]

    @property
    def z(self):
        return self.comps[2]

    def copy(self):
        return type(self)(self.grid, *(c.copy() for c in self.comps))

    def __add__(self, other):
        return type(self)(self.grid, *(a + b for a, b in zip(self.comps, other.comps)))

    def __sub__(self, other):
        return type(self)(self.grid, *(a - b for a, b in zip(self.comps, other.comps)))

    def __mul__(self, s):
        if isinstance(s, _Vector3):
            return type(self)(self.grid, *(a * b for a, b in zip(self.comps, s.comps)))
        return type(self)(self.grid, *(s * a for a in self.comps))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, _Vector3):
            return type(self)(self.grid, *(a / b for a, b in zip(self.comps, other.comps)))
        return type(self)(self.grid, *(a / other for a in self.comps))


class FaceField(_Vector3):
    """Vector with the a-component stored on the a-faces (x on FACE_X, ...)."""

    LOCS = FACE_LOCS


class EdgeField(_Vector3):
    """Vector with the a-component stored on the a-edges (x on EDGE_X, ...)."""

    LOCS = EDGE_LOCS


def dot(u: _Vector3, v: _Vector3) -> float:
    """Unweighted inner product over all stored component entries, with a
    fixed summation order for determinism."""
    return float(sum(np.dot(a.ravel(), b.ravel()) for a, b in zip(u.comps, v.comps)))


def pack(u: _Vector3) -> np.ndarray:
    return np.concatenate([c.ravel() for c in u.comps])


def unpack(vec: np.ndarray, grid: StaggeredGrid, cls) -> _Vector3:
    comps = []
    k = 0
    for loc in cls.LOCS:
        sh = grid.shape(loc)
        sz = int(np.prod(sh))
        comps.append(vec[k : k + sz].reshape(sh))
        k += sz
    if k != vec.size:
        raise FieldError("packed vector length mismatch")
    return cls(grid, *comps)


# -- cell-centred reductions of the staggered magnetic field ------------------


def magnetic_field_cell(grid: StaggeredGrid, B: EdgeField) -> np.ndarray:
    """Edge-to-cell averaged B, shape (3, *cells)."""
    out = []
    for a, loc in enumerate(EDGE_LOCS):
        c = B.comps[a]
        l = loc
        for ax in AXES:
            if l.shifted[ax]:
                c, l = grid.avg(c, l, ax)
        out.append(c)
    return np.stack(out)


def magnetic_energy_cell(grid: StaggeredGrid, B: EdgeField) -> np.ndarray:
    """Cell magnetic energy density: components squared on their edges, then
    averaged to cells (square-then-average)."""
    m = 0.0
    for a, loc in enumerate(EDGE_LOCS):
        c = B.comps[a] ** 2
        l = loc
        for ax in AXES:
            if l.shifted[ax]:
                c, l = grid.avg(c, l, ax)
        m = m + c
    return m / (2.0 * FOUR_PI)


def kinetic_energy_cell(rho: np.ndarray, mom: np.ndarray) -> np.ndarray:
    return 0.5 * (mom[0] ** 2 + mom[1] ** 2 + mom[2] ** 2) / rho


def face_density(grid: StaggeredGrid, rho: np.ndarray) -> FaceField:
    return FaceField(grid, *(grid.avg_up(rho, a) for a in AXES))


def cons_to_prim(rho, mom, rhoE, m_cell, gamma):
    """Pressure from conserved cell variables and the cell magnetic energy."""
    return (gamma - 1.0) * (rhoE - kinetic_energy_cell(rho, mom) - m_cell)


def prim_to_cons(rho, v, p, m_cell, gamma):
    mom = rho * v
    rhoE = p / (gamma - 1.0) + kinetic_energy_cell(rho, mom) + m_cell
    return mom, rhoE


# -- the evolved state --------------------------------------------------------


@dataclass
class State:
    """All staggered unknowns at one time level.

    rho, mom (3, ...), rhoE and p live at cells; v_f on faces; B_e on edges.
    The pressure satisfies rhoE = p/(gamma-1) + rho*k + m to round-off by
    construction whenever the state was produced by the solver.
    """

    grid: StaggeredGrid
    rho: np.ndarray
    mom: np.ndarray
    rhoE: np.ndarray
    p: np.ndarray
    v_f: FaceField
    B_e: EdgeField
    t: float = 0.0

    def __post_init__(self):
        cs = self.grid.shape(Location.CELL)
        if self.rho.shape != cs or self.rhoE.shape != cs or self.p.shape != cs:
            raise FieldError("cell array shape mismatch")
        if self.mom.shape != (3,) + cs:
            raise FieldError("momentum must have shape (3, *cells)")

    def copy(self) -> "State":
        return State(
            self.grid,
            self.rho.copy(),
            self.mom.copy(),
            self.rhoE.copy(),
            self.p.copy(),
            self.v_f.copy(),
            self.B_e.copy(),
            self.t,
        )

    def magnetic_energy(self) -> np.ndarray:
        return magnetic_energy_cell(self.grid, self.B_e)

    def check_admissible(self):
        for name, arr in (("density", self.rho), ("pressure", self.p)):
            if not np.all(np.isfinite(arr)):
                raise PositivityError(f"non-finite {name}", self.t)
            if np.any(arr <= 0.0):
                where = np.unravel_index(int(np.argmax(arr <= 0.0)), arr.shape)
                raise PositivityError(f"non-positive {name}", self.t, where)

    # Flat vector view used by the finite-difference Jacobian machinery.
    # Only the prognostic unknowns (rho, momentum, total energy, edge B) are
    # packed: pressure and the face velocity are rebuilt from them on every
    # step, so including them would add columns on which the one-step map is
    # a projection rather than a perturbed identity.
    def pack(self) -> np.ndarray:
        return np.concatenate(
            [self.rho.ravel(), self.mom.ravel(), self.rhoE.ravel(), pack(self.B_e)]
        )

    @classmethod
    def unpack(cls, vec: np.ndarray, grid: StaggeredGrid, gamma: float, t: float = 0.0) -> "State":
        cs = grid.shape(Location.CELL)
        nc = int(np.prod(cs))
        k = 0
        rho = vec[k : k + nc].reshape(cs); k += nc
        mom = vec[k : k + 3 * nc].reshape((3,) + cs); k += 3 * nc
        rhoE = vec[k : k + nc].reshape(cs); k += nc
        ne = sum(int(np.prod(grid.shape(l))) for l in EDGE_LOCS)
        B_e = unpack(vec[k : k + ne], grid, EdgeField); k += ne
        if k != vec.size:
            raise FieldError("state vector length mismatch")
        p = cons_to_prim(rho, mom, rhoE, magnetic_energy_cell(grid, B_e), gamma)
        rho_f = face_density(grid, rho)
        v_f = FaceField(grid, *(grid.avg_up(mom[a], a) / rho_f.comps[a] for a in range(3)))
        return cls(grid, rho, mom, rhoE, p, v_f, B_e, t)

    def n_dof(self) -> int:
        return self.pack().size
