"""Mimetic staggered operators: curls, divergences, gradients and the
double-average cross product.

The two curls are discrete adjoints of one another under the unweighted
inner products, and the node divergence annihilates the face-to-edge curl
exactly; those identities carry the divergence-free magnetic transport and
the symmetry of the implicit systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import FOUR_PI, EdgeField, FaceField
from .grid import AXES, EDGE_LOCS, FACE_LOCS, Location, StaggeredGrid


def curl_f2e(grid: StaggeredGrid, E: FaceField) -> EdgeField:
    """Circulation curl taking face vectors to edge vectors.

    (curl E)_a = D+_b E_c / dx_b - D+_c E_b / dx_c  for cyclic (a, b, c).
    """
    d = grid.dx
    out = []
    for a in AXES:
        b, c = (a + 1) % 3, (a + 2) % 3
        out.append(grid.diff_up(E.comps[c], b) / d[b] - grid.diff_up(E.comps[b], c) / d[c])
    return EdgeField(grid, *out)


def curl_e2f(grid: StaggeredGrid, B: EdgeField) -> FaceField:
    """Adjoint curl taking edge vectors to face vectors.

    (curl B)_a = D-_b B_c / dx_b - D-_c B_b / dx_c  for cyclic (a, b, c).
    """
    d = grid.dx
    out = []
    for a in AXES:
        b, c = (a + 1) % 3, (a + 2) % 3
        out.append(grid.diff_down(B.comps[c], b) / d[b] - grid.diff_down(B.comps[b], c) / d[c])
    return FaceField(grid, *out)


def div_e2n(grid: StaggeredGrid, B: EdgeField) -> np.ndarray:
    """Node divergence of an edge vector; annihilates curl_f2e exactly."""
    d = grid.dx
    out = 0.0
    for a in AXES:
        out = out + grid.diff_up(B.comps[a], a) / d[a]
    return out


def div_f2c(grid: StaggeredGrid, F: FaceField) -> np.ndarray:
    """Cell divergence of a face vector (conservative flux difference)."""
    d = grid.dx
    out = 0.0
    for a in AXES:
        out = out + grid.diff_down(F.comps[a], a) / d[a]
    return out


def grad_c2f(grid: StaggeredGrid, p: np.ndarray) -> FaceField:
    """Face gradient of a cell scalar; negative adjoint of div_f2c."""
    d = grid.dx
    return FaceField(grid, *(grid.diff_up(p, a) / d[a] for a in AXES))


def cross_fe(grid: StaggeredGrid, v: FaceField, B: EdgeField) -> FaceField:
    """Double-average cross product (v x B) of a face vector with an edge
    vector, landing on faces:

    (v x B)_a = <<v_b>_a B_c>_b - <<v_c>_a B_b>_c  for cyclic (a, b, c).
    """
    out = []
    for a in AXES:
        b, c = (a + 1) % 3, (a + 2) % 3
        t1 = grid.avg2_product(v.comps[b], FACE_LOCS[b], B.comps[c], EDGE_LOCS[c], FACE_LOCS[a])
        t2 = grid.avg2_product(v.comps[c], FACE_LOCS[c], B.comps[b], EDGE_LOCS[b], FACE_LOCS[a])
        out.append(t1 - t2)
    return FaceField(grid, *out)


@dataclass
class StabCoeffs:
    """Artificial-resistivity coefficients for the stabilized curl, one
    scalar per face family.  The pairwise symmetrization (the two transverse
    coefficients of each component are equal) keeps the resistive operator
    symmetric."""

    grid: StaggeredGrid
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def comps(self):
        return (self.sx, self.sy, self.sz)

    @classmethod
    def zero(cls, grid: StaggeredGrid):
        return cls(grid, *(grid.zeros(loc) for loc in FACE_LOCS))


def stab_coeffs(grid: StaggeredGrid, v_f: FaceField, alpha: float) -> StabCoeffs:
    """Local artificial resistivity s = alpha * max|v_b| * dx_b / 2.

    For the a-face coefficient, each transverse axis b contributes the local
    three-point maximum of |v_b| (pooled along b to cells, then along a to
    the a-faces) scaled by alpha*dx_b/2; the two contributions are merged
    with a max, which enforces the symmetrization identity."""
    d = grid.dx
    comps = []
    for a in AXES:
        best = grid.zeros(FACE_LOCS[a])
        for b in AXES:
            if b == a:
                continue
            t = grid.max_down(np.abs(v_f.comps[b]), b)  # onto cells
            t = grid.max_up(t, a)  # onto a-faces
            best = np.maximum(best, 0.5 * alpha * d[b] * t)
        comps.append(best)
    return StabCoeffs(grid, *comps)


def resistive_curl(
    grid: StaggeredGrid, B: EdgeField, eta: float, s: StabCoeffs | None = None
) -> FaceField:
    """Stabilized resistive curl (eta + s) * (curl B) on faces."""
    J = curl_e2f(grid, B)
    if s is None:
        if eta == 0.0:
            return FaceField.zeros(grid)
        return FaceField(grid, *(eta * c for c in J.comps))
    return FaceField(grid, *((eta + sc) * c for c, sc in zip(J.comps, s.comps)))


def lorentz_accel(grid: StaggeredGrid, B_arg: EdgeField, B_iter: EdgeField, rho_f: FaceField) -> FaceField:
    """Face acceleration ((curl B_arg) x B_iter) / (4 pi rho_f)."""
    J = curl_e2f(grid, B_arg)
    F = cross_fe(grid, J, B_iter)
    return FaceField(grid, *(c / (FOUR_PI * r) for c, r in zip(F.comps, rho_f.comps)))
