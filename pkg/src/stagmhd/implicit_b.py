"""Implicit magnetic (Alfven) subsystem.

The face velocity responds to the Lorentz force while the edge magnetic
field follows the circulation of the electric field; eliminating the
velocity yields one symmetric positive definite system per Picard sweep,

    A x = x + theta_b dt curl_f2e( (eta + s) curl_e2f x )
            - theta_b^2 dt^2 curl_f2e( [ (curl_e2f x) x B_r ] / (4 pi rho_f) x B_r ),

solved matrix-free with conjugate gradients.  The dissipative block enters
once through the electric field, hence linearly in dt; the tension block
carries dt^2 because the eliminated velocity contributes a second factor.  Every update of B is the curl
of a face field, so the node divergence is transported exactly (to
round-off) through every CG iterate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import (
    FOUR_PI,
    EdgeField,
    FaceField,
    Params,
    magnetic_field_cell,
    pack,
    unpack,
)
from .grid import AXES, StaggeredGrid
from .krylov import SolveStats, cg_solve
from .ops import StabCoeffs, cross_fe, curl_e2f, curl_f2e, lorentz_accel, resistive_curl


@dataclass
class AlfvenCtx:
    """Frozen data of one Picard sweep."""

    grid: StaggeredGrid
    dt: float
    theta_b: float
    eta: float
    stab: StabCoeffs
    B_frozen: EdgeField
    rho_f: FaceField


def _tension_curl(ctx: AlfvenCtx, x: EdgeField) -> FaceField:
    """[(curl x) x B_frozen]/(4 pi rho_f) x B_frozen on faces."""
    w = lorentz_accel(ctx.grid, x, ctx.B_frozen, ctx.rho_f)
    return cross_fe(ctx.grid, w, ctx.B_frozen)


def apply_alfven(ctx: AlfvenCtx, x: EdgeField) -> EdgeField:
    """Symmetric positive definite Picard operator applied to an edge field."""
    g = ctx.grid
    th_dt = ctx.theta_b * ctx.dt
    R = resistive_curl(g, x, ctx.eta, ctx.stab)
    G = _tension_curl(ctx, x)
    return x + curl_f2e(g, th_dt * R - th_dt**2 * G)


def alfven_rhs(ctx: AlfvenCtx, B_n: EdgeField, v_star: FaceField) -> EdgeField:
    """Right-hand side carrying the explicit electric field and the
    (1 - theta_b) portions of the implicit terms evaluated at B^n."""
    g = ctx.grid
    E = cross_fe(g, v_star, ctx.B_frozen)
    th = ctx.theta_b
    F = E - (1.0 - th) * resistive_curl(g, B_n, ctx.eta, ctx.stab)
    if th < 1.0:
        G_n = _tension_curl(ctx, B_n)
        F = F + (th * (1.0 - th) * ctx.dt) * G_n
    return B_n + ctx.dt * curl_f2e(g, F)


def alfven_sweep(
    ctx: AlfvenCtx, B_n: EdgeField, v_star: FaceField, params: Params
) -> tuple[EdgeField, SolveStats]:
    g = ctx.grid
    rhs = alfven_rhs(ctx, B_n, v_star)

    def op(vec: np.ndarray) -> np.ndarray:
        return pack(apply_alfven(ctx, unpack(vec, g, EdgeField)))

    x, stats = cg_solve(op, pack(rhs), x0=pack(B_n), tol=params.cg_tol, maxit=params.cg_maxit)
    return unpack(x, g, EdgeField), stats


def velocity_update(
    ctx: AlfvenCtx, B_n: EdgeField, B_new: EdgeField, v_star: FaceField
) -> FaceField:
    """Face velocity after the magnetic stage: v* plus the full-step Lorentz
    acceleration evaluated at the theta-averaged field against B_frozen."""
    th = ctx.theta_b
    B_mix = EdgeField(ctx.grid, *((1.0 - th) * bn + th * bn1 for bn, bn1 in zip(B_n.comps, B_new.comps)))
    acc = lorentz_accel(ctx.grid, B_mix, ctx.B_frozen, ctx.rho_f)
    return FaceField(ctx.grid, *(v + ctx.dt * a for v, a in zip(v_star.comps, acc.comps)))


def solve_alfven(
    grid: StaggeredGrid,
    B_n: EdgeField,
    v_star: FaceField,
    rho_f: FaceField,
    params: Params,
    dt: float,
    stab: StabCoeffs | None = None,
) -> tuple[EdgeField, FaceField, list[SolveStats]]:
    """Full Picard loop (picard_r sweeps) for the magnetic stage, without
    pressure coupling.  Returns the new edge field, the updated face
    velocity and the per-sweep CG statistics."""
    if stab is None:
        stab = StabCoeffs.zero(grid)
    B_frozen = B_n
    B_new = B_n
    all_stats = []
    for _ in range(params.picard_r):
        ctx = AlfvenCtx(grid, dt, params.theta_b, params.eta, stab, B_frozen, rho_f)
        B_new, stats = alfven_sweep(ctx, B_n, v_star, params)
        all_stats.append(stats)
        B_frozen = B_new
    ctx = AlfvenCtx(grid, dt, params.theta_b, params.eta, stab, B_frozen, rho_f)
    v_new = velocity_update(ctx, B_n, B_new, v_star)
    return B_new, v_new, all_stats


def magnetic_reupdate(
    grid: StaggeredGrid,
    rho_n: np.ndarray,
    mom_n: np.ndarray,
    mom_star: np.ndarray,
    rhoE_star: np.ndarray,
    B_n: EdgeField,
    B_new: EdgeField,
    params: Params,
    dt: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Conservative momentum re-update with the magnetic stress tensor
    evaluated at the theta-averaged new field (central face fluxes).

    The energy is passed through untouched: the field's energy enters the
    acoustic stage locally, by subtracting the committed field's magnetic
    energy from the total when the pressure is recovered.  Advecting the
    magnetic energy here with a flux built from a lagged velocity couples the
    committed pressure to the next velocity with gain ~ 2m/(rho c^2), which
    is far above one in strongly magnetized low-beta states and destroys the
    step in a few iterations."""
    th = params.theta_b
    B_mix = EdgeField(grid, *((1.0 - th) * a + th * b for a, b in zip(B_n.comps, B_new.comps)))
    Bc = magnetic_field_cell(grid, B_mix)
    m_flux = (Bc[0] ** 2 + Bc[1] ** 2 + Bc[2] ** 2) / (2.0 * FOUR_PI)

    mom_hat = mom_star.copy()
    rhoE_hat = rhoE_star.copy()
    for a in AXES:
        if grid.degenerate(a):
            continue
        for b in AXES:
            cell_flux = (m_flux if a == b else 0.0) - Bc[a] * Bc[b] / FOUR_PI
            face_flux = grid.avg_up(cell_flux, a)
            mom_hat[b] -= (dt / grid.dx[a]) * grid.diff_down(face_flux, a)
    return mom_hat, rhoE_hat
