"""Implicit pressure (acoustic) subsystem.

Substituting the face momentum update into the energy balance gives one
scalar Helmholtz-type system per inner sweep,

    rho_next e(p) - theta_p^2 dt^2 div( h_f grad p ) = r_b,

which is linear for the ideal gas and symmetric positive definite.  The
committed momentum/energy updates are written in flux form so totals
telescope; the committed pressure is re-derived from the conserved total
energy, which keeps the algebraic identity rhoE = rho e + rho k + m exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import (
    FaceField,
    IdealGas,
    Params,
    PositivityError,
    face_density,
    kinetic_energy_cell,
)
from .grid import AXES, StaggeredGrid
from .krylov import SolveStats, cg_solve
from .ops import div_f2c, grad_c2f


@dataclass
class PressureCtx:
    """Frozen data of one inner sweep: face enthalpies and theta weights."""

    grid: StaggeredGrid
    dt: float
    theta_p: float
    gamma: float
    rho_next: np.ndarray
    h_f: FaceField


def _h_div_grad(ctx: PressureCtx, p: np.ndarray) -> np.ndarray:
    g = grad_c2f(ctx.grid, p)
    return div_f2c(ctx.grid, FaceField(ctx.grid, *(h * c for h, c in zip(ctx.h_f.comps, g.comps))))


def apply_pressure(ctx: PressureCtx, p: np.ndarray) -> np.ndarray:
    """rho_next * e(p) - theta_p^2 dt^2 div(h_f grad p)."""
    eos = IdealGas(ctx.gamma)
    out = ctx.rho_next * eos.internal_energy(p, ctx.rho_next)
    coef = (ctx.theta_p * ctx.dt) ** 2
    if coef > 0.0:
        out = out - coef * _h_div_grad(ctx, p)
    return out


def face_enthalpy(grid: StaggeredGrid, p: np.ndarray, rho: np.ndarray, gamma: float) -> FaceField:
    h = IdealGas(gamma).enthalpy(p, rho)
    return FaceField(grid, *(grid.avg_up(h, a) for a in AXES))


@dataclass
class PressureResult:
    p: np.ndarray
    mom: np.ndarray
    rhoE: np.ndarray
    mom_f: FaceField
    p_star: np.ndarray
    p_iter: np.ndarray
    stats: list


def solve_pressure(
    grid: StaggeredGrid,
    rho_next: np.ndarray,
    mom_tilde: np.ndarray,
    rhoE_tilde: np.ndarray,
    mom_f_tilde: FaceField,
    m_new: np.ndarray,
    p_n: np.ndarray,
    params: Params,
    dt: float,
    p_init: np.ndarray | None = None,
    mom_init: np.ndarray | None = None,
) -> PressureResult:
    """Inner pressure loop (picard_s sweeps) plus the committed flux-form
    momentum/energy finalization.

    ``mom_tilde``/``rhoE_tilde`` are the cell momentum/energy after the
    explicit and magnetic stages (no pressure flux), ``mom_f_tilde`` the face
    momentum at that point, and ``m_new`` the cell magnetic energy of the
    committed field.  ``p_init``/``mom_init`` warm-start the inner sweeps
    from the previous outer iterate so the nested recursion keeps converging
    across outer sweeps instead of restarting from the time-n state.
    """
    th = params.theta_p
    eos = IdealGas(params.gamma)
    p_s = p_n if p_init is None else p_init
    mom_s = mom_tilde if mom_init is None else mom_init
    p_star = None
    h_f = None
    all_stats: list[SolveStats] = []

    for _ in range(params.picard_s):
        if np.any(p_s <= 0.0):
            where = np.unravel_index(int(np.argmax(p_s <= 0.0)), p_s.shape)
            raise PositivityError("non-positive pressure iterate in acoustic stage", where=where)
        h_f = face_enthalpy(grid, p_s, rho_next, params.gamma)
        ctx = PressureCtx(grid, dt, th, params.gamma, rho_next, h_f)
        rho_k = kinetic_energy_cell(rho_next, mom_s)
        d_b = rhoE_tilde - m_new - rho_k
        flux = FaceField(grid, *(h * mf for h, mf in zip(h_f.comps, mom_f_tilde.comps)))
        rhs = d_b - dt * div_f2c(grid, flux)
        if th < 1.0:
            rhs = rhs + th * (1.0 - th) * dt * dt * _h_div_grad(ctx, p_n)

        def op(vec: np.ndarray) -> np.ndarray:
            return apply_pressure(ctx, vec.reshape(p_n.shape)).ravel()

        x, stats = cg_solve(op, rhs.ravel(), x0=p_s.ravel(), tol=params.cg_tol, maxit=params.cg_maxit)
        all_stats.append(stats)
        p_new = x.reshape(p_n.shape)
        p_star = (1.0 - th) * p_n + th * p_new
        mom_s = mom_tilde.copy()
        for a in AXES:
            p_face = grid.avg_up(p_star, a)
            mom_s[a] -= (dt / grid.dx[a]) * grid.diff_down(p_face, a)
        p_s = p_new

    gp = grad_c2f(grid, p_star)
    mom_f = FaceField(grid, *(mf - dt * c for mf, c in zip(mom_f_tilde.comps, gp.comps)))
    mom_f_theta = FaceField(grid, *(mf - th * dt * c for mf, c in zip(mom_f_tilde.comps, gp.comps)))
    eflux = FaceField(grid, *(h * mf for h, mf in zip(h_f.comps, mom_f_theta.comps)))
    rhoE_new = rhoE_tilde - dt * div_f2c(grid, eflux)

    p_committed = (params.gamma - 1.0) * (rhoE_new - kinetic_energy_cell(rho_next, mom_s) - m_new)
    return PressureResult(p_committed, mom_s, rhoE_new, mom_f, p_star, p_s, all_stats)
