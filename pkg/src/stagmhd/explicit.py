"""Explicit conservative stage: convective split fluxes with Rusanov
dissipation, optional second-order reconstruction with a half-step
predictor, and node-centred viscous/heat fluxes.

Only (rho, rho*v, rho*E) are updated here; pressure and magnetic forces are
handled by the implicit stages.  The Rusanov dissipation coefficient is the
largest eigenvalue of the *selected* subset of the split spectrum, which is
what decouples the permissible time step from the fast magnetosonic speed.
"""

from __future__ import annotations

import numpy as np

from .fields import (
    FOUR_PI,
    EdgeField,
    EigenSet,
    Params,
    PositivityError,
    cons_to_prim,
    magnetic_energy_cell,
    magnetic_field_cell,
    wave_speeds,
)
from .grid import AXES, FACE_LOCS, StaggeredGrid


def minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Slope limiter: 0 on sign disagreement, else the smaller magnitude."""
    return np.where(a * b > 0.0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def max_signal(rho, p, b_par, b_t1, b_t2, u, gamma, eigen_set: EigenSet):
    """Largest |eigenvalue| of the selected split system along one axis.

    ``u`` is the velocity component along the axis, ``b_par`` the parallel
    magnetic component and ``b_t1``/``b_t2`` the transverse ones.
    """
    au = np.abs(u)
    if eigen_set is EigenSet.V:
        return au
    if eigen_set is EigenSet.VB:
        b2 = (b_par**2 + b_t1**2 + b_t2**2) / (FOUR_PI * rho)
        return au + np.sqrt(b2)
    _, _, _, cf = wave_speeds(rho, p, b_par, b_t1, b_t2, gamma, 0)
    return au + cf


def _convective_flux(U: np.ndarray, axis: int) -> np.ndarray:
    rho = U[0]
    u = U[1 + axis] / rho
    rk = 0.5 * (U[1] ** 2 + U[2] ** 2 + U[3] ** 2) / rho
    return np.stack([U[1 + axis], u * U[1], u * U[2], u * U[3], u * rk])


def _pad_cells(grid: StaggeredGrid, a: np.ndarray, axis: int, before: int, after: int):
    return grid._pad(a, axis, before, after)


def _reconstruct(grid: StaggeredGrid, U: np.ndarray, axis: int, dt: float, params: Params):
    """Face-adjacent states (UL, UR) at the ``axis`` faces.

    First order hands over the neighbouring cell values.  Second order adds
    limited (or, with the limiter off, central) slopes plus a convective
    half-step predictor evaluated on the cell's own edge states.
    """
    n = grid.n[axis]
    nf = grid.axis_size(axis, True)
    ax = axis - 3

    def take(arr, s):
        idx = [slice(None)] * arr.ndim
        idx[ax] = s
        return arr[tuple(idx)]

    if not params.second_order:
        Up = _pad_cells(grid, U, axis, 1, 1)
        return take(Up, slice(0, nf)), take(Up, slice(1, nf + 1))

    Ue = _pad_cells(grid, U, axis, 2, 2)
    Uc = take(Ue, slice(1, n + 3))
    dm = Uc - take(Ue, slice(0, n + 2))
    dp = take(Ue, slice(2, n + 4)) - Uc
    slope = minmod(dm, dp) if params.limiter_on else 0.5 * (dm + dp)
    Uminus = Uc - 0.5 * slope
    Uplus = Uc + 0.5 * slope
    dtdx = 0.5 * dt / grid.dx[axis]
    dF = _convective_flux(Uplus, axis) - _convective_flux(Uminus, axis)
    Uminus = Uminus - dtdx * dF
    Uplus = Uplus - dtdx * dF
    return take(Uplus, slice(0, nf)), take(Uminus, slice(1, nf + 1))


def _face_pressure(U_side, m_face, gamma, t):
    rk = 0.5 * (U_side[1] ** 2 + U_side[2] ** 2 + U_side[3] ** 2) / U_side[0]
    p = (gamma - 1.0) * (U_side[4] - rk - m_face)
    if np.any(p <= 0.0):
        where = np.unravel_index(int(np.argmax(p <= 0.0)), p.shape)
        raise PositivityError("non-positive interface pressure", t, where)
    return p


def rusanov_flux(grid: StaggeredGrid, U, B_cell, axis: int, dt: float, params: Params, t=None):
    """Split convective flux with Rusanov dissipation at the ``axis`` faces."""
    UL, UR = _reconstruct(grid, U, axis, dt, params)
    for side in (UL, UR):
        if np.any(side[0] <= 0.0):
            where = np.unravel_index(int(np.argmax(side[0] <= 0.0)), side[0].shape)
            raise PositivityError("non-positive interface density", t, where)
    Bf = np.stack([grid.avg_up(B_cell[a], axis) for a in AXES])
    bp = Bf[axis]
    bt = [Bf[a] for a in AXES if a != axis]
    smax = 0.0
    for side in (UL, UR):
        if params.eigen_set is EigenSet.FULL:
            p = _face_pressure(side, (Bf[0] ** 2 + Bf[1] ** 2 + Bf[2] ** 2) / (2 * FOUR_PI), params.gamma, t)
        else:
            p = None
        lam = max_signal(side[0], p, bp, bt[0], bt[1], side[1 + axis] / side[0], params.gamma, params.eigen_set)
        smax = np.maximum(smax, lam)
    F = 0.5 * (_convective_flux(UL, axis) + _convective_flux(UR, axis)) - 0.5 * smax * (UR - UL)
    return F


def viscous_fluxes(grid: StaggeredGrid, rho, mom, p, params: Params):
    """Per-axis face arrays (5, ...) of the viscous stress and heat fluxes.

    Velocity and temperature gradients are formed at nodes; face fluxes are
    the transverse node averages, with the energy flux assembled from
    face-interpolated velocities against the node-averaged stress.
    """
    mu, kappa = params.mu, params.kappa
    v = mom / rho
    T = p / (rho * params.gas_constant)
    d = grid.dx

    def to_node(f, diff_axis):
        out = f
        for b in AXES:
            if b == diff_axis:
                continue
            out = grid.avg_up(out, b)
        return grid.diff_up(out, diff_axis) / d[diff_axis]

    gv = [[to_node(v[b], a) for b in AXES] for a in AXES]  # gv[a][b] = d_a v_b at nodes
    divv = gv[0][0] + gv[1][1] + gv[2][2]
    sigma = [[mu * (gv[a][b] + gv[b][a]) - (2.0 / 3.0) * mu * divv * (a == b) for b in AXES] for a in AXES]
    gT = [to_node(T, a) for a in AXES]

    out = []
    for a in AXES:
        def to_face(fn):
            r = fn
            for b in AXES:
                if b == a:
                    continue
                r = grid.avg_down(r, b)
            return r

        rows = [np.zeros(grid.shape(FACE_LOCS[a]))]
        sig_face = [to_face(sigma[a][b]) for b in AXES]
        rows.extend(sig_face)
        v_face = [grid.avg_up(v[b], a) for b in AXES]
        energy = sum(v_face[b] * sig_face[b] for b in AXES) + kappa * to_face(gT[a])
        rows.append(energy)
        out.append(np.stack(rows))
    return out


def compute_dt(
    grid: StaggeredGrid,
    rho,
    mom,
    rhoE,
    B_e: EdgeField,
    params: Params,
    eigen_set: EigenSet | None = None,
) -> float:
    """CFL time step: hyperbolic bound from the selected split spectrum plus
    the parabolic viscous/conductive bound.  Falls back to dt_max when both
    vanish, and never exceeds dt_max."""
    es = eigen_set or params.eigen_set
    B_cell = magnetic_field_cell(grid, B_e)
    if es is EigenSet.FULL:
        p = cons_to_prim(rho, mom, rhoE, magnetic_energy_cell(grid, B_e), params.gamma)
        if np.any(p <= 0.0):
            raise PositivityError("non-positive pressure in time-step estimate")
    else:
        p = None
    denom = 0.0
    for a in AXES:
        if grid.degenerate(a):
            continue
        b, c = (a + 1) % 3, (a + 2) % 3
        lam = max_signal(rho, p, B_cell[a], B_cell[b], B_cell[c], mom[a] / rho, params.gamma, es)
        denom += float(np.max(lam)) / grid.dx[a]
    lam_visc = 0.0
    if params.mu > 0.0:
        lam_visc = float(np.max((4.0 / 3.0) * params.mu / rho + params.kappa / (params.cv * rho)))
        denom += 2.0 * lam_visc * sum(1.0 / grid.dx[a] ** 2 for a in AXES if not grid.degenerate(a))
    if denom <= 0.0:
        return params.dt_max
    return min(params.cfl / denom, params.dt_max)


def explicit_step(grid: StaggeredGrid, rho, mom, rhoE, B_e: EdgeField, p, dt: float, params: Params, t=None):
    """One conservative explicit update of (rho, mom, rhoE) with the
    convective split fluxes minus the viscous fluxes.  Returns the starred
    arrays; raises PositivityError if the starred density is inadmissible."""
    U = np.stack([rho, mom[0], mom[1], mom[2], rhoE])
    B_cell = magnetic_field_cell(grid, B_e)
    visc = viscous_fluxes(grid, rho, mom, p, params) if params.mu > 0.0 else None
    dU = np.zeros_like(U)
    for a in AXES:
        if grid.degenerate(a):
            continue
        F = rusanov_flux(grid, U, B_cell, a, dt, params, t)
        if visc is not None:
            F = F - visc[a]
        dU -= (dt / grid.dx[a]) * np.stack([grid.diff_down(F[i], a) for i in range(5)])
    Us = U + dU
    if np.any(Us[0] <= 0.0) or not np.all(np.isfinite(Us)):
        where = np.unravel_index(int(np.argmax(~(Us[0] > 0.0))), Us[0].shape)
        raise PositivityError("explicit stage produced inadmissible density", t, where)
    return Us[0], Us[1:4], Us[4]
