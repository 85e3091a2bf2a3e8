"""Lagrangian densities, the probability current, and residual reports.

The chain of equalities being verified, all pointwise:

    L = m [ (hbar/m)^2 d^mu psi_s* d_mu psi_s - c^2 |psi_s|^2 ]   (sum over spins)
      = L_q + L_c                                                  (polar split)
    L_q = (hbar^2/m) [ (dR_up)^2 + (dR_down)^2 ]
        = (hbar^2/m) [ (dR)^2 + R^2 (dtheta)^2 ]                   (R, theta polar)
        = (hbar^2/2m) [ (da_0)^2 + a_0^2 (dtheta)^2 ]              (a_0 = sqrt(2) R)
    L_c = m [ R_up^2 ((dnu_up)^2 - c^2) + R_down^2 ((dnu_down)^2 - c^2) ]
        = rho_bar (v_C.v_C - c^2)                                  (Clebsch)
    rho_bar (v_C.v_C - c^2) = c rho_0 (sqrt(v_C.v_C) - c)          (difference of squares)

plus current conservation d_mu J^mu = 0 for J^0 = psi1.psi1 + psi2.psi2,
J^i = 2 Re(psi1^dag sigma^i psi2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import pauli
from .lattice import Grid, integrate_volume, spatial_derivative
from .params import PhysParams

_SCALE_FLOOR = 1e-300


def minkowski_square_field(v: np.ndarray) -> np.ndarray:
    """|v0|^2 - |v1|^2 - |v2|^2 - |v3|^2 for (4, ...) real or complex arrays."""
    mags = np.abs(v) ** 2
    return mags[0] - mags[1] - mags[2] - mags[3]


def four_gradient(prev: np.ndarray, curr: np.ndarray, nxt: np.ndarray,
                  h: float, grid: Grid, order: int = 2) -> np.ndarray:
    """Lower-index stencil gradient (4, *input shape) from three x0 levels."""
    out = np.zeros((4,) + curr.shape, dtype=curr.dtype)
    out[0] = (nxt - prev) / (2.0 * h)
    for axis in range(grid.dims):
        out[1 + axis] = spatial_derivative(curr, grid, axis, order)
    return out


def lagrangian_spinor_from_gradients(psi1: np.ndarray, dpsi1: np.ndarray,
                                     params: PhysParams) -> np.ndarray:
    """L for the first two-spinor given d_mu psi1 with shape (4, 2, *shape)."""
    kinetic = minkowski_square_field(dpsi1[:, 0]) + minkowski_square_field(dpsi1[:, 1])
    mass = np.abs(psi1[0]) ** 2 + np.abs(psi1[1]) ** 2
    return params.m * ((params.hbar / params.m) ** 2 * kinetic - params.c ** 2 * mass)


def lagrangian_spinor(psi1_prev, psi1_curr, psi1_next, h: float, grid: Grid,
                      params: PhysParams, order: int = 2) -> np.ndarray:
    dpsi = four_gradient(psi1_prev, psi1_curr, psi1_next, h, grid, order)
    return lagrangian_spinor_from_gradients(psi1_curr, dpsi, params)


def lagrangian_split(R_up, R_down, dR_up, dR_down, d_nu_up, d_nu_down,
                     params: PhysParams):
    """(L_q, L_c): amplitude-gradient and phase parts of the polar split."""
    hq = params.hbar ** 2 / params.m
    l_q = hq * (minkowski_square_field(dR_up) + minkowski_square_field(dR_down))
    c2 = params.c ** 2
    l_c = params.m * (R_up ** 2 * (minkowski_square_field(d_nu_up) - c2)
                      + R_down ** 2 * (minkowski_square_field(d_nu_down) - c2))
    return l_q, l_c


def lagrangian_quantum_polar(R, theta, dR, dtheta, params: PhysParams) -> np.ndarray:
    hq = params.hbar ** 2 / params.m
    return hq * (minkowski_square_field(dR) + R ** 2 * minkowski_square_field(dtheta))


def fisher_terms(a_0, theta, da_0, dtheta, params: PhysParams):
    """((hbar^2/2m)(da_0)^2, (hbar^2/2m) a_0^2 (dtheta)^2).

    The first term alone is the near-rest quantum Lagrangian; the second is
    the gap it drops.
    """
    half = params.hbar ** 2 / (2.0 * params.m)
    amp = half * minkowski_square_field(da_0)
    angle = half * a_0 ** 2 * minkowski_square_field(dtheta)
    return amp, angle


def lagrangian_classical_clebsch(rho_bar, v_upper, params: PhysParams) -> np.ndarray:
    """rho_bar (v_C.v_C - c^2) for an upper-index velocity array (4, *shape)."""
    return rho_bar * (minkowski_square_field(v_upper) - params.c ** 2)


def lagrangian_classical_fluid(rho_0, v_upper, params: PhysParams) -> np.ndarray:
    """c rho_0 (sqrt(v_C.v_C) - c); negative norms clamp to zero speed."""
    vv = minkowski_square_field(v_upper)
    speed = np.sqrt(np.where(vv >= 0, vv, 0.0))
    return params.c * rho_0 * (speed - params.c)


def probability_current(psi1: np.ndarray, psi2: np.ndarray) -> np.ndarray:
    """Upper-index J^mu, shape (4, *shape), real.

    J^0 is assembled as (|psi1|^2 sum) + (|psi2|^2 sum) so that J^0 >= R^2
    holds exactly in floating point, not just analytically.
    """
    j = np.zeros((4,) + psi1.shape[1:])
    r2 = np.abs(psi1[0]) ** 2 + np.abs(psi1[1]) ** 2
    j[0] = r2 + (np.abs(psi2[0]) ** 2 + np.abs(psi2[1]) ** 2)
    for i in range(3):
        cross = np.einsum("a...,ab,b...->...", np.conj(psi1), pauli(i + 1), psi2)
        j[1 + i] = 2.0 * np.real(cross)
    return j


@dataclass
class ConservationReport:
    """Charge conservation along a trajectory.

    divergence_l2 is NaN at the first and last recorded levels (the time
    stencil needs both neighbours); charge columns cover every level.
    """

    x0: np.ndarray
    divergence_l2: np.ndarray
    total_charge: np.ndarray
    charge_drift: np.ndarray

    def rows(self) -> np.ndarray:
        return np.column_stack([self.x0, self.divergence_l2,
                                self.total_charge, self.charge_drift])

    @property
    def max_drift(self) -> float:
        return float(np.max(self.charge_drift))


def conservation_report(traj, order: int = 2) -> ConservationReport:
    """d_mu J^mu residual and total-charge drift at the recorded levels."""
    grid = traj.grid
    n = traj.x0.shape[0]
    h = traj.record_step
    currents = np.stack([probability_current(traj.psi1[i], traj.psi2[i])
                         for i in range(n)])
    charge = np.array([integrate_volume(currents[i, 0], grid) for i in range(n)])
    drift = np.abs(charge - charge[0]) / max(abs(charge[0]), _SCALE_FLOOR)
    div_l2 = np.full(n, np.nan)
    for i in range(1, n - 1):
        div = (currents[i + 1, 0] - currents[i - 1, 0]) / (2.0 * h)
        for axis in range(grid.dims):
            div = div + spatial_derivative(currents[i, 1 + axis], grid, axis, order)
        div_l2[i] = float(np.sqrt(integrate_volume(div ** 2, grid)))
    return ConservationReport(x0=traj.x0.copy(), divergence_l2=div_l2,
                              total_charge=charge, charge_drift=drift)


def relative_residual(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """|a - b| / max(|a|, |b|, tiny), elementwise."""
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), _SCALE_FLOOR)
    return np.abs(a - b) / scale


@dataclass
class IdentityResidual:
    """One row of an identity report: relative residual statistics."""

    name: str
    grid_tag: str
    branch: str
    residual_l2: float
    residual_sup: float
    masked_fraction: float

    def row(self) -> str:
        return (f"{self.name},{self.grid_tag},{self.branch},"
                f"{self.residual_l2:.17g},{self.residual_sup:.17g},"
                f"{self.masked_fraction:.17g}")


def identity_residual(name: str, grid_tag: str, branch: str, a: np.ndarray,
                      b: np.ndarray, valid: np.ndarray | None = None,
                      scale: np.ndarray | None = None) -> IdentityResidual:
    """Residual statistics for a pointwise identity a = b.

    By default the residual is relative to max(|a|, |b|); pass an explicit
    scale when the identity value itself can vanish (free on-shell fields have
    Lagrangian ~ 0 pointwise while the constituent terms stay finite).
    """
    if scale is None:
        rel = relative_residual(a, b)
    else:
        rel = np.abs(a - b) / np.maximum(scale, _SCALE_FLOOR)
    if valid is None:
        valid = np.ones(rel.shape, dtype=bool)
    n_valid = int(np.sum(valid))
    if n_valid == 0:
        return IdentityResidual(name, grid_tag, branch, float("nan"), float("nan"), 1.0)
    vals = rel[valid]
    return IdentityResidual(
        name=name, grid_tag=grid_tag, branch=branch,
        residual_l2=float(np.sqrt(np.mean(vals ** 2))),
        residual_sup=float(np.max(vals)),
        masked_fraction=1.0 - n_valid / rel.size,
    )
