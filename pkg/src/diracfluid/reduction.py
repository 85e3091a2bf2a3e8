"""Reduction of the two-spinor Dirac system to a single second-order equation.

In hatted variables (psi_hat = exp(-i*mu*x0)*psi, mu = m*c/hbar) the second
spinor can be eliminated through its running time integral:

    psi2_hat(x0) = psi2_hat(0) - sigma^i d_i [ int_0^x0 psi1_hat ]
    d0^2 psi1_hat + 2i*mu*d0 psi1_hat - lap psi1_hat = 0
    d0 psi1_hat|_0 = -2i*mu*psi1(0) - sigma^i d_i psi2(0)

Undoing the phase shift turns the second-order equation into the Klein-Gordon
equation (d0^2 - lap + mu^2) psi1 = 0 with initial slope
-i*mu*psi1(0) - sigma^i d_i psi2(0).

The stepper is an explicit three-level scheme: central differences for both
time derivatives, the Laplacian evaluated on the middle level, and a per-point
complex solve for the newest level.  The running integral is accumulated with
the trapezoidal rule and the first level is bootstrapped by a Taylor step that
uses the equation itself for the second derivative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DiracState, SpinorTrajectory, evolve, sigma_dot_grad
from .errors import GridError, NumericalInstabilityError
from .lattice import Grid, integrate_volume, laplacian
from .params import PhysParams

_RUNAWAY_FACTOR = 1e6


@dataclass
class ReducedState:
    """State of the second-order evolution at time coordinate x0.

    psi1hat_prev is the level one step behind psi1hat (None only before the
    bootstrap step); int_psi1hat is the trapezoidal accumulation of psi1hat
    from 0 to x0; W = -sigma^k d_k psi2hat0 is static.
    """

    psi1hat: np.ndarray
    psi1hat_prev: np.ndarray | None
    int_psi1hat: np.ndarray
    W: np.ndarray
    psi2hat0: np.ndarray
    x0: float
    grid: Grid


@dataclass
class ReducedTrajectory:
    """Recorded psi1hat and integral levels plus the static reconstruction data."""

    x0: np.ndarray           # (nt,)
    psi1hat: np.ndarray      # (nt, 2, *grid.shape)
    int_psi1hat: np.ndarray  # (nt, 2, *grid.shape)
    psi2hat0: np.ndarray
    W: np.ndarray
    grid: Grid
    params: PhysParams

    @property
    def record_step(self) -> float:
        return float(self.x0[1] - self.x0[0]) if len(self.x0) > 1 else 0.0


def build_W(psi20: np.ndarray, grid: Grid, order: int = 2) -> np.ndarray:
    """Static source W = -sigma^k d_k psi2hat(0) (hatted = plain at x0 = 0)."""
    return -sigma_dot_grad(psi20, grid, order)


def initial_time_derivative(psi10, psi20, grid: Grid, params: PhysParams,
                            order: int = 2, form: str = "hatted") -> np.ndarray:
    """Initial d0 slope: 'hatted' for psi1hat, 'kg' for the un-hatted psi1.

    The two differ exactly by +i*mu*psi10 (mass coefficient -2i*mu vs -i*mu).
    """
    mu = params.mass_wavenumber
    if form == "hatted":
        coeff = -2j * mu
    elif form == "kg":
        coeff = -1j * mu
    else:
        raise ValueError(f"form must be 'hatted' or 'kg', got {form!r}")
    return coeff * psi10 - sigma_dot_grad(psi20, grid, order)


def initialize_reduced(initial: DiracState, params: PhysParams, order: int = 2) -> ReducedState:
    """ReducedState at x0 = 0 from Dirac initial data (x0 must be 0)."""
    if initial.x0 != 0.0:
        raise GridError("reduction expects initial data at x0 = 0")
    return ReducedState(
        psi1hat=initial.psi1.copy(),
        psi1hat_prev=None,
        int_psi1hat=np.zeros_like(initial.psi1),
        W=build_W(initial.psi2, initial.grid, order),
        psi2hat0=initial.psi2.copy(),
        x0=0.0,
        grid=initial.grid,
    )


def _bootstrap_level(state: ReducedState, initial_slope: np.ndarray, h: float,
                     params: PhysParams, order: int) -> np.ndarray:
    """Second-order Taylor start: psi(h) = psi + h*D + h^2/2 * (lap psi - 2i*mu*D)."""
    mu = params.mass_wavenumber
    second = laplacian(state.psi1hat, state.grid, order) - 2j * mu * initial_slope
    return state.psi1hat + h * initial_slope + 0.5 * h * h * second


def reduced_step(state: ReducedState, dt: float, params: PhysParams,
                 order: int = 2, initial_slope: np.ndarray | None = None) -> ReducedState:
    """Advance one step of size dt.

    The first step (psi1hat_prev is None) needs the initial slope field; later
    steps solve the three-level scheme

        (1 + i*mu*h) psi^{n+1} = 2 psi^n - (1 - i*mu*h) psi^{n-1} + h^2 lap psi^n.
    """
    h = params.c * dt
    mu = params.mass_wavenumber
    if state.psi1hat_prev is None:
        if initial_slope is None:
            raise GridError("first reduced step needs the initial d0 slope")
        new = _bootstrap_level(state, initial_slope, h, params, order)
    else:
        lap = laplacian(state.psi1hat, state.grid, order)
        num = 2.0 * state.psi1hat - (1.0 - 1j * mu * h) * state.psi1hat_prev + h * h * lap
        new = num / (1.0 + 1j * mu * h)

    old_max = float(np.max(np.abs(state.psi1hat)))
    new_max = float(np.max(np.abs(new)))
    if not np.isfinite(new_max):
        raise NumericalInstabilityError(f"non-finite psi1hat after step to x0={state.x0 + h:g}")
    if old_max > 0 and new_max > params.instability_growth * old_max:
        raise NumericalInstabilityError(
            f"max|psi1hat| grew {new_max / old_max:.3g}x in one step at x0={state.x0 + h:g} "
            f"(limit {params.instability_growth:g}x)"
        )
    return ReducedState(
        psi1hat=new,
        psi1hat_prev=state.psi1hat,
        int_psi1hat=state.int_psi1hat + 0.5 * h * (state.psi1hat + new),
        W=state.W,
        psi2hat0=state.psi2hat0,
        x0=state.x0 + h,
        grid=state.grid,
    )


def reconstruct_psi2(state: ReducedState, order: int = 2) -> np.ndarray:
    """psi2hat = psi2hat(0) - sigma^i d_i int_psi1hat (exact at x0 = 0)."""
    return state.psi2hat0 - sigma_dot_grad(state.int_psi1hat, state.grid, order)


def evolve_reduced(initial: DiracState, duration: float, params: PhysParams,
                   record_every: int = 1, order: int = 2) -> ReducedTrajectory:
    """Integrate the reduced system, recording every record_every steps."""
    from .dynamics import n_steps_for

    grid = initial.grid
    dt = grid.dt
    n = n_steps_for(duration, dt, record_every)
    state = initialize_reduced(initial, params, order)
    slope = initial_time_derivative(initial.psi1, initial.psi2, grid, params, order, "hatted")
    xs, levels, ints = [0.0], [state.psi1hat.copy()], [state.int_psi1hat.copy()]
    start_max = float(np.max(np.abs(state.psi1hat)))
    for i in range(1, n + 1):
        state = reduced_step(state, dt, params, order=order, initial_slope=slope)
        if i % record_every == 0:
            cur_max = float(np.max(np.abs(state.psi1hat)))
            if start_max > 0 and cur_max > _RUNAWAY_FACTOR * start_max:
                raise NumericalInstabilityError(
                    f"cumulative growth {cur_max / start_max:.3g}x at x0={state.x0:g}"
                )
            xs.append(state.x0)
            levels.append(state.psi1hat)
            ints.append(state.int_psi1hat)
    return ReducedTrajectory(np.array(xs), np.stack(levels), np.stack(ints),
                             state.psi2hat0, state.W, grid, params)


def unhat_trajectory(traj: ReducedTrajectory, order: int = 2) -> SpinorTrajectory:
    """Reconstruct psi2hat per level and undo the phase shift on both spinors."""
    mu = traj.params.mass_wavenumber
    phases = np.exp(1j * mu * traj.x0)
    nt = len(traj.x0)
    psi1 = traj.psi1hat * phases.reshape((nt,) + (1,) * (traj.psi1hat.ndim - 1))
    psi2 = np.empty_like(psi1)
    for n in range(nt):
        psi2hat = traj.psi2hat0 - sigma_dot_grad(traj.int_psi1hat[n], traj.grid, order)
        psi2[n] = phases[n] * psi2hat
    return SpinorTrajectory(traj.x0.copy(), psi1, psi2, traj.grid, traj.params)


# ---------------------------------------------------------------------------
# Residual diagnostics


def kg_residual(prev, curr, nxt, h: float, grid: Grid, params: PhysParams,
                order: int = 2) -> np.ndarray:
    """Klein-Gordon residual (d0^2 - lap + mu^2) psi1 on three stored levels."""
    mu = params.mass_wavenumber
    d0d0 = (nxt - 2.0 * curr + prev) / (h * h)
    return d0d0 - laplacian(curr, grid, order) + mu * mu * curr


def hatted_residual(prev, curr, nxt, h: float, grid: Grid, params: PhysParams,
                    order: int = 2) -> np.ndarray:
    """Residual (d0^2 + 2i*mu*d0 - lap) psi1hat on three stored levels."""
    mu = params.mass_wavenumber
    d0d0 = (nxt - 2.0 * curr + prev) / (h * h)
    d0 = (nxt - prev) / (2.0 * h)
    return d0d0 + 2j * mu * d0 - laplacian(curr, grid, order)


def integral_residual(int_prev, int_curr, int_nxt, h: float, grid: Grid,
                      params: PhysParams, W: np.ndarray, order: int = 2) -> np.ndarray:
    """Residual (d0^2 + 2i*mu*d0 - lap) int_psi1hat - W on three integral levels."""
    return hatted_residual(int_prev, int_curr, int_nxt, h, grid, params, order) - W


def _l2(field: np.ndarray, grid: Grid) -> float:
    mag2 = np.abs(field) ** 2
    total = mag2.sum(axis=tuple(range(field.ndim - grid.dims)))
    return float(np.sqrt(integrate_volume(total, grid).real))


def kg_residual_norm(prev, curr, nxt, h: float, grid: Grid, params: PhysParams,
                     order: int = 2, kind: str = "kg") -> float:
    """Relative L2 residual norm: ||r|| / max of the individual term norms."""
    mu = params.mass_wavenumber
    if kind == "kg":
        r = kg_residual(prev, curr, nxt, h, grid, params, order)
    elif kind == "hatted":
        r = hatted_residual(prev, curr, nxt, h, grid, params, order)
    else:
        raise ValueError(f"kind must be 'kg' or 'hatted', got {kind!r}")
    d0d0 = (nxt - 2.0 * curr + prev) / (h * h)
    scale = max(_l2(d0d0, grid), _l2(laplacian(curr, grid, order), grid),
                _l2(mu * mu * curr, grid), 1e-300)
    return _l2(r, grid) / scale


def residual_series(psi1_levels: np.ndarray, x0: np.ndarray, grid: Grid,
                    params: PhysParams, order: int = 2, kind: str = "kg") -> np.ndarray:
    """Relative residual norms at interior recorded levels; NaN at the ends."""
    nt = len(x0)
    out = np.full(nt, np.nan)
    if nt < 3:
        return out
    h = float(x0[1] - x0[0])
    for n in range(1, nt - 1):
        out[n] = kg_residual_norm(psi1_levels[n - 1], psi1_levels[n], psi1_levels[n + 1],
                                  h, grid, params, order, kind)
    return out


# ---------------------------------------------------------------------------
# Equivalence of the first-order and reduced evolutions


@dataclass
class EquivalenceReport:
    """Per-recorded-time discrepancy between the two evolution routes."""

    x0: np.ndarray
    sup_discrepancy: np.ndarray
    l2_discrepancy: np.ndarray
    kg_residual: np.ndarray   # relative KG residual of the reduced, un-hatted psi1

    @property
    def max_sup(self) -> float:
        return float(np.max(self.sup_discrepancy))

    def rows(self):
        return np.column_stack([self.x0, self.sup_discrepancy,
                                self.l2_discrepancy, self.kg_residual])


def compare_trajectories(a: SpinorTrajectory, b: SpinorTrajectory) -> tuple[np.ndarray, np.ndarray]:
    """(sup, L2) discrepancy per recorded level between two spinor trajectories."""
    if a.grid != b.grid or len(a.x0) != len(b.x0) or not np.allclose(a.x0, b.x0):
        raise GridError("trajectories are not sampled on the same grid and times")
    nt = len(a.x0)
    sup = np.empty(nt)
    l2 = np.empty(nt)
    for n in range(nt):
        d1 = a.psi1[n] - b.psi1[n]
        d2 = a.psi2[n] - b.psi2[n]
        sup[n] = max(np.max(np.abs(d1)), np.max(np.abs(d2)))
        mag2 = np.abs(d1) ** 2 + np.abs(d2) ** 2
        l2[n] = np.sqrt(integrate_volume(mag2.sum(axis=0), a.grid).real)
    return sup, l2


def equivalence_report(initial: DiracState, duration: float, params: PhysParams,
                       record_every: int = 1, order: int = 2) -> EquivalenceReport:
    """Run both evolution routes from the same initial data and compare them."""
    direct = evolve(initial, duration, params, record_every=record_every, order=order)
    reduced = evolve_reduced(initial, duration, params, record_every=record_every, order=order)
    recon = unhat_trajectory(reduced, order=order)
    sup, l2 = compare_trajectories(direct, recon)
    res = residual_series(recon.psi1, recon.x0, initial.grid, params, order, kind="kg")
    return EquivalenceReport(direct.x0.copy(), sup, l2, res)
