"""First-order evolution of the free Dirac equation in two-spinor form.

With x0 = c*t and mu = m*c/hbar the coupled system reads

    d0 psi1 = -i*mu*psi1 - sigma^i d_i psi2
    d0 psi2 = +i*mu*psi2 - sigma^i d_i psi1

and the phase-shifted ("hatted") variables psi_hat = exp(-i*mu*x0) * psi obey

    d0 psi1_hat = -2i*mu*psi1_hat - sigma^i d_i psi2_hat
    d0 psi2_hat =                 - sigma^i d_i psi1_hat

Spatial derivatives are periodic central differences; time stepping is the
classic four-stage Runge-Kutta scheme in x0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import pauli
from .errors import GridError, NumericalInstabilityError
from .lattice import Grid, spatial_derivative
from .params import PhysParams

# cumulative growth beyond this factor aborts evolve() even if no single step
# trips the one-step detector (marginally unstable schemes grow slowly)
_RUNAWAY_FACTOR = 1e6


@dataclass
class DiracState:
    """Two two-spinor fields (2, *grid.shape) at time coordinate x0."""

    psi1: np.ndarray
    psi2: np.ndarray
    x0: float
    grid: Grid

    def __post_init__(self):
        expected = (2,) + self.grid.shape
        for name in ("psi1", "psi2"):
            f = getattr(self, name)
            if f.shape != expected:
                raise GridError(f"{name} shape {f.shape} != {expected}")


@dataclass
class SpinorTrajectory:
    """Recorded (psi1, psi2) levels at uniformly spaced x0 values."""

    x0: np.ndarray      # (nt,)
    psi1: np.ndarray    # (nt, 2, *grid.shape)
    psi2: np.ndarray
    grid: Grid
    params: PhysParams

    @property
    def record_step(self) -> float:
        """x0 spacing between recorded levels."""
        return float(self.x0[1] - self.x0[0]) if len(self.x0) > 1 else 0.0

    def state(self, level: int) -> DiracState:
        return DiracState(self.psi1[level].copy(), self.psi2[level].copy(),
                          float(self.x0[level]), self.grid)


def sigma_dot_grad(psi: np.ndarray, grid: Grid, order: int = 2) -> np.ndarray:
    """sigma^i d_i psi for a two-spinor field psi of shape (2, *grid.shape)."""
    out = np.zeros_like(psi)
    for axis in range(grid.dims):
        d = spatial_derivative(psi, grid, axis, order)
        out += np.einsum("ab,b...->a...", pauli(axis + 1), d)
    return out


def dirac_rhs(psi1, psi2, grid: Grid, params: PhysParams, order: int = 2):
    """d0(psi1, psi2) of the coupled two-spinor system."""
    mu = params.mass_wavenumber
    d1 = -1j * mu * psi1 - sigma_dot_grad(psi2, grid, order)
    d2 = 1j * mu * psi2 - sigma_dot_grad(psi1, grid, order)
    return d1, d2


def hatted_rhs(psi1, psi2, grid: Grid, params: PhysParams, order: int = 2):
    """d0(psi1_hat, psi2_hat) of the phase-shifted system."""
    mu = params.mass_wavenumber
    d1 = -2j * mu * psi1 - sigma_dot_grad(psi2, grid, order)
    d2 = -sigma_dot_grad(psi1, grid, order)
    return d1, d2


def to_hatted(state: DiracState, params: PhysParams) -> DiracState:
    """Multiply both spinors by exp(-i*mu*x0)."""
    phase = np.exp(-1j * params.mass_wavenumber * state.x0)
    return DiracState(state.psi1 * phase, state.psi2 * phase, state.x0, state.grid)


def from_hatted(state: DiracState, params: PhysParams) -> DiracState:
    """Inverse of to_hatted."""
    phase = np.exp(1j * params.mass_wavenumber * state.x0)
    return DiracState(state.psi1 * phase, state.psi2 * phase, state.x0, state.grid)


def step(state: DiracState, dt: float, params: PhysParams, order: int = 2,
         hatted: bool = False) -> DiracState:
    """One RK4 step of size dt (local error O(dt^5)).

    Raises NumericalInstabilityError if max|psi| grows by more than
    params.instability_growth in the step or any value goes non-finite.
    """
    rhs = hatted_rhs if hatted else dirac_rhs
    h = params.c * dt
    grid = state.grid
    p1, p2 = state.psi1, state.psi2

    a1, b1 = rhs(p1, p2, grid, params, order)
    a2, b2 = rhs(p1 + 0.5 * h * a1, p2 + 0.5 * h * b1, grid, params, order)
    a3, b3 = rhs(p1 + 0.5 * h * a2, p2 + 0.5 * h * b2, grid, params, order)
    a4, b4 = rhs(p1 + h * a3, p2 + h * b3, grid, params, order)
    new1 = p1 + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    new2 = p2 + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)

    old_max = max(np.max(np.abs(p1)), np.max(np.abs(p2)))
    new_max = max(np.max(np.abs(new1)), np.max(np.abs(new2)))
    if not np.isfinite(new_max):
        raise NumericalInstabilityError(
            f"non-finite field after step to x0={state.x0 + h:g}"
        )
    if old_max > 0 and new_max > params.instability_growth * old_max:
        raise NumericalInstabilityError(
            f"max|psi| grew {new_max / old_max:.3g}x in one step at x0={state.x0 + h:g} "
            f"(limit {params.instability_growth:g}x)"
        )
    return DiracState(new1, new2, state.x0 + h, grid)


def n_steps_for(duration: float, dt: float, record_every: int) -> int:
    """Step count covering duration, rounded up to a whole number of records."""
    if duration <= 0:
        raise GridError(f"duration must be positive, got {duration}")
    if record_every < 1:
        raise GridError(f"record_every must be >= 1, got {record_every}")
    n = int(np.ceil(duration / dt - 1e-9))
    n = max(n, 1)
    return ((n + record_every - 1) // record_every) * record_every


def evolve(initial: DiracState, duration: float, params: PhysParams,
           record_every: int = 1, order: int = 2, hatted: bool = False) -> SpinorTrajectory:
    """Integrate for `duration` (time units), recording every record_every steps.

    The step count is rounded up to a whole number of records, so the final
    recorded x0 may slightly exceed c*duration; recorded levels are always
    uniformly spaced and include the initial and final states.
    """
    grid = initial.grid
    dt = grid.dt
    n = n_steps_for(duration, dt, record_every)
    xs, p1s, p2s = [initial.x0], [initial.psi1.copy()], [initial.psi2.copy()]
    state = initial
    start_max = max(np.max(np.abs(initial.psi1)), np.max(np.abs(initial.psi2)))
    for i in range(1, n + 1):
        state = step(state, dt, params, order=order, hatted=hatted)
        if i % record_every == 0:
            cur_max = max(np.max(np.abs(state.psi1)), np.max(np.abs(state.psi2)))
            if start_max > 0 and cur_max > _RUNAWAY_FACTOR * start_max:
                raise NumericalInstabilityError(
                    f"cumulative growth {cur_max / start_max:.3g}x at x0={state.x0:g}"
                )
            xs.append(state.x0)
            p1s.append(state.psi1)
            p2s.append(state.psi2)
    return SpinorTrajectory(np.array(xs), np.stack(p1s), np.stack(p2s), grid, params)
