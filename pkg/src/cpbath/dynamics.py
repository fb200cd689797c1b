"""Isolated and noise-averaged dissipative flows on CP^{N-1}.

The equations of motion are

    dx^j/dt = sum_k -i N (delta^{jk} + x^j conj(x^k)) (dH_S/dconj(x^k) + dH_I/dconj(x^k))

with the Markovian interaction derivative ``dH_I/dconj(x^k) = 2 x^k gamma_k
d|x^k|^2/dt``.  Because the right-hand side depends on the velocity itself,
each evaluation solves a small real linear system for ``u_k = d|x^k|^2/dt``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .errors import DimensionMismatch, SingularDamping, StepSizeUnderflow
from .geometry import (
    ProjectiveState,
    apply_inverse_symplectic,
    best_pivot,
    chart_permutation,
    from_projective,
    normalization_factor,
    rechart,
)
from .hamiltonians import HermitianOperator, classical_hamiltonian, grad_classical_hamiltonian

log = logging.getLogger(__name__)

SINGULAR_COND = 1e12


@dataclass(frozen=True, eq=False)
class MarkovianBathSpec:
    """Per-coordinate damping constants (inverse time units)."""

    gammas: np.ndarray

    def __post_init__(self):
        g = np.array(self.gammas, dtype=float).reshape(-1)
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValueError("damping constants must be finite and non-negative")
        g.flags.writeable = False
        object.__setattr__(self, "gammas", g)

    @classmethod
    def uniform(cls, gamma: float, dim: int) -> "MarkovianBathSpec":
        """Same constant on each of the ``dim - 1`` coordinates."""
        return cls(np.full(dim - 1, float(gamma)))

    def __eq__(self, other):
        return isinstance(other, MarkovianBathSpec) and np.array_equal(self.gammas, other.gammas)


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "dopri5"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    dt_initial: float = 1e-3
    dt_max: float = np.inf
    rechart_threshold: float = 1e6
    implicit_tol: float = 1e-12
    implicit_max_iter: int = 1
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.method not in ("dopri5", "rk4"):
            raise ValueError(f"unknown integration method {self.method!r}")
        if self.abs_tol <= 0 or self.rel_tol <= 0 or self.implicit_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.dt_initial <= 0 or self.dt_max <= 0:
            raise ValueError("step sizes must be positive")
        if not self.rechart_threshold > 1:
            raise ValueError("rechart_threshold must exceed 1")


@dataclass(eq=False)
class Trajectory:
    """Sampled solution.  ``states[i]`` may live in different charts."""

    times: np.ndarray
    states: list
    amplitudes: np.ndarray
    energy: np.ndarray
    time_unit: str = "dimensionless"
    n_steps: int = 0
    recharts: list = field(default_factory=list)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _check(H: HermitianOperator, state: ProjectiveState):
    if H.dim != state.dim:
        raise DimensionMismatch(f"Hamiltonian is {H.dim}x{H.dim} but state has N={state.dim}")


def isolated_velocity(H: HermitianOperator, state: ProjectiveState) -> np.ndarray:
    """Hamilton's equations with the system Hamiltonian only (angular units)."""
    _check(H, state)
    return apply_inverse_symplectic(state, grad_classical_hamiltonian(H, state, matrix=H.angular()))


def _damping_system(H, state, bath):
    a = isolated_velocity(H, state)
    x = state.coords
    nrm = normalization_factor(state)
    w = 2.0 * x * bath.gammas
    b = -1j * nrm * (np.diag(w) + np.outer(x, x.conj() * w))
    rhs = 2.0 * (x.conj() * a).real
    mat = 2.0 * (x.conj()[:, None] * b).real
    return a, b, rhs, mat


def dissipative_velocity(H: HermitianOperator, state: ProjectiveState, bath: MarkovianBathSpec) -> np.ndarray:
    """Noise-averaged velocity with Markovian damping, solved exactly.

    Writes the velocity as ``a + B u`` with ``a`` the isolated velocity and
    ``u_k = 2 Re(conj(x^k) v^k)``, then solves ``(I - M) u = b`` for the
    real vector ``u``.
    """
    _check(H, state)
    if bath.gammas.size != state.coords.size:
        raise DimensionMismatch(f"{bath.gammas.size} damping constants for {state.coords.size} coordinates")
    a, b, rhs, mat = _damping_system(H, state, bath)
    lin = np.eye(rhs.size) - mat
    cond = np.linalg.cond(lin)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise SingularDamping(f"damping system has condition number {cond:.3e}")
    u = np.linalg.solve(lin, rhs)
    return a + b @ u


def implicit_residual(H: HermitianOperator, state: ProjectiveState, bath: MarkovianBathSpec, velocity) -> float:
    """Max-abs residual of the self-consistent damping equation at ``velocity``."""
    x = state.coords
    v = np.asarray(velocity, dtype=complex)
    u = 2.0 * (x.conj() * v).real
    grad = grad_classical_hamiltonian(H, state, matrix=H.angular()) + 2.0 * x * bath.gammas * u
    return float(np.max(np.abs(v - apply_inverse_symplectic(state, grad)), initial=0.0))


def _chart_matrix(h: np.ndarray, pivot: int) -> np.ndarray:
    perm = chart_permutation(h.shape[0], pivot)
    return np.ascontiguousarray(h[np.ix_(perm, perm)])


def _raise_status(status: int, t: float):
    if status == kernels.ST_UNDERFLOW:
        raise StepSizeUnderflow(f"step size underflow at t = {t:.6g}")
    if status == kernels.ST_SINGULAR:
        raise SingularDamping(f"damping system became singular at t = {t:.6g}")
    if status == kernels.ST_MAXSTEPS:
        raise StepSizeUnderflow(f"maximum number of steps exceeded at t = {t:.6g}")


def sample_times(t_final: float, sample_dt: float) -> np.ndarray:
    """Uniform grid ``0, dt, 2 dt, ...`` ending exactly at ``t_final``."""
    if not t_final > 0 or not sample_dt > 0:
        raise ValueError("t_final and sample_dt must be positive")
    n = int(np.floor(t_final / sample_dt + 1e-9))
    times = np.arange(n + 1) * sample_dt
    if t_final - times[-1] > 1e-9 * sample_dt:
        times = np.append(times, t_final)
    else:
        times[-1] = t_final
    return times


def integrate(
    H: HermitianOperator,
    initial: ProjectiveState,
    bath: Optional[MarkovianBathSpec],
    t_final: float,
    sample_dt: float,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> Trajectory:
    """Integrate the (optionally damped) flow and sample it on a uniform grid.

    Isolated flows are recharted onto the largest amplitude whenever the
    normalisation factor exceeds ``cfg.rechart_threshold``.  Damped flows
    stay in the initial chart: the damping couples to the chart-dependent
    ``|x^j|^2``, so changing chart would change the model.
    """
    _check(H, initial)
    m = initial.coords.size
    if bath is not None and bath.gammas.size != m:
        raise DimensionMismatch(f"{bath.gammas.size} damping constants for {m} coordinates")
    gammas = np.zeros(m) if bath is None else np.asarray(bath.gammas, dtype=float)
    damped = bool(np.any(gammas))
    times = sample_times(t_final, sample_dt)
    h_ang = np.asarray(H.angular(), dtype=complex)

    state = initial
    if not damped and normalization_factor(state) > cfg.rechart_threshold:
        state = rechart(state, best_pivot(state))
    hp = _chart_matrix(h_ang, state.pivot)
    x = np.array(state.coords, dtype=complex)
    chart_limit = 0.0 if damped else cfg.rechart_threshold

    states = [state]
    recharts = []
    t = 0.0
    h_step = min(cfg.dt_initial, cfg.dt_max)
    n_steps = 0
    for target in times[1:]:
        while t < target:
            if cfg.method == "dopri5":
                t, h_step, status, n = kernels.advance_cp(
                    hp, gammas, x, t, target, h_step, cfg.abs_tol, cfg.rel_tol,
                    cfg.dt_max, chart_limit, cfg.max_steps,
                )
            else:
                t, _, status, n = kernels.rk4_cp(hp, gammas, x, t, target, cfg.dt_initial, chart_limit)
            n_steps += n
            if status == kernels.ST_CHART:
                current = ProjectiveState(x, state.pivot)
                new_pivot = best_pivot(current)
                state = rechart(current, new_pivot)
                recharts.append((t, new_pivot))
                log.debug("rechart at t=%g to pivot %d", t, new_pivot)
                hp = _chart_matrix(h_ang, state.pivot)
                x = np.array(state.coords, dtype=complex)
            elif status != kernels.ST_DONE:
                _raise_status(status, t)
        state = ProjectiveState(x.copy(), state.pivot)
        states.append(state)

    amps = np.array([from_projective(s) for s in states])
    energy = np.array([classical_hamiltonian(H, s) for s in states])
    return Trajectory(times, states, amps, energy, H.time_unit, n_steps, recharts)
