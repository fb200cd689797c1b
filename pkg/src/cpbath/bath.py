"""Explicit harmonic bath coupled to the projective coordinates.

Each coordinate ``x^j`` owns an independent set of oscillators (block-diagonal
coupling).  The interaction Hamiltonian is

    H_I = sum_j ( -|x^j|^2 S_j + |x^j|^4 kappa_j / 2 ),
    S_j = sum_{i in j} c_i q_i,   kappa_j = sum_{i in j} c_i^2 / (m_i w_i^2),

so ``dH_I/dconj(x^j) = -x^j S_j + x^j |x^j|^2 kappa_j`` and the oscillators
feel the force ``c_i |x^j|^2``.  The second term is the counterterm that
cancels the static shift of the system potential.

Eliminating the oscillators turns the force into
``-x^j xi_j(t) + x^j int_0^t gamma_j(t - s) d|x^j|^2/ds ds``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .dynamics import IntegratorConfig, Trajectory, _chart_matrix, _check, _raise_status, sample_times
from .errors import DimensionMismatch, InvalidSpec
from .geometry import ProjectiveState, from_projective
from .hamiltonians import HermitianOperator, classical_hamiltonian

#: upper end of the discretised spectrum, in units of the cutoff
OMEGA_MAX_OVER_CUTOFF = 10.0


@dataclass(frozen=True, eq=False)
class Oscillators:
    """Masses, angular frequencies and couplings of one coordinate's sub-bath."""

    masses: np.ndarray
    frequencies: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        arrs = [np.array(a, dtype=float).reshape(-1) for a in (self.masses, self.frequencies, self.couplings)]
        if len({a.size for a in arrs}) != 1:
            raise InvalidSpec("masses, frequencies and couplings must have equal length")
        m, w, c = arrs
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(w)) and np.all(np.isfinite(c))):
            raise InvalidSpec("oscillator parameters must be finite")
        if np.any(m <= 0) or np.any(w <= 0):
            raise InvalidSpec("oscillator masses and frequencies must be positive")
        for name, a in zip(("masses", "frequencies", "couplings"), arrs):
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    def __len__(self):
        return self.masses.size

    @property
    def kernel_weights(self) -> np.ndarray:
        """``c_i^2 / (m_i w_i^2)``."""
        return self.couplings**2 / (self.masses * self.frequencies**2)


@dataclass(frozen=True, eq=False)
class ExplicitBathSpec:
    """One :class:`Oscillators` block per projective coordinate."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks or not all(isinstance(b, Oscillators) for b in blocks):
            raise InvalidSpec("need one Oscillators block per coordinate")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def ohmic(cls, gammas: Sequence[float], cutoff: float, n: int) -> "ExplicitBathSpec":
        """Independent Ohmic sub-baths with the given damping constants."""
        return cls(tuple(discretize_ohmic_bath(g, cutoff, n) for g in np.atleast_1d(gammas)))

    @property
    def n_coords(self) -> int:
        return len(self.blocks)

    @property
    def n_oscillators(self) -> int:
        return sum(len(b) for b in self.blocks)

    def flat(self):
        """Concatenated ``(owner, m, w, c)`` arrays in block order."""
        owner = np.concatenate([np.full(len(b), j, dtype=np.int64) for j, b in enumerate(self.blocks)])
        m = np.concatenate([b.masses for b in self.blocks])
        w = np.concatenate([b.frequencies for b in self.blocks])
        c = np.concatenate([b.couplings for b in self.blocks])
        return owner, m, w, c

    def kappa(self) -> np.ndarray:
        """Counterterm weight per coordinate."""
        return np.array([b.kernel_weights.sum() for b in self.blocks])


@dataclass(frozen=True, eq=False)
class BathState:
    """Oscillator positions and momenta, flattened in block order."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        p = np.array(self.p, dtype=float).reshape(-1)
        if q.shape != p.shape:
            raise DimensionMismatch("q and p must have equal length")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("bath state must be finite")
        q.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)


def discretize_ohmic_bath(gamma: float, cutoff: float, n: int) -> Oscillators:
    """Discretise ``J(w) = (2/pi) gamma w exp(-w / cutoff)`` into ``n`` oscillators.

    Unit masses, midpoint frequencies ``w_i = (i - 1/2) dw`` with
    ``dw = 10 cutoff / n``, and ``c_i^2 = (2/pi) gamma w_i^2 exp(-w_i/cutoff) dw``.
    The discrete kernel then tends to a continuum kernel with
    ``gamma(0) = 2 gamma cutoff / pi`` and ``int_0^inf gamma(t) dt = gamma``.

    Raises
    ------
    InvalidSpec
        If ``n < 1``, ``cutoff <= 0`` or ``gamma < 0``.
    """
    if int(n) != n or n < 1:
        raise InvalidSpec(f"number of oscillators must be a positive integer, got {n!r}")
    if not np.isfinite(cutoff) or cutoff <= 0:
        raise InvalidSpec(f"cutoff frequency must be positive, got {cutoff!r}")
    if not np.isfinite(gamma) or gamma < 0:
        raise InvalidSpec(f"damping constant must be non-negative, got {gamma!r}")
    n = int(n)
    dw = OMEGA_MAX_OVER_CUTOFF * cutoff / n
    w = (np.arange(n) + 0.5) * dw
    c = np.sqrt(2.0 / np.pi * gamma * w**2 * np.exp(-w / cutoff) * dw)
    return Oscillators(np.ones(n), w, c)


def markovian_equivalent_bath(gammas: Sequence[float], cutoff: float, n: int) -> ExplicitBathSpec:
    """Explicit bath whose large-cutoff limit is the Markovian model with ``gammas``.

    The Markovian interaction force is ``2 x gamma d|x|^2/dt`` while an Ohmic
    sub-bath discretised with constant ``g`` produces ``x g d|x|^2/dt`` (the
    kernel integrates to ``g`` over the half line), hence the factor 2.
    """
    return ExplicitBathSpec.ohmic(2.0 * np.atleast_1d(np.asarray(gammas, dtype=float)), cutoff, n)


_CHUNK = 1 << 22


def _cos_sin_sum(t, w, a_cos, a_sin=None):
    """``sum_i a_cos_i cos(w_i t) + a_sin_i sin(w_i t)``, chunked over ``t``."""
    t = np.asarray(t, dtype=float)
    flat = t.reshape(-1)
    out = np.empty(flat.size)
    step = max(1, _CHUNK // max(1, w.size))
    for s in range(0, flat.size, step):
        wt = np.multiply.outer(flat[s:s + step], w)
        out[s:s + step] = np.cos(wt) @ a_cos
        if a_sin is not None:
            out[s:s + step] += np.sin(wt) @ a_sin
    return out.reshape(t.shape)


def damping_kernel(spec: ExplicitBathSpec, j: int, t) -> np.ndarray:
    """``gamma_j(t) = sum_i c_i^2 / (m_i w_i^2) cos(w_i t)`` (vectorised over ``t``)."""
    b = spec.blocks[j]
    return _cos_sin_sum(t, b.frequencies, b.kernel_weights)


def _block_slice(spec: ExplicitBathSpec, j: int) -> slice:
    start = sum(len(b) for b in spec.blocks[:j])
    return slice(start, start + len(spec.blocks[j]))


def noise(spec: ExplicitBathSpec, j: int, bath0: BathState, x0_sq: float, t) -> np.ndarray:
    """Bath-initial-condition force ``xi_j(t)`` on coordinate ``j``."""
    b = spec.blocks[j]
    sl = _block_slice(spec, j)
    q0, p0 = bath0.q[sl], bath0.p[sl]
    m, w, c = b.masses, b.frequencies, b.couplings
    return _cos_sin_sum(t, w, c * (q0 - x0_sq * c / (m * w**2)), c * p0 / (m * w))


def shifted_equilibrium(spec: ExplicitBathSpec, state: ProjectiveState) -> BathState:
    """Oscillators at rest at ``q_i = |x^j|^2 c_i / (m_i w_i^2)``: zero noise."""
    x = state.coords
    if x.size != spec.n_coords:
        raise DimensionMismatch(f"bath has {spec.n_coords} blocks for {x.size} coordinates")
    owner, m, w, c = spec.flat()
    q = np.abs(x[owner]) ** 2 * c / (m * w**2)
    return BathState(q, np.zeros_like(q))


def bath_energy(spec: ExplicitBathSpec, bath: BathState) -> float:
    _, m, w, _ = spec.flat()
    return float(np.sum(bath.p**2 / (2 * m) + 0.5 * m * w**2 * bath.q**2))


def interaction_energy(spec: ExplicitBathSpec, state: ProjectiveState, bath: BathState, counterterm: bool = True) -> float:
    owner, _, _, c = spec.flat()
    r2 = np.abs(state.coords) ** 2
    s = np.bincount(owner, weights=c * bath.q, minlength=r2.size)
    e = -np.sum(r2 * s)
    if counterterm:
        e += 0.5 * np.sum(r2**2 * spec.kappa())
    return float(e)


@dataclass(eq=False)
class FullTrajectory:
    """System trajectory plus the bath-side energy bookkeeping.

    Energies are in angular units (rad per time unit) so that ``total`` is
    the conserved quantity of the coupled flow.
    """

    system: Trajectory
    bath_states: list
    system_energy: np.ndarray
    bath_energy: np.ndarray
    interaction_energy: np.ndarray

    @property
    def total_energy(self) -> np.ndarray:
        return self.system_energy + self.bath_energy + self.interaction_energy


def integrate_full(
    H: HermitianOperator,
    initial: ProjectiveState,
    spec: ExplicitBathSpec,
    bath0: Optional[BathState],
    t_final: float,
    sample_dt: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    counterterm: bool = True,
) -> FullTrajectory:
    """Integrate the coupled system-plus-oscillators flow.

    The chart is fixed for the whole run because the coupling is written in
    terms of the chart coordinates.  ``bath0=None`` starts from the shifted
    equilibrium.  ``counterterm=False`` drops the ``|x|^4`` correction (used
    to show that it matters).

    Raises
    ------
    StepSizeUnderflow
        If the adaptive step collapses or ``cfg.max_steps`` is exceeded.
    """
    _check(H, initial)
    m_coords = initial.coords.size
    if spec.n_coords != m_coords:
        raise DimensionMismatch(f"bath has {spec.n_coords} blocks for {m_coords} coordinates")
    if bath0 is None:
        bath0 = shifted_equilibrium(spec, initial)
    owner, mass, w, c = spec.flat()
    if bath0.q.size != owner.size:
        raise DimensionMismatch(f"bath state has {bath0.q.size} oscillators, spec has {owner.size}")
    kappa = spec.kappa() if counterterm else np.zeros(m_coords)
    inv_m = 1.0 / mass
    mw2 = mass * w**2
    h_ang = np.asarray(H.angular(), dtype=complex)
    hp = _chart_matrix(h_ang, initial.pivot)
    times = sample_times(t_final, sample_dt)

    x = np.array(initial.coords, dtype=complex)
    q = np.array(bath0.q)
    p = np.array(bath0.p)
    states, baths = [initial], [bath0]
    t = 0.0
    h_step = min(cfg.dt_initial, cfg.dt_max)
    n_steps = 0
    for target in times[1:]:
        t, h_step, status, n = kernels.advance_bath(
            hp, x, q, p, owner, c, inv_m, mw2, kappa, t, target, h_step,
            cfg.abs_tol, cfg.rel_tol, cfg.dt_max, cfg.max_steps,
        )
        n_steps += n
        if status != kernels.ST_DONE:
            _raise_status(status, t)
        states.append(ProjectiveState(x.copy(), initial.pivot))
        baths.append(BathState(q.copy(), p.copy()))

    amps = np.array([from_projective(s) for s in states])
    energy = np.array([classical_hamiltonian(H, s) for s in states])
    traj = Trajectory(times, states, amps, energy, H.time_unit, n_steps, [])
    e_sys = np.array([classical_hamiltonian(H, s, matrix=h_ang) for s in states])
    e_bath = np.array([bath_energy(spec, b) for b in baths])
    e_int = np.array([interaction_energy(spec, s, b, counterterm) for s, b in zip(states, baths)])
    return FullTrajectory(traj, baths, e_sys, e_bath, e_int)
