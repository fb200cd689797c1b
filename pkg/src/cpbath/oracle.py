"""Reference Schrodinger propagation, i da/dt = H a (hbar = 1)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dynamics import IntegratorConfig, sample_times, _raise_status
from .errors import DimensionMismatch
from .geometry import as_amplitudes
from .hamiltonians import HermitianOperator

EIGEN_MAX_DIM = 64
#: the reference must be tighter than the flow it certifies
RK_TOL = 1e-12


@dataclass(eq=False)
class AmplitudeTrajectory:
    times: np.ndarray
    amplitudes: np.ndarray
    energy: np.ndarray
    time_unit: str = "dimensionless"

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def populations_from_amplitudes(a) -> np.ndarray:
    return np.abs(np.asarray(a, dtype=complex)) ** 2


def _propagate_eigen(h, a0, times):
    w, v = np.linalg.eigh(h)
    c0 = v.conj().T @ a0
    phases = np.exp(-1j * np.outer(times, w))
    return (phases * c0) @ v.T


def _propagate_rk(h, a0, times, cfg):
    # Schrodinger equation as a linear real system, integrated with the same
    # Dormand-Prince driver as the classical flow (no chart, no damping).
    from ._kernels_py import _dopri

    def f(ys, outs):
        outs[0][:] = -1j * (h @ ys[0])
        return kernels.ST_DONE

    a = np.array(a0, dtype=complex)
    out = [a.copy()]
    t = 0.0
    step = cfg.dt_initial
    for target in times[1:]:
        t, step, status, _ = _dopri(f, (a,), t, target, step, min(cfg.abs_tol, RK_TOL), min(cfg.rel_tol, RK_TOL), cfg.dt_max, cfg.max_steps, 0.0)
        if status != kernels.ST_DONE:
            _raise_status(status, t)
        out.append(a.copy())
    return np.array(out)


def integrate_schrodinger(
    H: HermitianOperator,
    initial,
    t_final: float,
    sample_dt: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    method: str = "auto",
) -> AmplitudeTrajectory:
    """Propagate ``initial`` on the uniform sample grid.

    ``method`` is ``"eigen"`` (exact ``V exp(-i L t) V^dagger a0``),
    ``"rk"`` or ``"auto"`` (eigen up to N = 64).
    """
    a0 = as_amplitudes(initial)
    if a0.size != H.dim:
        raise DimensionMismatch(f"initial state has N={a0.size}, Hamiltonian is {H.dim}x{H.dim}")
    times = sample_times(t_final, sample_dt)
    h = np.asarray(H.angular(), dtype=complex)
    if method == "auto":
        method = "eigen" if H.dim <= EIGEN_MAX_DIM else "rk"
    if method == "eigen":
        amps = _propagate_eigen(h, a0, times)
    elif method == "rk":
        amps = _propagate_rk(h, a0, times, cfg)
    else:
        raise ValueError(f"unknown propagation method {method!r}")
    energy = np.einsum("ti,ij,tj->t", amps.conj(), H.matrix, amps).real
    return AmplitudeTrajectory(times, amps, energy, H.time_unit)
