"""Populations, two-qubit observables and time averages.

All observables are evaluated on reconstructed amplitudes, so they do not
depend on the chart.  The pivot-3 closed forms are kept alongside for
cross-checking.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, TooFewSamples
from .geometry import ProjectiveState, from_projective, normalization_factor


@dataclass(eq=False)
class ObservableSeries:
    times: np.ndarray
    channels: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, v in self.channels.items():
            if len(v) != len(self.times):
                raise ValueError(f"channel {name!r} has {len(v)} samples, expected {len(self.times)}")

    def __getitem__(self, name):
        return self.channels[name]


def populations(state: ProjectiveState) -> np.ndarray:
    """``|x^j|^2 / N`` off the pivot and ``1 / N`` on it."""
    nrm = normalization_factor(state)
    return np.insert(np.abs(state.coords) ** 2, state.pivot, 1.0) / nrm


def _two_qubit_amplitudes(state):
    if state.dim != 4:
        raise DimensionMismatch(f"two-qubit observable needs N=4, got N={state.dim}")
    return from_projective(state)


def quaternionic_z(state: ProjectiveState) -> float:
    """|a|^2 + |b|^2 - |c|^2 - |d|^2 for a|00> + b|10> + c|01> + d|11>."""
    p = np.abs(_two_qubit_amplitudes(state)) ** 2
    return float(p[0] + p[1] - p[2] - p[3])


def concurrence(state: ProjectiveState) -> float:
    """Pure-state concurrence ``2 |ad - bc|``."""
    a, b, c, d = _two_qubit_amplitudes(state)
    return float(2.0 * abs(a * d - b * c))


def quaternionic_z_pivot3(x) -> float:
    x0, x1, x2 = np.asarray(x, dtype=complex)
    r0, r1, r2 = abs(x0) ** 2, abs(x1) ** 2, abs(x2) ** 2
    return (r0 + r1 - r2 - 1.0) / (1.0 + r0 + r1 + r2)


def concurrence_pivot3(x) -> float:
    x0, x1, x2 = np.asarray(x, dtype=complex)
    return 2.0 * abs(x0 - x1 * x2) / (1.0 + abs(x0) ** 2 + abs(x1) ** 2 + abs(x2) ** 2)


def time_average(series, times) -> float:
    """Trapezoidal mean of ``series`` over the window spanned by ``times``."""
    y = np.asarray(series, dtype=float)
    t = np.asarray(times, dtype=float)
    if y.size < 2 or t.size != y.size:
        raise TooFewSamples("time average needs at least two matching samples")
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)) / (t[-1] - t[0]))


def observe(traj) -> ObservableSeries:
    """Populations and energy for any trajectory; z and concurrence when N = 4."""
    amps = np.asarray(traj.amplitudes)
    pops = np.abs(amps) ** 2
    ch = {f"population_{i}": pops[:, i] for i in range(pops.shape[1])}
    ch["energy"] = np.asarray(traj.energy)
    if pops.shape[1] == 4:
        ch["z"] = pops[:, 0] + pops[:, 1] - pops[:, 2] - pops[:, 3]
        ch["concurrence"] = 2.0 * np.abs(amps[:, 0] * amps[:, 3] - amps[:, 1] * amps[:, 2])
    return ObservableSeries(np.asarray(traj.times), ch)


def oscillation_amplitude(populations, fraction: float = 0.25) -> float:
    """Largest peak-to-peak population swing over the final ``fraction`` of samples."""
    p = np.asarray(populations)
    tail = p[int(np.floor(len(p) * (1.0 - fraction))):]
    return float(np.max(tail.max(axis=0) - tail.min(axis=0)))
