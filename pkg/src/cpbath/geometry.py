"""Affine charts on complex projective space CP^{N-1}.

A pure state of an N-level system, ``sum_i a^i |i>``, is described in the
chart with pivot ``p`` by the N-1 complex ratios ``x^j = a^{s(j)} / a^p``,
where ``s`` enumerates the non-pivot indices in increasing order.  With
``p = N-1`` this is the usual ``x^j = a^j / a^{N-1}``.

Everything here is a pure function of immutable inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, PivotTooSmall

PIVOT_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ProjectiveState:
    """Point of CP^{N-1} in the affine chart centred on ``pivot``.

    Parameters
    ----------
    coords : array_like of complex, shape (N-1,)
        Affine coordinates ``x^j``.
    pivot : int
        Index of the amplitude used as divisor.
    """

    coords: np.ndarray
    pivot: int

    def __post_init__(self):
        coords = np.array(self.coords, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(coords)):
            raise ValueError("projective coordinates must be finite")
        pivot = int(self.pivot)
        if not 0 <= pivot <= coords.size:
            raise DimensionMismatch(f"pivot {pivot} out of range for N={coords.size + 1}")
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "pivot", pivot)

    @property
    def dim(self) -> int:
        return self.coords.size + 1

    def homogeneous(self) -> np.ndarray:
        """Unnormalised amplitude vector: 1 in the pivot slot, coords elsewhere."""
        return np.insert(self.coords, self.pivot, 1.0)

    def __repr__(self):
        return f"ProjectiveState(coords={self.coords!r}, pivot={self.pivot})"


def _other_indices(dim: int, pivot: int) -> np.ndarray:
    return np.array([i for i in range(dim) if i != pivot], dtype=int)


def as_amplitudes(amps, normalize: bool = False) -> np.ndarray:
    """Validate an amplitude vector (unit norm to 1e-12 unless ``normalize``)."""
    a = np.asarray(amps, dtype=complex).reshape(-1)
    if a.size < 2:
        raise DimensionMismatch("need at least two levels")
    norm = np.linalg.norm(a)
    if normalize:
        if norm == 0 or not np.isfinite(norm):
            raise ValueError("amplitude vector cannot be normalised")
        return a / norm
    if abs(norm**2 - 1.0) > 1e-12:
        raise ValueError(f"amplitude vector has squared norm {norm**2!r}, expected 1")
    return a


def to_projective(amps, pivot: int, floor: float = PIVOT_FLOOR) -> ProjectiveState:
    """Affine coordinates of ``amps`` in the chart centred on ``pivot``."""
    a = np.asarray(amps, dtype=complex).reshape(-1)
    if not 0 <= pivot < a.size:
        raise DimensionMismatch(f"pivot {pivot} out of range for N={a.size}")
    if abs(a[pivot]) < floor:
        raise PivotTooSmall(f"|a[{pivot}]| = {abs(a[pivot]):.3e} is below the floor {floor:.1e}")
    return ProjectiveState(np.delete(a, pivot) / a[pivot], pivot)


def from_projective(state: ProjectiveState) -> np.ndarray:
    """Unit amplitude vector with the pivot amplitude real and positive."""
    xh = state.homogeneous()
    return xh / np.sqrt(normalization_factor(state))


def normalization_factor(state: ProjectiveState) -> float:
    x = state.coords
    return 1.0 + float(np.real(np.vdot(x, x)))


def kahler_potential(state: ProjectiveState) -> float:
    return float(np.log(normalization_factor(state)))


def apply_inverse_symplectic(state: ProjectiveState, gradient) -> np.ndarray:
    """Contract the inverse symplectic form with a gradient.

    Returns ``v^j = sum_k -i N (delta^{jk} + x^j conj(x^k)) g_k`` in O(N)
    without forming the matrix.
    """
    g = np.asarray(gradient, dtype=complex).reshape(-1)
    x = state.coords
    if g.shape != x.shape:
        raise DimensionMismatch(f"gradient has length {g.size}, expected {x.size}")
    nrm = normalization_factor(state)
    return -1j * nrm * (g + x * np.vdot(x, g))


def inverse_symplectic_matrix(state: ProjectiveState) -> np.ndarray:
    """Dense ``-i N (I + x x^dagger)``; mostly useful for tests."""
    x = state.coords
    return -1j * normalization_factor(state) * (np.eye(x.size) + np.outer(x, x.conj()))


def rechart(state: ProjectiveState, new_pivot: int, floor: float = PIVOT_FLOOR) -> ProjectiveState:
    """Same point of CP^{N-1} expressed in the chart centred on ``new_pivot``."""
    if new_pivot == state.pivot:
        return state
    return to_projective(from_projective(state), new_pivot, floor=floor)


def best_pivot(state: ProjectiveState) -> int:
    """Index of the largest-modulus amplitude."""
    return int(np.argmax(np.abs(state.homogeneous())))


def chart_permutation(dim: int, pivot: int) -> np.ndarray:
    """Index order that moves ``pivot`` to the last slot, others kept increasing."""
    return np.append(_other_indices(dim, pivot), pivot)
