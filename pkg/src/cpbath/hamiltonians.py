"""System Hamiltonians and the classical energy function on CP^{N-1}."""
from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch
from .geometry import ProjectiveState, normalization_factor

#: speed of light in cm/ps
SPEED_OF_LIGHT_CM_PER_PS = 2.99792458e-2
#: angular frequency (rad/ps) of one wavenumber
CM1_TO_RAD_PER_PS = 2.0 * np.pi * SPEED_OF_LIGHT_CM_PER_PS

UNITS = ("dimensionless", "cm-1")

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Dense Hermitian matrix tagged with its energy unit.

    ``unit`` is ``"dimensionless"`` (hbar = 1, time in the same reduced
    unit) or ``"cm-1"`` (wavenumbers; time in ps after conversion).
    """

    matrix: np.ndarray
    unit: str = "dimensionless"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"Hamiltonian must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("Hamiltonian has non-finite entries")
        if np.max(np.abs(m - m.conj().T)) >= 1e-12:
            raise ValueError("Hamiltonian is not Hermitian")
        if self.unit not in UNITS:
            raise ValueError(f"unknown energy unit {self.unit!r}; expected one of {UNITS}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def time_unit(self) -> str:
        return "ps" if self.unit == "cm-1" else "dimensionless"

    def angular(self) -> np.ndarray:
        """Matrix in angular-frequency units (rad per time unit), hbar = 1."""
        if self.unit == "cm-1":
            return self.matrix * CM1_TO_RAD_PER_PS
        return self.matrix

    def shifted(self, c: float) -> "HermitianOperator":
        return HermitianOperator(self.matrix + c * np.eye(self.dim), self.unit)

    def __neg__(self):
        return HermitianOperator(-self.matrix, self.unit)


@dataclass(frozen=True)
class TwoQubitCoefficients:
    """Weights of sz(x)I, sx(x)I, sy(x)I, sy(x)sy and sx(x)sy."""

    c1: float = 0.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 0.0
    c5: float = 0.0

    def __post_init__(self):
        if not all(np.isfinite(v) for v in self.as_tuple()):
            raise ValueError("two-qubit coefficients must be finite")

    def as_tuple(self):
        return (self.c1, self.c2, self.c3, self.c4, self.c5)


def two_qubit_hamiltonian(c: TwoQubitCoefficients) -> HermitianOperator:
    """4x4 Hamiltonian in the basis order |00>, |10>, |01>, |11>.

    ``np.kron(A, B)`` puts A on the slow index; with this basis order the
    expectation value reproduces the CP^3 closed form used by
    :func:`two_qubit_closed_form_energy` term by term.
    """
    m = (
        c.c1 * np.kron(SIGMA_Z, IDENTITY_2)
        + c.c2 * np.kron(SIGMA_X, IDENTITY_2)
        + c.c3 * np.kron(SIGMA_Y, IDENTITY_2)
        + c.c4 * np.kron(SIGMA_Y, SIGMA_Y)
        + c.c5 * np.kron(SIGMA_X, SIGMA_Y)
    )
    return HermitianOperator(m)


_UNIT_RE = re.compile(r"^#\s*unit\s*:\s*(\S+)", re.IGNORECASE)


def load_matrix(path) -> HermitianOperator:
    """Read a whitespace-separated matrix file.

    Lines starting with ``#`` are comments; a ``# unit: cm-1`` line sets
    the unit.  Entries may be any Python complex literal (``1+2j``).
    """
    unit = "dimensionless"
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _UNIT_RE.match(line)
            if m:
                unit = "cm-1" if m.group(1).lower() in ("cm-1", "cm^-1", "wavenumber") else m.group(1)
            continue
        rows.append([complex(tok) for tok in line.split()])
    if not rows or any(len(r) != len(rows) for r in rows):
        raise DimensionMismatch(f"{path}: matrix file must hold a square matrix")
    m = np.array(rows, dtype=complex)
    if not np.any(m.imag):
        m = m.real
    return HermitianOperator(m, unit)


def fmo_hamiltonian() -> HermitianOperator:
    """The bundled seven-site FMO Hamiltonian, in cm^-1."""
    with resources.as_file(resources.files("cpbath") / "data" / "fmo.txt") as p:
        return load_matrix(p)


def _numerator(h: np.ndarray, state: ProjectiveState):
    xh = state.homogeneous()
    hx = h @ xh
    d = np.vdot(xh, hx)
    scale = max(1.0, float(np.max(np.abs(h)))) * float(np.vdot(xh, xh).real) * xh.size
    if abs(d.imag) > 1e-12 * scale:
        raise ValueError("expectation value is not real; is the matrix Hermitian?")
    return hx, d.real


def _check_dims(H: HermitianOperator, state: ProjectiveState):
    if H.dim != state.dim:
        raise DimensionMismatch(f"Hamiltonian is {H.dim}x{H.dim} but state has N={state.dim}")


def classical_hamiltonian(H: HermitianOperator, state: ProjectiveState, matrix=None) -> float:
    """<psi|H|psi> written on CP^{N-1}: ``D / N`` with ``D = xh^dagger H xh``.

    ``matrix`` overrides ``H.matrix`` (used to evaluate in angular units).
    """
    _check_dims(H, state)
    h = H.matrix if matrix is None else matrix
    _, d = _numerator(h, state)
    return d / normalization_factor(state)


def grad_classical_hamiltonian(H: HermitianOperator, state: ProjectiveState, matrix=None) -> np.ndarray:
    """Derivative of the classical energy with respect to conj(x^k).

    ``[(H xh)_{s(k)} N - D x^k] / N^2``, sharing ``D`` with the value.
    """
    _check_dims(H, state)
    h = H.matrix if matrix is None else matrix
    hx, d = _numerator(h, state)
    nrm = normalization_factor(state)
    return (np.delete(hx, state.pivot) * nrm - d * state.coords) / nrm**2


def _two_qubit_numerator(c: TwoQubitCoefficients, x0, x1, x2) -> float:
    c1, c2, c3, c4, c5 = c.as_tuple()
    cj = np.conj
    d = (
        c1 * (abs(x0) ** 2 + abs(x1) ** 2 - abs(x2) ** 2 - 1)
        + c2 * (x2 * cj(x0) + cj(x1) + cj(x2) * x0 + x1)
        + 1j * c3 * (-x2 * cj(x0) - cj(x1) + cj(x2) * x0 + x1)
        + c4 * (-cj(x0) + x2 * cj(x1) + x1 * cj(x2) - x0)
        + 1j * c5 * (-cj(x0) + x2 * cj(x1) - x1 * cj(x2) + x0)
    )
    return float(d.real)


def two_qubit_closed_form_energy(c: TwoQubitCoefficients, x) -> float:
    """CP^3 energy written out by hand for pivot 3 (cross-check only)."""
    x0, x1, x2 = np.asarray(x, dtype=complex)
    nrm = 1 + abs(x0) ** 2 + abs(x1) ** 2 + abs(x2) ** 2
    return _two_qubit_numerator(c, x0, x1, x2) / nrm


def two_qubit_closed_form_gradient(c: TwoQubitCoefficients, x) -> np.ndarray:
    """Hand-coded d(energy)/d(conj x^k), k = 0, 1, 2, for pivot 3."""
    x0, x1, x2 = np.asarray(x, dtype=complex)
    c1, c2, c3, c4, c5 = c.as_tuple()
    nrm = 1 + abs(x0) ** 2 + abs(x1) ** 2 + abs(x2) ** 2
    d = _two_qubit_numerator(c, x0, x1, x2)
    g0 = ((c1 * x0 + c2 * x2 - 1j * c3 * x2 - c4 - 1j * c5) * nrm - d * x0) / nrm**2
    g1 = ((c1 * x1 + c2 - 1j * c3 + c4 * x2 + 1j * c5 * x2) * nrm - d * x1) / nrm**2
    g2 = ((-c1 * x2 + c2 * x0 + 1j * c3 * x0 + c4 * x1 - 1j * c5 * x1) * nrm - d * x2) / nrm**2
    return np.array([g0, g1, g2])


def spectral_gap(H: HermitianOperator) -> float:
    """Largest eigenvalue difference, in angular units."""
    w = np.linalg.eigvalsh(H.angular())
    return float(w[-1] - w[0])
