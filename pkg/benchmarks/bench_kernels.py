"""Compare the compiled and pure-Python integration kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from cpbath import _kernels_py
from cpbath.bath import markovian_equivalent_bath
from cpbath.hamiltonians import TwoQubitCoefficients, fmo_hamiltonian, spectral_gap, two_qubit_hamiltonian

try:
    from cpbath import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _cases():
    # no rechart inside a kernel call: pick runs whose pivot stays populated
    h2 = two_qubit_hamiltonian(TwoQubitCoefficients(c4=1, c5=1)).angular().astype(complex)
    x2 = np.array([np.sqrt(2), np.sqrt(2), 0], dtype=complex)
    h7 = fmo_hamiltonian().angular().astype(complex)
    # FMO exciton on site 1: chart centred on site 1 (pivot moved last)
    perm = [1, 2, 3, 4, 5, 6, 0]
    h7 = np.ascontiguousarray(h7[np.ix_(perm, perm)])
    x7 = np.full(6, 1e-3 + 0j)

    def cp(mod, h, x0, gamma, t_end):
        x = x0.copy()
        g = np.full(x.size, gamma)
        return mod.advance_cp(h, g, x, 0.0, t_end, 1e-3, 1e-10, 1e-10, np.inf, 0.0, 10**7)

    def bath(mod, n):
        H = two_qubit_hamiltonian(TwoQubitCoefficients())
        spec = markovian_equivalent_bath([1.0] * 3, 50 * spectral_gap(H), n)
        owner, m, w, c = spec.flat()
        x = x2.copy()
        q = np.abs(x[owner]) ** 2 * c / (m * w**2)
        p = np.zeros_like(q)
        h = H.angular().astype(complex)
        return mod.advance_bath(h, x, q, p, owner, c, 1 / m, m * w**2, spec.kappa(), 0.0, 0.2, 1e-3, 1e-10, 1e-10, np.inf, 10**7)

    return [
        ("FMO isolated, t=1 ps", lambda mod: cp(mod, h7, x7, 0.0, 1.0)),
        ("two-qubit damped g=0.1, t=20", lambda mod: cp(mod, h2, x2, 0.1, 20.0)),
        ("FMO damped g=1/ps, t=2 ps", lambda mod: cp(mod, h7, x7, 1.0, 2.0)),
        ("explicit bath 3x100, t=0.2", lambda mod: bath(mod, 100)),
    ]


def _time(fn, mod, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        _, _, status, steps = fn(mod)
        best = min(best, time.perf_counter() - t0)
    return best, steps


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'case':32s} {'steps':>8s} {'python [s]':>11s} {'cython [s]':>11s} {'speed-up':>9s}")
    for name, fn in _cases():
        tp, steps = _time(fn, _kernels_py, args.repeat)
        if _kernels_c is None:
            print(f"{name:32s} {steps:8d} {tp:11.4f} {'n/a':>11s} {'n/a':>9s}")
            continue
        tc, steps_c = _time(fn, _kernels_c, args.repeat)
        print(f"{name:32s} {steps_c:8d} {tp:11.4f} {tc:11.4f} {tp / tc:8.0f}x")


if __name__ == "__main__":
    main()
