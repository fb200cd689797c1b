"""Acceptance criteria, one test (and one printed PASS/FAIL line) per item.

Run ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
Tolerances are pinned here; see the README for the choices behind the
two-qubit coefficients, run lengths and the monotonicity slack.
"""
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cpbath.bath import integrate_full, markovian_equivalent_bath
from cpbath.config import load_bundled
from cpbath.dynamics import MarkovianBathSpec, integrate
from cpbath.geometry import best_pivot, from_projective, rechart, to_projective
from cpbath.hamiltonians import (
    TwoQubitCoefficients,
    classical_hamiltonian,
    fmo_hamiltonian,
    grad_classical_hamiltonian,
    spectral_gap,
    two_qubit_closed_form_gradient,
    two_qubit_hamiltonian,
)
from cpbath.observables import (
    concurrence,
    concurrence_pivot3,
    oscillation_amplitude,
    populations,
    quaternionic_z,
    quaternionic_z_pivot3,
)
from cpbath.oracle import integrate_schrodinger
from cpbath.scenario import run_scenario

from conftest import REF_AMPS, random_amplitudes, random_hermitian, random_state
from test_hamiltonians import finite_difference_gradient

REPORT = []

# pinned tolerances
TOL_QC_TWO_QUBIT = 1e-8
TOL_QC_FMO = 1e-7
TOL_ENERGY_ISOLATED = 1e-8
TOL_ENERGY_TOTAL = 1e-6
TOL_MARKOV_MATCH = 2e-2
TOL_CLOSED_FORM = 1e-13
TOL_GRAD_FD = 1e-6
TOL_GRAD_HAND = 1e-13
SLACK_MONOTONE = 1e-8  # noise floor for "non-increasing" across the sweep
TOL_CONCURRENCE_FINAL = 0.05
TOL_FMO_RATE = 1e-3  # 1/ps
TOL_BC = 0.02
TOL_POP_SUM = 1e-10
TOL_RECHART = 1e-12
TOL_TRACE_SHIFT = 1e-8
TOL_ZERO_GAMMA = 1e-12


def record(tag, ok, detail):
    line = f"CRITERION {tag}: {'PASS' if ok else 'FAIL'}  {detail}"
    REPORT.append(line)
    print(line)
    return ok


def _ref_state():
    return to_projective(REF_AMPS, 3)


@pytest.fixture(scope="module")
def bundled_runs(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance")
    runs = {}
    for name in ("two_qubit_c4c5_0", "two_qubit_c4c5_1", "fmo_isolated", "fmo_damped"):
        cfg = load_bundled(name).replace(output_dir=str(out))
        runs[name] = run_scenario(cfg)
    return runs


def test_criterion_1_two_qubit_correspondence():
    t0 = time.perf_counter()
    errs = []
    for c45 in (0.0, 1.0):
        H = two_qubit_hamiltonian(TwoQubitCoefficients(c4=c45, c5=c45))
        cl = integrate(H, _ref_state(), None, 20.0, 0.01)
        qu = integrate_schrodinger(H, REF_AMPS, 20.0, 0.01)
        errs.append(np.max(np.abs(cl.populations - qu.populations)))
    dt = time.perf_counter() - t0
    ok = max(errs) < TOL_QC_TWO_QUBIT and dt < 5.0
    assert record("1", ok, f"max|dpop| C45=0: {errs[0]:.2e}, C45=1: {errs[1]:.2e} (< {TOL_QC_TWO_QUBIT:g}); {dt:.2f}s (< 5s)")


def test_criterion_2_fmo_correspondence():
    t0 = time.perf_counter()
    H = fmo_hamiltonian()
    a0 = np.eye(7)[0]
    cl = integrate(H, to_projective(a0, 0), None, 1.0, 0.001)
    qu = integrate_schrodinger(H, a0, 1.0, 0.001)
    err = np.max(np.abs(cl.populations - qu.populations))
    dt = time.perf_counter() - t0
    ok = err < TOL_QC_FMO and dt < 10.0
    assert record("2", ok, f"max|dpop| over 1 ps: {err:.2e} (< {TOL_QC_FMO:g}); {dt:.2f}s (< 10s)")


def _markov_validation(n, gamma=1.0):
    H = two_qubit_hamiltonian(TwoQubitCoefficients())
    s = _ref_state()
    wc = 50.0 * spectral_gap(H)
    # stay inside the first recurrence 2 pi / dw of the n = 400 bath
    t_final = 0.8 * 2 * np.pi / (10 * wc / 400)
    mk = integrate(H, s, MarkovianBathSpec.uniform(gamma, 4), t_final, 0.01)
    full = integrate_full(H, s, markovian_equivalent_bath([gamma] * 3, wc, n), None, t_final, 0.01)
    return full, mk, t_final


def test_criterion_3_energy_conservation():
    worst_iso = 0.0
    for H, s in [
        (two_qubit_hamiltonian(TwoQubitCoefficients()), _ref_state()),
        (two_qubit_hamiltonian(TwoQubitCoefficients(c4=1, c5=1)), _ref_state()),
        (fmo_hamiltonian(), to_projective(np.eye(7)[0], 0)),
    ]:
        tr = integrate(H, s, None, 20.0 if H.dim == 4 else 1.0, 0.01)
        worst_iso = max(worst_iso, np.max(np.abs(tr.energy - tr.energy[0])) / max(1.0, abs(tr.energy[0])))
    full, _, _ = _markov_validation(400)
    e = full.total_energy
    scale = max(abs(e[0]), np.max(np.abs(full.system_energy) + np.abs(full.bath_energy) + np.abs(full.interaction_energy)))
    drift_total = np.max(np.abs(e - e[0])) / scale
    ok = worst_iso < TOL_ENERGY_ISOLATED and drift_total < TOL_ENERGY_TOTAL
    assert record("3", ok, f"isolated |dH_S|/max(1,|H_S|): {worst_iso:.2e} (< {TOL_ENERGY_ISOLATED:g}); explicit-bath H_T drift: {drift_total:.2e} (< {TOL_ENERGY_TOTAL:g})")


def test_criterion_4_markovian_reduction():
    t0 = time.perf_counter()
    errs = {}
    for n in (100, 200, 400):
        full, mk, t_final = _markov_validation(n)
        errs[n] = np.max(np.abs(full.system.populations - mk.populations))
    dt = time.perf_counter() - t0
    monotone = errs[100] > errs[200] > errs[400]
    ok = errs[400] < TOL_MARKOV_MATCH and monotone and dt < 120
    detail = ", ".join(f"n={n}: {e:.2e}" for n, e in errs.items())
    assert record("4", ok, f"{detail} over t<={t_final:.3f} (n=400 < {TOL_MARKOV_MATCH:g}, decreasing: {monotone}); {dt:.1f}s (< 120s)")


def test_criterion_5_observable_closed_forms(rng):
    worst = 0.0
    for _ in range(1000):
        s = to_projective(random_amplitudes(rng, 4), 3)
        worst = max(worst, abs(quaternionic_z(s) - quaternionic_z_pivot3(s.coords)), abs(concurrence(s) - concurrence_pivot3(s.coords)))
    assert record("5", worst < TOL_CLOSED_FORM, f"max deviation over 1000 states: {worst:.2e} (< {TOL_CLOSED_FORM:g})")


def test_criterion_6_gradients(rng):
    worst_fd = 0.0
    for n in (2, 3, 4, 7):
        for _ in range(100):
            H = random_hermitian(rng, n)
            s = random_state(rng, n, pivot=int(rng.integers(n)))
            g = grad_classical_hamiltonian(H, s)
            worst_fd = max(worst_fd, np.linalg.norm(g - finite_difference_gradient(H, s)) / np.linalg.norm(g))
    worst_hand = 0.0
    for _ in range(100):
        c = TwoQubitCoefficients(*rng.normal(size=5))
        x = rng.normal(size=3) + 1j * rng.normal(size=3)
        g = grad_classical_hamiltonian(two_qubit_hamiltonian(c), to_projective(np.append(x, 1) / np.sqrt(1 + np.vdot(x, x).real), 3))
        worst_hand = max(worst_hand, np.max(np.abs(g - two_qubit_closed_form_gradient(c, x))))
    ok = worst_fd < TOL_GRAD_FD and worst_hand < TOL_GRAD_HAND
    assert record("6", ok, f"finite-difference rel err: {worst_fd:.2e} (< {TOL_GRAD_FD:g}); hand-coded: {worst_hand:.2e} (< {TOL_GRAD_HAND:g})")


def _non_increasing(v):
    return all(b <= a + SLACK_MONOTONE for a, b in zip(v, v[1:]))


def test_criterion_7a_oscillation_amplitude(bundled_runs):
    parts, ok = [], True
    for name in ("two_qubit_c4c5_0", "two_qubit_c4c5_1"):
        amps = [oscillation_amplitude(r.trajectory.populations) for r in bundled_runs[name]]
        ok &= _non_increasing(amps)
        parts.append(f"{name[-6:]}: " + " ".join(f"{a:.1e}" for a in amps))
    assert record("7a", ok, "; ".join(parts) + f" (non-increasing in gamma, slack {SLACK_MONOTONE:g})")


def test_criterion_7b_concurrence(bundled_runs):
    parts, ok = [], True
    for name in ("two_qubit_c4c5_0", "two_qubit_c4c5_1"):
        final = [r.series["concurrence"][-1] for r in bundled_runs[name]]
        ok &= _non_increasing(final) and final[-1] < TOL_CONCURRENCE_FINAL
        parts.append(f"{name[-6:]}: " + " ".join(f"{c:.1e}" for c in final))
    assert record("7b", ok, "; ".join(parts) + f" (non-increasing, last < {TOL_CONCURRENCE_FINAL:g})")


def test_criterion_7c_fmo_stabilization(bundled_runs):
    run = bundled_runs["fmo_damped"][-1]
    t = run.trajectory.times
    rate = np.abs(np.gradient(run.trajectory.populations, t, axis=0)).max(axis=1)
    worst = rate[t > 5.0].max()
    ok = worst < TOL_FMO_RATE
    assert record("7c", ok, f"gamma={run.gamma:g}/ps: max|dpop/dt| beyond 5 ps = {worst:.2e}/ps (< {TOL_FMO_RATE:g}); run to {t[-1]:g} ps")


def test_criterion_7d_common_value(bundled_runs):
    run = bundled_runs["two_qubit_c4c5_1"][-1]
    p = run.trajectory.populations[-1]
    diff = abs(p[1] - p[2])
    assert record("7d", diff < TOL_BC, f"gamma={run.gamma:g}, C45=1: |pop_b - pop_c| = {diff:.2e} (< {TOL_BC:g})")


def test_criterion_8_invariants(bundled_runs, rng):
    drift = max(
        np.max(np.abs(r.trajectory.populations.sum(axis=1) - 1)) for runs in bundled_runs.values() for r in runs
    )
    worst_rechart = 0.0
    for _ in range(200):
        s = random_state(rng, 4, pivot=int(rng.integers(4)))
        r = rechart(s, (s.pivot + 1) % 4)
        worst_rechart = max(
            worst_rechart,
            np.max(np.abs(populations(s) - populations(r))),
            abs(quaternionic_z(s) - quaternionic_z(r)),
            abs(concurrence(s) - concurrence(r)),
        )
        H = random_hermitian(rng, 4)
        worst_rechart = max(worst_rechart, abs(classical_hamiltonian(H, s) - classical_hamiltonian(H, r)))
    H = two_qubit_hamiltonian(TwoQubitCoefficients(c4=1, c5=1))
    bath = MarkovianBathSpec.uniform(0.1, 4)
    a = integrate(H, _ref_state(), bath, 20.0, 0.1)
    b = integrate(H.shifted(2.5), _ref_state(), bath, 20.0, 0.1)
    shift = np.max(np.abs(a.populations - b.populations))
    iso = integrate(H, _ref_state(), None, 20.0, 0.1)
    zero = integrate(H, _ref_state(), MarkovianBathSpec(np.zeros(3)), 20.0, 0.1)
    zg = np.max(np.abs(iso.amplitudes - zero.amplitudes))
    ok = drift < TOL_POP_SUM and worst_rechart < TOL_RECHART and shift < TOL_TRACE_SHIFT and zg <= TOL_ZERO_GAMMA
    assert record(
        "8",
        ok,
        f"pop-sum drift {drift:.1e} (< {TOL_POP_SUM:g}); rechart {worst_rechart:.1e} (< {TOL_RECHART:g}); "
        f"trace shift {shift:.1e} (< {TOL_TRACE_SHIFT:g}); gamma=0 vs isolated {zg:.1e} (<= {TOL_ZERO_GAMMA:g})",
    )


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
