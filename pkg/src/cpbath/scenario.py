"""Running configured scenarios and writing their CSV and plot outputs."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .bath import FullTrajectory, integrate_full, markovian_equivalent_bath
from .config import ScenarioConfig
from .dynamics import MarkovianBathSpec, Trajectory, integrate
from .errors import EmptySweep
from .geometry import PIVOT_FLOOR, ProjectiveState, as_amplitudes, to_projective
from .hamiltonians import (
    HermitianOperator,
    TwoQubitCoefficients,
    fmo_hamiltonian,
    load_matrix,
    spectral_gap,
    two_qubit_hamiltonian,
)
from .observables import ObservableSeries, observe
from .oracle import integrate_schrodinger

log = logging.getLogger(__name__)


@dataclass(eq=False)
class RunResult:
    gamma: Optional[float]
    trajectory: Trajectory
    series: ObservableSeries
    paths: list
    full: Optional[FullTrajectory] = None
    oracle: Optional[ObservableSeries] = None


def build_hamiltonian(cfg: ScenarioConfig) -> HermitianOperator:
    if cfg.source == "coefficients":
        return two_qubit_hamiltonian(TwoQubitCoefficients(*cfg.coefficients))
    if cfg.source == "fmo":
        return fmo_hamiltonian()
    return load_matrix(cfg.matrix_path)


def initial_state(cfg: ScenarioConfig) -> ProjectiveState:
    """Chart the configured amplitudes.

    Without an explicit pivot the last amplitude is used when it is above the
    floor, otherwise the largest one.
    """
    a = as_amplitudes(cfg.amplitudes, normalize=True)
    if cfg.pivot is not None:
        return to_projective(a, cfg.pivot)
    pivot = a.size - 1
    if abs(a[pivot]) < PIVOT_FLOOR:
        pivot = int(np.argmax(np.abs(a)))
        log.info("last amplitude vanishes; using pivot %d", pivot)
    return to_projective(a, pivot)


def _format_row(values) -> str:
    return ",".join("%.17g" % v for v in values)


def csv_header(n_levels: int) -> list:
    cols = ["t"] + [f"pop_{i}" for i in range(n_levels)] + ["energy"]
    if n_levels == 4:
        cols += ["z", "concurrence"]
    return cols


def write_csv(path, series: ObservableSeries) -> Path:
    """Write ``t, pop_0..pop_{N-1}, energy[, z, concurrence]`` with 17 significant digits."""
    n = sum(1 for k in series.channels if k.startswith("population_"))
    cols = csv_header(n)
    data = [series.times] + [series[f"population_{i}"] for i in range(n)] + [series["energy"]]
    if n == 4:
        data += [series["z"], series["concurrence"]]
    rows = np.column_stack(data)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(_format_row(row) + "\n")
    return path


def read_csv(path):
    """Return ``(header, data)`` for a file written by :func:`write_csv`."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    return header, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def _write_energy_csv(path, full: FullTrajectory) -> Path:
    rows = np.column_stack(
        [full.system.times, full.system_energy, full.bath_energy, full.interaction_energy, full.total_energy]
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,system,bath,interaction,total\n")
        for row in rows:
            fh.write(_format_row(row) + "\n")
    return Path(path)


def _value_tag(v: float) -> str:
    return "%.10g" % v


def _run(cfg: ScenarioConfig, gamma_value, stem: str) -> RunResult:
    H = build_hamiltonian(cfg)
    state = initial_state(cfg)
    gammas = cfg.gammas(gamma_value)
    out = Path(cfg.output_dir)
    icfg = cfg.integrator
    full = None
    if cfg.bath == "explicit":
        spec = markovian_equivalent_bath(gammas, cfg.cutoff_factor * spectral_gap(H), cfg.oscillators)
        full = integrate_full(H, state, spec, None, cfg.t_final, cfg.sample_dt, icfg)
        traj = full.system
    else:
        bath = MarkovianBathSpec(gammas) if cfg.bath == "markovian" else None
        traj = integrate(H, state, bath, cfg.t_final, cfg.sample_dt, icfg)
    series = observe(traj)
    paths = [write_csv(out / f"{stem}.csv", series)]
    if full is not None:
        paths.append(_write_energy_csv(out / f"{stem}_energy.csv", full))
    oracle = None
    isolated = cfg.bath == "none" or not np.any(gammas)
    if cfg.oracle and isolated:
        otraj = integrate_schrodinger(H, as_amplitudes(cfg.amplitudes, normalize=True), cfg.t_final, cfg.sample_dt, icfg)
        oracle = observe(otraj)
        paths.append(write_csv(out / f"{stem}_oracle.csv", oracle))
    g = None if gamma_value is None else float(gamma_value)
    return RunResult(g, traj, series, paths, full, oracle)


def run_scenario(cfg: ScenarioConfig) -> list:
    """Run ``cfg`` (its whole sweep if it has one) and write the outputs.

    Returns the list of :class:`RunResult`, one per run.
    """
    if cfg.sweep:
        results = sweep(cfg, cfg.sweep)
    else:
        results = [_run(cfg, None, cfg.stem)]
    if cfg.plot_script:
        emit_plot_script([r.paths[0] for r in results], Path(cfg.output_dir) / f"{cfg.stem}.gp")
    return results


def sweep(cfg: ScenarioConfig, values: Sequence[float], parameter: str = "gamma") -> list:
    """One run per damping value; file names carry a ``_gamma_<value>`` suffix."""
    if parameter != "gamma":
        raise ValueError(f"only gamma sweeps are supported, got {parameter!r}")
    values = list(values)
    if not values:
        raise EmptySweep("sweep needs at least one value")
    return [_run(cfg, v, f"{cfg.stem}_gamma_{_value_tag(v)}") for v in values]


def emit_plot_script(csv_paths: Sequence, script_path) -> Path:
    """Write a gnuplot script drawing population (and z, concurrence) panels.

    Nothing is plotted here; run ``gnuplot <script>`` to produce a PNG next
    to the script.
    """
    csv_paths = [Path(p) for p in csv_paths]
    if not csv_paths:
        raise EmptySweep("no CSV files to plot")
    header, _ = read_csv(csv_paths[0])
    n = sum(1 for h in header if h.startswith("pop_"))
    two_qubit = "concurrence" in header
    script_path = Path(script_path)
    panels = [("population", [header.index(f"pop_{i}") + 1 for i in range(n)])]
    if two_qubit:
        panels += [("z", [header.index("z") + 1]), ("concurrence", [header.index("concurrence") + 1])]
    rows = len(csv_paths)
    cols = len(panels)
    lines = [
        "# gnuplot script; run: gnuplot " + script_path.name,
        "set datafile separator ','",
        "set terminal pngcairo size %d,%d" % (420 * cols, 300 * rows),
        "set output '%s'" % script_path.with_suffix(".png").name,
        "set key outside right",
        "set multiplot layout %d,%d" % (rows, cols),
    ]
    for p in csv_paths:
        rel = p.name if p.parent == script_path.parent else str(p)
        for label, idx in panels:
            lines.append("set title '%s: %s' noenhanced" % (p.stem, label))
            lines.append("set xlabel 't'")
            lines.append("set ylabel '%s'" % label)
            plots = ["'%s' using 1:%d with lines title '%s' noenhanced" % (rel, i, header[i - 1]) for i in idx]
            lines.append("plot " + ", \\\n     ".join(plots))
    lines.append("unset multiplot")
    script_path.parent.mkdir(parents=True, exist_ok=True)
    script_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return script_path
