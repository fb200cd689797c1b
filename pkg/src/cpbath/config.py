"""Scenario configuration files.

The format is INI (``configparser``) with these sections::

    [scenario]     name, kind = two_qubit | fmo | custom
    [hamiltonian]  source = coefficients | fmo | file; coefficients; path
    [initial]      amplitudes = re,im; re,im; ...   pivot (optional)
    [bath]         type = none | markovian | explicit; gamma; sweep;
                   oscillators; cutoff_factor
    [time]         t_final, sample_dt
    [integrator]   any IntegratorConfig field (optional)
    [output]       directory, prefix, oracle, plot_script

``gamma`` is a scalar (broadcast to all coordinates) or one value per
coordinate.  ``sweep`` lists scalar damping constants; each value gives one
run.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .dynamics import IntegratorConfig
from .errors import ConfigParse

KINDS = ("two_qubit", "fmo", "custom")
SOURCES = ("coefficients", "fmo", "file")
BATHS = ("none", "markovian", "explicit")

#: initial state of the two-qubit runs, a = b = sqrt(0.4), c = 0, d = sqrt(0.2)
TWO_QUBIT_INITIAL = (np.sqrt(0.4), np.sqrt(0.4), 0.0, np.sqrt(0.2))
#: repo default for C1..C3 (C4, C5 are set per scenario)
TWO_QUBIT_DEFAULT_C123 = (0.0, 1.0, 1.0)
DEFAULT_SWEEP = (0.0, 0.01, 0.1, 1.0)


@dataclass
class ScenarioConfig:
    name: str
    kind: str = "custom"
    source: str = "coefficients"
    coefficients: tuple = TWO_QUBIT_DEFAULT_C123 + (0.0, 0.0)
    matrix_path: Optional[str] = None
    amplitudes: tuple = ()
    pivot: Optional[int] = None
    bath: str = "none"
    gamma: tuple = (0.0,)
    sweep: tuple = ()
    oscillators: int = 400
    cutoff_factor: float = 50.0
    t_final: float = 1.0
    sample_dt: float = 0.01
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    output_dir: str = "."
    prefix: Optional[str] = None
    oracle: bool = False
    plot_script: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigParse(f"scenario.kind must be one of {KINDS}, got {self.kind!r}")
        if self.source not in SOURCES:
            raise ConfigParse(f"hamiltonian.source must be one of {SOURCES}, got {self.source!r}")
        if self.source == "file" and not self.matrix_path:
            raise ConfigParse("hamiltonian.path is required when source = file")
        if self.source == "coefficients" and len(self.coefficients) != 5:
            raise ConfigParse("hamiltonian.coefficients needs five values C1..C5")
        if self.bath not in BATHS:
            raise ConfigParse(f"bath.type must be one of {BATHS}, got {self.bath!r}")
        if not self.amplitudes:
            raise ConfigParse("initial.amplitudes is required")
        a = np.asarray(self.amplitudes, dtype=complex)
        if not np.all(np.isfinite(a)) or not np.any(a):
            raise ConfigParse("initial.amplitudes must be finite and not all zero")
        if any(g < 0 for g in self.gamma) or any(g < 0 for g in self.sweep):
            raise ConfigParse("damping constants must be non-negative")
        if not self.t_final > 0:
            raise ConfigParse("time.t_final must be positive")
        if not self.sample_dt > 0:
            raise ConfigParse("time.sample_dt must be positive")
        if self.oscillators < 1 or not self.cutoff_factor > 0:
            raise ConfigParse("bath.oscillators and bath.cutoff_factor must be positive")

    @property
    def stem(self) -> str:
        return self.prefix or self.name

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    def gammas(self, value: Optional[float] = None) -> np.ndarray:
        """Per-coordinate damping constants, broadcasting a scalar."""
        g = np.atleast_1d(np.asarray(self.gamma if value is None else value, dtype=float))
        m = self.dim - 1
        if g.size == 1:
            return np.full(m, g[0])
        if g.size != m:
            raise ConfigParse(f"bath.gamma has {g.size} values; expected 1 or {m}")
        return g

    def replace(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw)


def _floats(text: str, key: str) -> tuple:
    try:
        return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except ValueError as exc:
        raise ConfigParse(f"{key}: {exc}") from None


def _amplitudes(text: str) -> tuple:
    out = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        parts = item.split(",")
        try:
            if len(parts) == 1:
                out.append(complex(float(parts[0]), 0.0))
            elif len(parts) == 2:
                out.append(complex(float(parts[0]), float(parts[1])))
            else:
                raise ValueError(f"expected 're,im', got {item!r}")
        except ValueError as exc:
            raise ConfigParse(f"initial.amplitudes: {exc}") from None
    return tuple(out)


def _get(cp, section, key, required=False, default=None):
    if cp.has_option(section, key):
        return cp.get(section, key).strip()
    if required:
        raise ConfigParse(f"missing required field {section}.{key}")
    return default


def _number(cp, section, key, conv, required=False, default=None):
    raw = _get(cp, section, key, required)
    if raw is None:
        return default
    try:
        return conv(raw)
    except ValueError:
        raise ConfigParse(f"{section}.{key}: cannot parse {raw!r}") from None


def _bool(raw: Optional[str], key: str, default=False) -> bool:
    if raw is None:
        return default
    v = raw.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigParse(f"{key}: expected a boolean, got {raw!r}")


_INTEGRATOR_TYPES = {f.name: f.type for f in dataclasses.fields(IntegratorConfig)}


def parse_config(text: str, base_dir: Optional[Path] = None) -> ScenarioConfig:
    """Parse INI text into a :class:`ScenarioConfig`.

    Raises
    ------
    ConfigParse
        On syntax errors, missing required fields or invalid values; the
        message names the offending field.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigParse(f"malformed config: {exc}") from None

    name = _get(cp, "scenario", "name", required=True)
    kind = _get(cp, "scenario", "kind", default="custom")
    source = _get(cp, "hamiltonian", "source", required=True)
    coeffs = _get(cp, "hamiltonian", "coefficients")
    path = _get(cp, "hamiltonian", "path")
    if path and base_dir is not None and not Path(path).is_absolute():
        path = str(Path(base_dir) / path)

    kw = dict(
        name=name,
        kind=kind,
        source=source,
        matrix_path=path,
        amplitudes=_amplitudes(_get(cp, "initial", "amplitudes", required=True)),
        pivot=_number(cp, "initial", "pivot", int),
        bath=_get(cp, "bath", "type", default="none"),
        t_final=_number(cp, "time", "t_final", float, required=True),
        sample_dt=_number(cp, "time", "sample_dt", float, required=True),
        output_dir=_get(cp, "output", "directory", default="."),
        prefix=_get(cp, "output", "prefix"),
        oracle=_bool(_get(cp, "output", "oracle"), "output.oracle"),
        plot_script=_bool(_get(cp, "output", "plot_script"), "output.plot_script"),
    )
    if coeffs is not None:
        kw["coefficients"] = _floats(coeffs, "hamiltonian.coefficients")
    gamma = _get(cp, "bath", "gamma")
    if gamma is not None:
        kw["gamma"] = _floats(gamma, "bath.gamma")
    sweep = _get(cp, "bath", "sweep")
    if sweep is not None:
        kw["sweep"] = _floats(sweep, "bath.sweep")
    osc = _number(cp, "bath", "oscillators", int)
    if osc is not None:
        kw["oscillators"] = osc
    cf = _number(cp, "bath", "cutoff_factor", float)
    if cf is not None:
        kw["cutoff_factor"] = cf

    icfg = {}
    if cp.has_section("integrator"):
        for key, raw in cp.items("integrator"):
            if key not in _INTEGRATOR_TYPES:
                raise ConfigParse(f"integrator.{key}: unknown option")
            if key == "method":
                icfg[key] = raw.strip()
            else:
                icfg[key] = _number(cp, "integrator", key, int if key in ("max_steps", "implicit_max_iter") else float)
    try:
        kw["integrator"] = IntegratorConfig(**icfg)
    except ValueError as exc:
        raise ConfigParse(f"integrator: {exc}") from None
    return ScenarioConfig(**kw)


def load_config(path) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParse(f"cannot read config {p}: {exc.strerror}") from None
    return parse_config(text, base_dir=p.parent)


def _fmt(v: float) -> str:
    return repr(float(v))


def serialize_config(cfg: ScenarioConfig) -> str:
    """Inverse of :func:`parse_config` (up to formatting)."""
    lines = ["[scenario]", f"name = {cfg.name}", f"kind = {cfg.kind}", "", "[hamiltonian]", f"source = {cfg.source}"]
    if cfg.source == "coefficients":
        lines.append("coefficients = " + ", ".join(_fmt(c) for c in cfg.coefficients))
    if cfg.matrix_path:
        lines.append(f"path = {cfg.matrix_path}")
    lines += ["", "[initial]", "amplitudes = " + "; ".join(f"{_fmt(a.real)},{_fmt(a.imag)}" for a in map(complex, cfg.amplitudes))]
    if cfg.pivot is not None:
        lines.append(f"pivot = {cfg.pivot}")
    lines += ["", "[bath]", f"type = {cfg.bath}", "gamma = " + ", ".join(_fmt(g) for g in cfg.gamma)]
    if cfg.sweep:
        lines.append("sweep = " + ", ".join(_fmt(g) for g in cfg.sweep))
    lines += [f"oscillators = {cfg.oscillators}", f"cutoff_factor = {_fmt(cfg.cutoff_factor)}"]
    lines += ["", "[time]", f"t_final = {_fmt(cfg.t_final)}", f"sample_dt = {_fmt(cfg.sample_dt)}", "", "[integrator]"]
    for f in dataclasses.fields(IntegratorConfig):
        v = getattr(cfg.integrator, f.name)
        lines.append(f"{f.name} = {v if isinstance(v, (str, int)) else _fmt(v)}")
    lines += ["", "[output]", f"directory = {cfg.output_dir}"]
    if cfg.prefix:
        lines.append(f"prefix = {cfg.prefix}")
    lines += [f"oracle = {str(cfg.oracle).lower()}", f"plot_script = {str(cfg.plot_script).lower()}", ""]
    return "\n".join(lines)


def bundled_scenarios() -> list:
    """Names of the scenario configs shipped with the package."""
    root = resources.files("cpbath") / "data" / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_bundled(name: str) -> ScenarioConfig:
    root = resources.files("cpbath") / "data" / "scenarios"
    res = root / f"{name}.cfg"
    if not res.is_file():
        raise ConfigParse(f"unknown scenario {name!r}; available: {', '.join(bundled_scenarios())}")
    return parse_config(res.read_text(encoding="utf-8"))
