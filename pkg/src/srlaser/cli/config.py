"""Sweep configuration files.

The format is INI-style text read with :mod:`configparser`::

    [model]
    n_spins = 100
    g_sqrt_n = 1.0        # or g = ...
    delta = 1
    epsilon = 0
    kappa = 1
    gamma = 0.01
    pump_w = 0.2
    gamma_phi = 1

    [axis.pump_w]
    min = 0.01
    max = 1
    count = 100
    scale = linear        # or log

    [run]
    tasks = phase-diagram, squeeze-map
    out = results
    jobs = 1

Optional task sections: ``[spectra]``, ``[hysteresis]``, ``[qsnapshots]``,
``[exact]``. Unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ..errors import ParseError, RangeError, UnknownKey
from ..model import ModelParams, _exact_single_coupling

TASKS = ("phase-diagram", "hysteresis", "spectra", "squeeze-map", "q-snapshots", "exact-steady-state")
PARAM_FIELDS = ("n_spins", "g", "delta", "epsilon", "kappa", "gamma", "pump_w", "gamma_phi")
AXIS_NAMES = PARAM_FIELDS + ("g_sqrt_n",)

MODEL_DEFAULTS = {
    "n_spins": 100,
    "delta": 1.0,
    "epsilon": 0.0,
    "kappa": 1.0,
    "gamma": 0.01,
    "pump_w": 0.2,
    "gamma_phi": 1.0,
}


@dataclass
class SectionSchema:
    keys: Dict[str, Tuple[type, object]]   # name -> (type, default)


SCHEMAS = {
    "spectra": {"omega_max": (float, 5.0), "omega_count": (int, 201), "mode": (str, "full")},
    "hysteresis": {"w_start": (float, 0.02), "w_end": (float, 1.0), "n_steps": (int, 50)},
    "qsnapshots": {
        "times": (str, "0.5, 1, 4"), "extent": (float, 8.0), "resolution": (int, 81),
        "kappa_a": (float, None), "d_a": (float, None), "d_phi": (float, None),
        "chi": (float, None), "a_mag": (float, None),
    },
    "exact": {"n_cut": (str, "auto"), "max_cut": (int, 128), "tail_tol": (float, 1e-8),
              "obs_rtol": (float, 1e-6)},
}


@dataclass
class Axis:
    name: str
    min: float
    max: float
    count: int
    scale: str = "linear"

    def values(self) -> List[float]:
        import numpy as np

        if self.count == 1:
            return [float(self.min)]
        if self.scale == "log":
            vals = np.geomspace(self.min, self.max, self.count)
        else:
            vals = np.linspace(self.min, self.max, self.count)
        if self.name == "n_spins":
            return [int(round(v)) for v in vals]
        return [float(v) for v in vals]


@dataclass
class SweepSpec:
    """Resolved sweep: base model, axes, tasks and per-task options.

    Documented defaults: spectra on 201 frequencies up to 5 from the full
    noise matrix (``mode = simplified`` drops amplitude noise); hysteresis ramps
    over w in [0.02, 1] with 50 steps; Q snapshots on an 81 x 81 grid of
    half-width 8; exact solves use the cutoff ladder 8, 16, ... up to 128 with
    tail tolerance 1e-8 and observable tolerance 1e-6.
    """

    model: Dict[str, float]
    axes: List[Axis]
    tasks: List[str]
    out: str = "results"
    jobs: int = 1
    options: Dict[str, Dict[str, object]] = field(default_factory=dict)
    source: Optional[str] = None

    def base_params(self) -> ModelParams:
        return resolve_params(self.model, {})

    def points(self) -> List[Dict[str, float]]:
        import itertools

        grids = [ax.values() for ax in self.axes]
        names = [ax.name for ax in self.axes]
        return [dict(zip(names, combo)) for combo in itertools.product(*grids)] if grids else [{}]

    def to_dict(self) -> dict:
        """Everything that determines the results (output path and job count excluded)."""
        base = self.base_params()
        return {
            "model": dict(self.model),
            "axes": [vars(a).copy() for a in self.axes],
            "tasks": list(self.tasks),
            "options": {k: dict(v) for k, v in self.options.items()},
            "resolved_model": {f: getattr(base, f) for f in PARAM_FIELDS} | {"g_sqrt_n": base.g_sqrt_n},
        }


def resolve_params(model: Dict[str, float], overrides: Dict[str, float]) -> ModelParams:
    """Combine base model values and axis overrides; ``g_sqrt_n`` sets ``g``."""
    merged = dict(model)
    merged.update(overrides)
    n = int(merged["n_spins"])
    gsn = merged.pop("g_sqrt_n", None)
    if "g_sqrt_n" in overrides or ("g" not in overrides and gsn is not None):
        merged["g"] = _exact_single_coupling(n, float(gsn))
    merged["n_spins"] = n
    return ModelParams(**{k: merged[k] for k in PARAM_FIELDS})


class _Locator:
    """Maps (section, key) to the line and column of the value in the source text."""

    _section = re.compile(r"^\s*\[([^\]]+)\]")
    _key = re.compile(r"^(\s*)([^=:#;\s][^=:]*?)\s*[=:]\s*")

    def __init__(self, text: str):
        self.pos = {}
        self.section_line = {}
        current = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            m = self._section.match(line)
            if m:
                current = m.group(1).strip()
                self.section_line.setdefault(current, lineno)
                continue
            m = self._key.match(line)
            if m and current is not None:
                self.pos.setdefault((current, m.group(2).strip().lower()), (lineno, m.end() + 1))

    def where(self, section, key=None):
        if key is None:
            return self.section_line.get(section, 0), 1
        return self.pos.get((section, key), (self.section_line.get(section, 0), 1))


def _strip_comment(value: str) -> str:
    return re.split(r"\s[#;]", value, maxsplit=1)[0].strip()


def _convert(kind, raw, loc, section, key):
    text = _strip_comment(raw)
    line, col = loc.where(section, key)
    try:
        if kind is int:
            f = float(text)
            if not f.is_integer():
                raise ValueError
            return int(f)
        if kind is float:
            v = float(text)
            if not math.isfinite(v):
                raise ValueError
            return v
        return text
    except ValueError:
        raise ParseError(f"[{section}] {key}: cannot read {text!r} as {kind.__name__}", line, col) from None


def _loads(text: str, source: Optional[str] = None) -> SweepSpec:
    cp = configparser.ConfigParser(inline_comment_prefixes=None, interpolation=None,
                                   comment_prefixes=("#", ";"), empty_lines_in_values=False)
    try:
        cp.read_string(text, source=source or "<config>")
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError(f"key outside any section: {exc.line.strip()!r}", exc.lineno, 1) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ParseError(f"malformed line {line.strip()!r}", lineno, 1) from None
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ParseError(str(exc).split(":")[-1].strip(), exc.lineno or 0, 1) from None
    loc = _Locator(text)

    model = dict(MODEL_DEFAULTS)
    axes: List[Axis] = []
    tasks = ["phase-diagram"]
    out, jobs = "results", 1
    options = {name: {k: d for k, (t, d) in keys.items()} for name, keys in SCHEMAS.items()}

    for section in cp.sections():
        items = {k: v for k, v in cp.items(section)}
        if section == "model":
            for key, raw in items.items():
                if key not in AXIS_NAMES:
                    line, col = loc.where(section, key)
                    raise UnknownKey(f"[model] unknown key {key!r} (line {line}, column {col})")
                model[key] = _convert(int if key == "n_spins" else float, raw, loc, section, key)
            if "g" in items and "g_sqrt_n" in items:
                line, col = loc.where(section, "g_sqrt_n")
                raise ParseError("set either g or g_sqrt_n, not both", line, col)
        elif section.startswith("axis."):
            name = section[5:].strip()
            if name not in AXIS_NAMES:
                line, col = loc.where(section)
                raise UnknownKey(f"unknown axis parameter {name!r} (line {line})")
            allowed = {"min", "max", "count", "scale"}
            for key in items:
                if key not in allowed:
                    line, col = loc.where(section, key)
                    raise UnknownKey(f"[{section}] unknown key {key!r} (line {line}, column {col})")
            for key in ("min", "max"):
                if key not in items:
                    line, col = loc.where(section)
                    raise ParseError(f"[{section}] missing {key}", line, col)
            lo = _convert(float, items["min"], loc, section, "min")
            hi = _convert(float, items["max"], loc, section, "max")
            count = _convert(int, items.get("count", "1"), loc, section, "count")
            scale = _convert(str, items.get("scale", "linear"), loc, section, "scale").lower()
            if count < 1:
                line, col = loc.where(section, "count")
                raise RangeError(f"[{section}] count must be >= 1 (line {line}, column {col})")
            if scale not in ("linear", "log"):
                line, col = loc.where(section, "scale")
                raise ParseError(f"[{section}] scale must be linear or log", line, col)
            if scale == "log" and (lo <= 0 or hi <= 0):
                line, col = loc.where(section, "min")
                raise RangeError(f"[{section}] log axis needs positive bounds (line {line})")
            axes.append(Axis(name, lo, hi, count, scale))
        elif section == "run":
            for key, raw in items.items():
                if key == "tasks":
                    names = [t.strip() for t in _strip_comment(raw).split(",") if t.strip()]
                    for t in names:
                        if t not in TASKS:
                            line, col = loc.where(section, key)
                            raise UnknownKey(f"unknown task {t!r} (line {line}, column {col})")
                    tasks = names
                elif key == "out":
                    out = _strip_comment(raw)
                elif key == "jobs":
                    jobs = _convert(int, raw, loc, section, key)
                    if jobs < 1:
                        line, col = loc.where(section, key)
                        raise RangeError(f"jobs must be >= 1 (line {line}, column {col})")
                else:
                    line, col = loc.where(section, key)
                    raise UnknownKey(f"[run] unknown key {key!r} (line {line}, column {col})")
        elif section in SCHEMAS:
            schema = SCHEMAS[section]
            for key, raw in items.items():
                if key not in schema:
                    line, col = loc.where(section, key)
                    raise UnknownKey(f"[{section}] unknown key {key!r} (line {line}, column {col})")
                options[section][key] = _convert(schema[key][0], raw, loc, section, key)
        else:
            line, _ = loc.where(section)
            raise UnknownKey(f"unknown section [{section}] (line {line})")

    if "g" not in model and "g_sqrt_n" not in model:
        model["g_sqrt_n"] = 1.0
    spec = SweepSpec(model, axes, tasks, out, jobs, options, source)
    _validate(spec, loc)
    return spec


def _validate(spec: SweepSpec, loc: _Locator) -> None:
    m = spec.model
    checks = [
        ("n_spins", m["n_spins"] >= 1, "must be >= 1"),
        ("kappa", m["kappa"] > 0, "must be > 0"),
    ]
    for key in ("g", "g_sqrt_n", "gamma", "pump_w", "gamma_phi"):
        if key in m:
            checks.append((key, m[key] >= 0, "must be >= 0"))
    for key, ok, msg in checks:
        if not ok:
            line, col = loc.where("model", key)
            raise RangeError(f"[model] {key} {msg} (line {line}, column {col})")
    for ax in spec.axes:
        lo = min(ax.min, ax.max)
        if ax.name == "kappa" and lo <= 0 or ax.name in ("g", "g_sqrt_n", "gamma", "pump_w", "gamma_phi") and lo < 0:
            line, col = loc.where("axis." + ax.name, "min")
            raise RangeError(f"[axis.{ax.name}] range leaves the physical domain (line {line})")
        if ax.name == "n_spins" and lo < 1:
            line, col = loc.where("axis." + ax.name, "min")
            raise RangeError(f"[axis.n_spins] needs n_spins >= 1 (line {line})")
    h = spec.options["hysteresis"]
    if h["n_steps"] < 2:
        line, col = loc.where("hysteresis", "n_steps")
        raise RangeError(f"[hysteresis] n_steps must be >= 2 (line {line}, column {col})")
    s = spec.options["spectra"]
    if s["omega_count"] < 1 or s["omega_max"] < 0:
        line, col = loc.where("spectra", "omega_count")
        raise RangeError(f"[spectra] needs omega_count >= 1 and omega_max >= 0 (line {line})")
    if s["mode"] not in ("full", "simplified"):
        line, col = loc.where("spectra", "mode")
        raise ParseError("[spectra] mode must be full or simplified", line, col)
    q = spec.options["qsnapshots"]
    try:
        times = [float(t) for t in str(q["times"]).split(",") if t.strip()]
    except ValueError:
        line, col = loc.where("qsnapshots", "times")
        raise ParseError("[qsnapshots] times must be a comma-separated list of numbers", line, col) from None
    if any(t < 0 for t in times) or not times:
        line, col = loc.where("qsnapshots", "times")
        raise RangeError(f"[qsnapshots] times must be non-negative (line {line})")
    q["times"] = times
    if q["resolution"] < 2:
        line, col = loc.where("qsnapshots", "resolution")
        raise RangeError(f"[qsnapshots] resolution must be >= 2 (line {line})")
    e = spec.options["exact"]
    if str(e["n_cut"]) != "auto":
        try:
            e["n_cut"] = int(str(e["n_cut"]))
        except ValueError:
            line, col = loc.where("exact", "n_cut")
            raise ParseError("[exact] n_cut must be an integer or 'auto'", line, col) from None
        if e["n_cut"] < 0:
            line, col = loc.where("exact", "n_cut")
            raise RangeError(f"[exact] n_cut must be >= 0 (line {line})")
    try:
        spec.base_params()
    except ValueError as exc:
        raise RangeError(f"[model] {exc}") from None


def loads_config(text: str) -> SweepSpec:
    return _loads(text)


def load_config(path) -> SweepSpec:
    """Read and validate a sweep configuration file."""
    path = Path(path)
    return _loads(path.read_text(), str(path))
