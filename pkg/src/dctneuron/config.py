"""Experiment configuration: an INI file with fixed sections.

Example::

    [experiment]
    kind = flat_direct
    seed = 1
    samples = 5000

    [model]
    q = 6
    alpha = 0.01

    [nonlinearity]
    kind = compander
    mu = 255

    [channel]
    snr_db = 80

Every option has a default; the effective values (defaults included) are
echoed by :meth:`ExperimentConfig.to_dict`.  Validation errors carry the line
number of the offending option.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .channels import LinearFilter
from .errors import ConfigError, ContractError
from .nonlinearities import KINDS, NonlinearFn, _ALIASES

__all__ = ["EXPERIMENTS", "ExperimentConfig", "load_config", "parse_config"]

EXPERIMENTS = (
    "transform_demo",
    "fit_neuron",
    "flat_direct",
    "flat_inverse",
    "invert_direct",
    "mdir",
    "snr_sweep",
)

SECTIONS = {
    "experiment": {"kind", "seed", "samples", "output_dir"},
    "model": {"n", "q", "q_inverse", "indexing", "alpha", "kappa", "method"},
    "nonlinearity": {"kind"},  # plus free-form shape parameters
    "channel": {"snr_db", "a", "b", "noise_mode", "m"},
    "pilots": {"distribution"},
    "mdir": {"max_outer_iters", "rel_tol", "mse_threshold", "mode", "f_update", "centered", "normalized_step"},
    "sweep": {"snr_list", "nonlinearities", "estimators", "method", "trials", "workers"},
    "output": {"gnuplot"},
}


@dataclass
class ExperimentConfig:
    experiment: str = "flat_direct"
    seed: int = 1
    samples: int = 5000
    output_dir: str = "results"
    # model
    n: int = 128
    q: int = 6
    q_inverse: int = 32
    indexing: str = "standard"
    alpha: float = 1e-2
    kappa: float = 1e-2
    method: str = "lms"
    # nonlinearity
    nonlinearity: str = "compander"
    nonlinearity_params: dict = field(default_factory=dict)
    # channel
    snr_db: float = 80.0
    a: tuple = (1.0, 0.5, 0.2)
    b: tuple = (1.0, -0.4, 0.1)
    noise_mode: str = "post_filter"
    m: int = 3
    # pilots
    pilot_distribution: str = "uniform"
    # mdir
    max_outer_iters: int = 50
    rel_tol: float = 1e-6
    mse_threshold: float = 0.0
    mdir_mode: str = "general"
    f_update: str = "lms"
    centered: bool = True
    normalized_step: bool = True
    # sweep
    snr_list: tuple = ()
    nonlinearities: tuple = ()
    estimators: tuple = ("direct",)
    sweep_method: str = "block"
    trials: int = 10
    workers: int = 1
    # output
    gnuplot: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["a"] = list(self.a)
        d["b"] = list(self.b)
        d["snr_list"] = list(self.snr_list)
        d["nonlinearities"] = list(self.nonlinearities)
        d["estimators"] = list(self.estimators)
        d["snr_db"] = _json_float(self.snr_db)
        d["nonlinearity_params"] = dict(NonlinearFn(self.nonlinearity, self.n, self.nonlinearity_params).params)
        return d


def _json_float(v):
    return "inf" if v == math.inf else v


class _Lines:
    """Maps ``(section, option)`` to its line number in the source text."""

    _section = re.compile(r"^\s*\[([^\]]+)\]")
    _option = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")

    def __init__(self, text: str):
        self.table = {}
        self.sections = {}
        current = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            m = self._section.match(line)
            if m:
                current = m.group(1).strip().lower()
                self.sections.setdefault(current, lineno)
                continue
            m = self._option.match(line)
            if m and current is not None:
                self.table.setdefault((current, m.group(1).strip().lower()), lineno)

    def __call__(self, section, option=None):
        if option is None:
            return self.sections.get(section)
        return self.table.get((section, option), self.sections.get(section))


def _list(raw):
    return [p.strip() for p in raw.replace(";", ",").split(",") if p.strip()]


def parse_config(text: str, path=None, sweep: bool = False) -> ExperimentConfig:
    lines = _Lines(text)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=str(path or "<config>"))
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("option found before any [section] header", exc.lineno, path) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno, path) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate option {exc.option!r} in [{exc.section}]", exc.lineno, path) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"cannot parse {line.strip()!r}", lineno, path) from None

    def fail(msg, section, option=None):
        raise ConfigError(msg, lines(section, option), path)

    for section in parser.sections():
        if section not in SECTIONS:
            fail(f"unknown section [{section}]", section)
        if section == "nonlinearity":
            continue
        for option in parser[section]:
            if option not in SECTIONS[section]:
                fail(f"unknown option {option!r} in [{section}]", section, option)

    cfg = ExperimentConfig()

    def get(section, option, conv, attr=None, check=None, what=None):
        if not parser.has_option(section, option):
            return
        raw = parser.get(section, option)
        try:
            value = conv(raw)
        except (TypeError, ValueError):
            fail(f"[{section}] {option} = {raw!r} is not a valid {what or conv.__name__}", section, option)
        if check is not None and not check(value):
            fail(f"[{section}] {option} = {raw!r} is out of range", section, option)
        setattr(cfg, attr or option, value)

    def boolean(raw):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(raw)

    def snr(raw):
        low = raw.strip().lower()
        if low in ("inf", "infinity", "none"):
            return math.inf
        v = float(raw)
        if math.isnan(v):
            raise ValueError(raw)
        return v

    def floats(raw):
        vals = tuple(float(v) for v in _list(raw))
        if not vals:
            raise ValueError(raw)
        return vals

    def choice(options):
        def conv(raw):
            v = raw.strip().lower()
            if v not in options:
                raise ValueError(raw)
            return v
        conv.__name__ = "one of " + ", ".join(options)
        return conv

    def kind_name(raw):
        v = raw.strip().lower()
        v = _ALIASES.get(v, v)
        if v not in KINDS:
            raise ValueError(raw)
        return v
    kind_name.__name__ = "nonlinearity (" + ", ".join(KINDS) + ")"

    positive = lambda v: v > 0  # noqa: E731

    get("experiment", "kind", choice(EXPERIMENTS), "experiment")
    get("experiment", "seed", int, check=lambda v: 0 <= v < 2**64, what="unsigned 64-bit integer")
    get("experiment", "samples", int, check=positive, what="integer")
    get("experiment", "output_dir", str)
    get("model", "n", int, check=lambda v: v >= 2, what="integer")
    get("model", "q", int, check=lambda v: v >= 1, what="integer")
    get("model", "q_inverse", int, check=lambda v: v >= 1, what="integer")
    get("model", "indexing", choice(("standard", "odd")))
    get("model", "alpha", float, check=lambda v: 0 < v < 1, what="number")
    get("model", "kappa", float, check=lambda v: 0 < v < 1, what="number")
    get("model", "method", choice(("lms", "block")))
    get("nonlinearity", "kind", kind_name, "nonlinearity")
    get("channel", "snr_db", snr, what="number or 'inf'")
    get("channel", "a", floats, what="comma-separated list of numbers")
    get("channel", "b", floats, what="comma-separated list of numbers")
    get("channel", "noise_mode", choice(("post_filter", "in_loop")))
    get("channel", "m", int, check=lambda v: v >= 1, what="integer")
    get("pilots", "distribution", choice(("uniform", "grid")), "pilot_distribution")
    get("mdir", "max_outer_iters", int, check=positive, what="integer")
    get("mdir", "rel_tol", float, check=lambda v: v >= 0, what="number")
    get("mdir", "mse_threshold", float, check=lambda v: v >= 0, what="number")
    get("mdir", "mode", choice(("general", "unwhitened")), "mdir_mode")
    get("mdir", "f_update", choice(("lms", "block")))
    get("mdir", "centered", boolean, what="boolean")
    get("mdir", "normalized_step", boolean, what="boolean")
    get("sweep", "snr_list", floats, what="comma-separated list of numbers")
    get("sweep", "nonlinearities", lambda raw: tuple(kind_name(k) for k in _list(raw)) or _empty(),
        what="non-empty list of nonlinearities")
    get("sweep", "estimators", lambda raw: tuple(choice(("direct", "inverse"))(k) for k in _list(raw)) or _empty(),
        what="non-empty list of 'direct'/'inverse'")
    get("sweep", "method", choice(("lms", "block")), "sweep_method")
    get("sweep", "trials", int, check=positive, what="integer")
    get("sweep", "workers", int, check=positive, what="integer")
    get("output", "gnuplot", boolean, what="boolean")

    if parser.has_section("nonlinearity"):
        params = {}
        for option in parser["nonlinearity"]:
            if option == "kind":
                continue
            raw = parser.get("nonlinearity", option)
            try:
                params[option] = float(raw)
            except ValueError:
                fail(f"[nonlinearity] {option} = {raw!r} is not a number", "nonlinearity", option)
        cfg.nonlinearity_params = params
        try:
            NonlinearFn(cfg.nonlinearity, cfg.n, params)
        except ContractError as exc:
            fail(str(exc), "nonlinearity", next(iter(params), "kind"))

    if cfg.q > cfg.n:
        fail(f"q = {cfg.q} exceeds n = {cfg.n}", "model", "q")
    if cfg.q_inverse > cfg.n:
        fail(f"q_inverse = {cfg.q_inverse} exceeds n = {cfg.n}", "model", "q_inverse")
    if cfg.samples < 10 * cfg.q:
        fail(f"samples = {cfg.samples} must be at least 10*q = {10 * cfg.q}", "experiment", "samples")
    if len(cfg.a) != len(cfg.b):
        fail("channel polynomials a and b must have equal length", "channel", "b")
    if cfg.b[0] != 1.0:
        fail("channel feedback polynomial must start with 1", "channel", "b")
    try:
        LinearFilter(cfg.a, cfg.b)
    except ContractError as exc:
        fail(str(exc), "channel", "b")
    if not parser.has_option("channel", "m"):
        cfg.m = len(cfg.a)
    if cfg.experiment == "mdir" and cfg.samples < 50 * cfg.m * cfg.q:
        fail(f"mdir needs samples >= 50*m*q = {50 * cfg.m * cfg.q}", "experiment", "samples")
    if sweep:
        cfg.experiment = "snr_sweep"
    if cfg.experiment == "snr_sweep":
        if not parser.has_section("sweep"):
            fail("a sweep needs a [sweep] section", "experiment", "kind")
        if not cfg.snr_list:
            fail("[sweep] snr_list must be non-empty", "sweep", "snr_list")
        if not cfg.nonlinearities:
            fail("[sweep] nonlinearities must be non-empty", "sweep", "nonlinearities")
    return cfg


def _empty():
    raise ValueError("empty list")


def load_config(path, sweep: bool = False) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, path) from None
    return parse_config(text, path, sweep)
