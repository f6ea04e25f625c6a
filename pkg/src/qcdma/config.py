"""Experiment specifications and the key/value config file format.

A config file holds one ``key: value`` pair per line (YAML syntax), for
example::

    experiment: loss-table
    n: [8, 10, 12, 14]
    users: [5, 20, 50]
    trials: 200
    seed: 42

Recognised keys are the fields of :class:`ExperimentSpec`. ``n`` and
``users`` take a number or a list. ``bits`` takes a bit count or a list of
bitstrings, one per user. Command-line flags override file values.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import yaml

from .network import TOPOLOGIES
from .optics import FILTER_RULES

KINDS = ("loss-table", "crosstalk-table", "fidelity-table", "density-trace", "code-check")
FORMATS = ("csv", "json", "text-table")
MAX_N = 15


class ConfigFileError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str = "loss-table"
    n: tuple[int, ...] = (10,)
    users: tuple[int, ...] = (5,)
    trials: int = 200
    runs: int = 128
    bits: int = 8
    patterns: tuple[str, ...] = ()
    seed: int = 0
    samples_per_chip: int = 2
    filter_rule: str = "wide"
    topology: str = "ring"
    background: str = "silent"
    in_phase: bool = False
    format: str | None = None
    out: str | None = None
    stride: int = 0
    allow_large: bool = False
    code_out: str | None = None

    def __post_init__(self):
        if self.experiment not in KINDS:
            raise ConfigFileError(f"experiment: must be one of {KINDS}, got {self.experiment!r}")
        if not self.n or not self.users:
            raise ConfigFileError("n and users sweep lists must be non-empty")
        for k in ("trials", "runs", "bits", "samples_per_chip"):
            if getattr(self, k) < 1:
                raise ConfigFileError(f"{k}: must be >= 1")
        if any(v < 2 for v in self.n):
            raise ConfigFileError("n: register count must be >= 2")
        if any(v < 1 for v in self.users):
            raise ConfigFileError("users: must be >= 1")
        if max(self.n) > MAX_N and not self.allow_large:
            raise ConfigFileError(
                f"n: values above {MAX_N} need allow_large (memory grows with S)"
            )
        if self.format is not None and self.format not in FORMATS:
            raise ConfigFileError(f"format: must be one of {FORMATS}")
        if self.filter_rule not in FILTER_RULES:
            raise ConfigFileError(f"filter_rule: must be one of {FILTER_RULES}")
        if self.topology not in TOPOLOGIES:
            raise ConfigFileError(f"topology: must be one of {TOPOLOGIES}")
        if self.background not in ("silent", "random"):
            raise ConfigFileError("background: must be 'silent' or 'random'")
        for p in self.patterns:
            if not p or set(p) - {"0", "1"}:
                raise ConfigFileError(f"bits: {p!r} is not a bitstring")
        if self.patterns and len({len(p) for p in self.patterns}) != 1:
            raise ConfigFileError("bits: all bitstrings must have the same length")

    @property
    def output_format(self) -> str:
        if self.format:
            return self.format
        return "text-table" if self.experiment == "code-check" else "csv"

    def effective(self) -> dict:
        """Every field with its value, for reproducibility headers."""
        d = asdict(self)
        d["format"] = self.output_format
        return d


_FIELDS = {f.name: f for f in fields(ExperimentSpec)}
_ALIASES = {"filter": "filter_rule", "samples-per-chip": "samples_per_chip",
            "filter-rule": "filter_rule", "allow-large": "allow_large",
            "in-phase": "in_phase", "code-out": "code_out"}


def _int(key, v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigFileError(f"{key}: expected an integer, got {v!r}")
    return v


def _int_list(key, v) -> tuple[int, ...]:
    items = v if isinstance(v, list) else [v]
    return tuple(_int(key, x) for x in items)


def coerce(raw: dict) -> dict:
    """Validate types of raw key/value pairs and map them onto spec fields."""
    out: dict = {}
    for key, v in raw.items():
        name = _ALIASES.get(key, key)
        if name not in _FIELDS:
            raise ConfigFileError(f"{key}: unknown key")
        if name in ("n", "users"):
            out[name] = _int_list(key, v)
        elif name == "bits":
            if isinstance(v, list):
                out["patterns"] = tuple(str(x) for x in v)
                if out["patterns"]:
                    out["bits"] = len(out["patterns"][0])
            else:
                out["bits"] = _int(key, v)
        elif name == "patterns":
            if not isinstance(v, list):
                raise ConfigFileError(f"{key}: expected a list of bitstrings")
            out["patterns"] = tuple(str(x) for x in v)
        elif name in ("trials", "runs", "seed", "samples_per_chip", "stride"):
            out[name] = _int(key, v)
        elif name in ("in_phase", "allow_large"):
            if not isinstance(v, bool):
                raise ConfigFileError(f"{key}: expected true or false, got {v!r}")
            out[name] = v
        else:
            if v is not None and not isinstance(v, str):
                raise ConfigFileError(f"{key}: expected text, got {v!r}")
            out[name] = v
    return out


def read_config_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigFileError(f"cannot read config {path}: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigFileError(f"{path}: not a key/value file: {exc}") from None
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigFileError(f"{path}: expected key: value lines")
    return coerce(raw)


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentSpec:
    values = read_config_file(path)
    values.update(overrides or {})
    return build_spec(values)


def build_spec(values: dict) -> ExperimentSpec:
    try:
        return ExperimentSpec(**values)
    except TypeError as exc:
        raise ConfigFileError(str(exc)) from None


def with_overrides(spec: ExperimentSpec, **kw) -> ExperimentSpec:
    return replace(spec, **kw)
