"""
config.py – run configuration for the robinlab command line.

A run config is a plain KEY=value file read with python-dotenv:

    # configs/interval_sweep.env
    DOMAIN=interval:-1,1
    BETA=1
    P_LIST=2,4,8,16,32,64

Keys are case-insensitive.  Command-line flags override file values, and an
unknown key is rejected before anything is computed.

Recognised keys
---------------
DOMAIN               interval:a,b | ball:n,R | shell:n,r,R | rectangle:w,h
P, P_LIST            exponent / comma-separated increasing exponents
BETA, BETA_LIST      Robin parameter / comma-separated increasing values
RESOLUTION           grid cells per axis                      (default: 128)
SOLVER               radial | variational | both              (default: radial)
TOLERANCE            variational gradient tolerance           (default: 1e-8)
MAX_ITERS            variational iteration cap                (default: 20000)
STEPS                radial RK4 steps                         (default: max(2000, 100p))
LIMIT_TOLERANCE      relative error allowed on the p-limit    (default: 0.1)
EXPANSION_TOLERANCE  allowed deviation of the curvature term  (default: 0.15)
DIMENSION            shell/ball comparison dimension          (default: 2)
VOLUME               shell/ball comparison volume             (default: π)
INNER_RADIUS         shell inner radius for the comparison    (default: 1)
FIELD                exact | constant | path to a field CSV   (default: exact)
EPS_LIST             barrier eps values                       (default: 0.2,0.1,0.05)
OUTPUT_DIR           artifact directory                       (default: results)
EXPORT_GRID          write grid.csv next to a solve           (default: false)
"""

from __future__ import annotations

import math
import os
import dataclasses
from dataclasses import asdict, dataclass, replace
from typing import Any, Callable, Mapping

from dotenv import dotenv_values

from robinlab.errors import ConfigError, RobinLabError
from robinlab.geometry import RADIAL_DOMAINS, Ball, Domain, Interval, Rectangle, Shell

__all__ = ["COMMANDS", "RunConfig", "parse_domain", "format_domain", "load_run_config"]

COMMANDS = ("solve", "sweep", "expand", "compare", "check", "bracket")
SOLVERS = ("radial", "variational", "both")


# ---------------------------------------------------------------------------
# Value parsers
# ---------------------------------------------------------------------------

def _float(key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: expected a finite number, got {raw!r}")
    return value


def _int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _float_list(key: str, raw: str) -> tuple[float, ...]:
    parts = [part.strip() for part in raw.split(",") if part.strip()]
    return tuple(_float(key, part) for part in parts)


def _bool(key: str, raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"{key}: expected true/false, got {raw!r}")


def _choice(options: tuple[str, ...]) -> Callable[[str, str], str]:
    def parse(key: str, raw: str) -> str:
        value = raw.strip().lower()
        if value not in options:
            raise ConfigError(f"{key}: expected one of {', '.join(options)}, got {raw!r}")
        return value

    return parse


def _text(key: str, raw: str) -> str:
    value = raw.strip()
    if not value:
        raise ConfigError(f"{key}: empty value")
    return value


def parse_domain(raw: str) -> Domain:
    """``interval:-1,1`` → Interval(-1.0, 1.0), and so on."""
    kind, sep, params = raw.strip().partition(":")
    kind = kind.strip().lower()
    if not sep:
        raise ConfigError(f"domain: expected kind:params, got {raw!r}")
    values = _float_list("domain", params)
    arity = {"interval": 2, "ball": 2, "shell": 3, "rectangle": 2}
    if kind not in arity:
        raise ConfigError(f"domain: unknown kind {kind!r}")
    if len(values) != arity[kind]:
        raise ConfigError(f"domain: {kind} takes {arity[kind]} parameters, got {len(values)}")
    try:
        if kind == "interval":
            return Interval(*values)
        if kind == "rectangle":
            return Rectangle(*values)
        n = values[0]
        if n != int(n):
            raise ConfigError(f"domain: dimension must be an integer, got {n}")
        if kind == "ball":
            return Ball(int(n), values[1])
        return Shell(int(n), values[1], values[2])
    except ConfigError:
        raise
    except RobinLabError as exc:
        raise ConfigError(f"domain: {exc}") from exc


def format_domain(domain: Domain) -> str:
    if isinstance(domain, Interval):
        params = (domain.a, domain.b)
    elif isinstance(domain, Ball):
        params = (domain.n, domain.R)
    elif isinstance(domain, Shell):
        params = (domain.n, domain.r, domain.R)
    else:
        params = (domain.w, domain.h)
    return f"{domain.kind}:" + ",".join(repr(v) for v in params)


_PARSERS: dict[str, Callable[[str, str], Any]] = {
    "domain": lambda key, raw: parse_domain(raw),
    "p": _float,
    "p_list": _float_list,
    "beta": _float,
    "beta_list": _float_list,
    "resolution": _int,
    "solver": _choice(SOLVERS),
    "tolerance": _float,
    "max_iters": _int,
    "steps": _int,
    "limit_tolerance": _float,
    "expansion_tolerance": _float,
    "dimension": _int,
    "volume": _float,
    "inner_radius": _float,
    "field": _text,
    "eps_list": _float_list,
    "output_dir": _text,
    "export_grid": _bool,
}

KNOWN_KEYS = frozenset(_PARSERS)


# ---------------------------------------------------------------------------
# RunConfig
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    command: str
    domain: Domain | None = None
    p: float | None = None
    p_list: tuple[float, ...] = ()
    beta: float | None = None
    beta_list: tuple[float, ...] = ()
    resolution: int = 128
    solver: str = "radial"
    tolerance: float = 1e-8
    max_iters: int = 20000
    steps: int | None = None
    limit_tolerance: float = 0.1
    expansion_tolerance: float = 0.15
    dimension: int = 2
    volume: float = math.pi
    inner_radius: float = 1.0
    field: str = "exact"
    eps_list: tuple[float, ...] = (0.2, 0.1, 0.05)
    output_dir: str = "results"
    export_grid: bool = False
    sources: dict[str, str] = dataclasses.field(default_factory=dict, compare=False, repr=False)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data.pop("sources")
        data["domain"] = format_domain(self.domain) if self.domain is not None else None
        data["p_list"] = list(self.p_list)
        data["beta_list"] = list(self.beta_list)
        data["eps_list"] = list(self.eps_list)
        return data

    def validate(self) -> "RunConfig":
        """Check that everything the command needs is present and sane."""
        required = {
            "solve": ("domain", "p", "beta"),
            "sweep": ("domain", "beta", "p_list"),
            "expand": ("domain", "p", "beta_list"),
            "compare": ("p", "beta"),
            "check": ("domain", "beta"),
            "bracket": ("domain", "beta"),
        }[self.command]
        for key in required:
            value = getattr(self, key)
            if value is None or value == ():
                raise ConfigError(f"{self.command} needs {key.upper()}")

        if self.p is not None and not self.p > 1.0:
            raise ConfigError(f"p must be > 1, got {self.p}")
        if self.beta is not None and not self.beta > 0.0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        _check_increasing("p_list", self.p_list, lower=1.0)
        _check_increasing("beta_list", self.beta_list, lower=0.0)
        if any(e <= 0.0 for e in self.eps_list):
            raise ConfigError(f"eps_list must hold positive values, got {list(self.eps_list)}")
        if self.resolution < 4:
            raise ConfigError(f"resolution must be ≥ 4, got {self.resolution}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be ≥ 1, got {self.max_iters}")
        if self.steps is not None and self.steps < 10:
            raise ConfigError(f"steps must be ≥ 10, got {self.steps}")
        if self.tolerance < 0.0 or self.limit_tolerance <= 0.0 or self.expansion_tolerance <= 0.0:
            raise ConfigError("tolerances must be positive")

        radial_only = self.command == "expand" or (self.command in ("solve", "sweep") and self.solver != "variational")
        if radial_only and self.domain is not None and not isinstance(self.domain, RADIAL_DOMAINS):
            raise ConfigError(f"the radial solver does not handle {self.domain.kind} domains")
        if self.command == "expand" and not isinstance(self.domain, (Ball, Shell)):
            raise ConfigError("expand needs a ball or shell domain")
        if self.command == "sweep" and self.solver == "both":
            raise ConfigError("sweep runs one solver at a time")
        if self.command == "compare":
            if self.dimension < 2:
                raise ConfigError(f"dimension must be ≥ 2, got {self.dimension}")
            if not (self.volume > 0.0 and self.inner_radius > 0.0):
                raise ConfigError("volume and inner_radius must be positive")
        return self


def _check_increasing(key: str, values: tuple[float, ...], lower: float) -> None:
    if any(v <= lower for v in values):
        raise ConfigError(f"{key}: every entry must be > {lower:g}, got {list(values)}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(f"{key}: entries must be strictly increasing, got {list(values)}")


def _normalise(raw: Mapping[str, str | None], origin: str) -> dict[str, tuple[str, str]]:
    out = {}
    for key, value in raw.items():
        name = key.strip().lower().replace("-", "_")
        if name not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key {key!r} ({origin})")
        if value is None:
            raise ConfigError(f"config key {key!r} has no value ({origin})")
        out[name] = (value, origin)
    return out


def load_run_config(
    command: str,
    path: str | None = None,
    overrides: Mapping[str, str | None] | None = None,
) -> RunConfig:
    """
    Resolve a RunConfig from an optional KEY=value file plus flag overrides.
    Flags win.  Raises ConfigError for unknown keys and malformed values.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    merged: dict[str, tuple[str, str]] = {}
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        merged.update(_normalise(dotenv_values(path), path))
    if overrides:
        merged.update(_normalise({k: v for k, v in overrides.items() if v is not None}, "flag"))

    values = {key: _PARSERS[key](key, raw) for key, (raw, _) in merged.items()}
    sources = {key: origin for key, (_, origin) in merged.items()}
    return replace(RunConfig(command), **values, sources=sources).validate()
