"""Run configuration: parsing, validation, hashing, named presets.

Configs are plain key=value text with [sections] (INI) or the equivalent
JSON object; both round-trip.  The content hash ties solution files to the
configuration that produced them.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field

from .exceptions import ConfigError

TOOL_VERSION = "0.1.0"

_PI_TOKENS = {"pi": math.pi}


def parse_angle(text) -> float:
    """Accept plain floats plus 'pi', 'pi/12', '3*pi/4' style fractions."""
    if isinstance(text, (int, float)):
        return float(text)
    s = text.strip().lower().replace(" ", "")
    if not s:
        raise ConfigError("empty angle", key="angle")
    try:
        return float(s)
    except ValueError:
        pass
    sign = 1.0
    if s.startswith("-"):
        sign = -1.0
        s = s[1:]
    num, _, den = s.partition("/")
    mult = 1.0
    if "*" in num:
        factor, _, num = num.partition("*")
        try:
            mult = float(factor)
        except ValueError as exc:
            raise ConfigError(f"bad angle factor {factor!r}", key="angle") from exc
    if num != "pi":
        raise ConfigError(f"cannot parse angle {text!r}", key="angle")
    value = mult * math.pi
    if den:
        try:
            value /= float(den)
        except ValueError as exc:
            raise ConfigError(f"bad angle denominator {den!r}", key="angle") from exc
    return sign * value


@dataclass
class ProblemConfig:
    """Everything a run needs: states, requirement, grids, tolerances, seed."""

    # state family: "depolarized" (x0,x1,d0,d1), "pure" (x), "mixture" (s)
    family: str = "depolarized"
    x0: float = math.pi / 12.0
    x1: float = -math.pi / 12.0
    d0: float = 0.0
    d1: float = 0.0
    x: float = math.pi / 6.0
    s: float = 0.05
    mixture_angle0: float = 0.0
    mixture_angle1: float = math.pi / 12.0
    epsilon: float = 0.01
    q_points: int = 2001
    theta_points: int = 1801
    local_arm_points: int = 900
    collective_arm_points: int = 101
    tol: float = 1e-4
    max_iter: int = 5000
    seed: int = 20240501
    threads: int = 0  # 0: leave the backend default
    label: str = ""

    def validate(self) -> "ProblemConfig":
        if self.family not in ("depolarized", "pure", "mixture"):
            raise ConfigError(f"unknown family {self.family!r}", key="problem.family")
        for key in ("d0", "d1"):
            v = getattr(self, key)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{key} must lie in [0, 1], got {v}", key=f"problem.{key}")
        if not 0.0 <= self.s <= 0.5:
            raise ConfigError(f"s must lie in [0, 0.5], got {self.s}", key="problem.s")
        if not 0.0 <= self.epsilon < 0.5:
            raise ConfigError(
                f"epsilon must lie in [0, 0.5), got {self.epsilon}", key="problem.epsilon"
            )
        if self.family == "pure" and not 0.0 < self.x <= math.pi / 2.0:
            raise ConfigError(f"x must lie in (0, pi/2], got {self.x}", key="problem.x")
        for key, lo in (("q_points", 3), ("theta_points", 8), ("local_arm_points", 2),
                        ("collective_arm_points", 2)):
            v = getattr(self, key)
            if not isinstance(v, int) or v < lo:
                raise ConfigError(f"{key} must be an integer >= {lo}", key=f"grids.{key}")
        if self.tol <= 0:
            raise ConfigError("tol must be positive", key="solver.tol")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1", key="solver.max_iter")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0", key="solver.threads")
        return self

    def problem(self):
        from . import problems

        if self.family == "pure":
            return problems.pure_problem(self.x, self.epsilon, label=self.label)
        if self.family == "mixture":
            return problems.overlap_mixture_problem(
                self.s, self.epsilon, self.mixture_angle0, self.mixture_angle1,
                label=self.label,
            )
        return problems.depolarized_problem(
            self.x0, self.x1, self.d0, self.d1, self.epsilon, label=self.label
        )

    # -- serialization ------------------------------------------------------

    _SECTIONS = {
        "problem": ("family", "x0", "x1", "d0", "d1", "x", "s",
                    "mixture_angle0", "mixture_angle1", "epsilon", "label"),
        "grids": ("q_points", "theta_points", "local_arm_points", "collective_arm_points"),
        "solver": ("tol", "max_iter", "seed", "threads"),
    }
    _ANGLES = ("x0", "x1", "x", "mixture_angle0", "mixture_angle1")
    _INTS = ("q_points", "theta_points", "local_arm_points", "collective_arm_points",
             "max_iter", "seed", "threads")

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        for section, keys in self._SECTIONS.items():
            cp[section] = {}
            for key in keys:
                cp[section][key] = repr(getattr(self, key)) if not isinstance(
                    getattr(self, key), str
                ) else getattr(self, key)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def to_json(self) -> str:
        data = {section: {k: getattr(self, k) for k in keys}
                for section, keys in self._SECTIONS.items()}
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_mapping(cls, data: dict) -> "ProblemConfig":
        kwargs = {}
        known = {k for keys in cls._SECTIONS.values() for k in keys}
        for section, entries in data.items():
            if section not in cls._SECTIONS:
                raise ConfigError(f"unknown section [{section}]", key=section)
            if not isinstance(entries, dict):
                raise ConfigError(f"section [{section}] must hold key=value pairs", key=section)
            for key, raw in entries.items():
                if key not in known:
                    raise ConfigError(f"unknown key {key!r}", key=f"{section}.{key}")
                kwargs[key] = _coerce(cls, key, raw)
        return cls(**kwargs).validate()

    @classmethod
    def from_ini(cls, text: str) -> "ProblemConfig":
        cp = configparser.ConfigParser()
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}", key="<file>") from exc
        data = {section: dict(cp[section]) for section in cp.sections()}
        return cls.from_mapping(data)

    @classmethod
    def from_json(cls, text: str) -> "ProblemConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"cannot parse JSON config: {exc}", key="<file>") from exc
        return cls.from_mapping(data)

    @classmethod
    def load(cls, path: str) -> "ProblemConfig":
        with open(path) as fh:
            text = fh.read()
        if path.endswith(".json") or text.lstrip().startswith("{"):
            return cls.from_json(text)
        return cls.from_ini(text)

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    def table_header(self, **extra) -> str:
        fields = {
            "config_hash": self.content_hash(),
            "q_points": self.q_points,
            "theta_points": self.theta_points,
            "version": TOOL_VERSION,
        }
        fields.update(extra)
        inner = ", ".join(f"{k}={v}" for k, v in fields.items())
        return f"# {inner}"


def _coerce(cls, key, raw):
    if key in ("family", "label"):
        return str(raw)
    if key in cls._ANGLES:
        return parse_angle(raw)
    if key in cls._INTS:
        try:
            return int(str(raw))
        except ValueError as exc:
            raise ConfigError(f"key {key!r} needs an integer, got {raw!r}", key=key) from exc
    try:
        return float(str(raw))
    except ValueError as exc:
        raise ConfigError(f"key {key!r} needs a number, got {raw!r}", key=key) from exc


def preset(name: str) -> ProblemConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r} (have {sorted(PRESETS)})", key="preset")
    cfg = PRESETS[name]
    return ProblemConfig(**asdict(cfg)).validate()


PRESETS = {
    # depolarized pair at +-15 deg, moderate error budget
    "fig1": ProblemConfig(
        family="depolarized",
        x0=math.pi / 12.0,
        x1=-math.pi / 12.0,
        d0=0.01,
        d1=0.001,
        epsilon=0.01,
        q_points=2001,
        theta_points=1801,
        label="fig1",
    ),
    # cross-contaminated family for the efficiency-ratio sweep
    "fig2": ProblemConfig(
        family="mixture",
        s=0.05,
        epsilon=1e-4,
        q_points=2001,
        theta_points=1801,
        label="fig2",
    ),
    # cross-contaminated pair, tight error budget, fine prior grid
    "fig3": ProblemConfig(
        family="mixture",
        s=0.05,
        epsilon=1e-4,
        q_points=10001,
        theta_points=1801,
        label="fig3",
    ),
}
