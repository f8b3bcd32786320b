"""Experiment configuration: defaults, named presets, key=value files.

Angles are degrees at this boundary and radians everywhere else.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .marginals import OBSERVABLES
from .spin import SpinMagnitude

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "PRESETS",
    "parse_config_text",
    "load_config_file",
    "build_config",
    "ensemble_rule",
]

CANONICAL_ANGLES = (20.0, 40.0, 160.0, 130.0)


class ConfigError(ValueError):
    pass


def ensemble_rule(s: float, l: float) -> int:
    """Ensemble size keeping per-bin Monte-Carlo noise near 20% of the
    equilibrium quantum fluctuation: 25 points per product basis state."""
    return int(25 * (2 * s + 1) * (2 * l + 1))


@dataclass(frozen=True)
class ExperimentConfig:
    s: float = 20
    l: float = 22
    a: float = 5.0
    gamma: float = 2.835
    r: float | None = None
    theta_s: float = CANONICAL_ANGLES[0]
    phi_s: float = CANONICAL_ANGLES[1]
    theta_l: float = CANONICAL_ANGLES[2]
    phi_l: float = CANONICAL_ANGLES[3]
    steps: int = 50
    ensemble: int | None = None
    seed: int = 1
    observables: tuple[str, ...] = ("lz", "jz")
    snapshots: tuple[int, ...] | None = None
    window: tuple[int, int] | None = None
    sizes: tuple[int, ...] = (11, 22, 44, 88)
    uniform: bool = False
    grid: int = 200
    lyap_steps: int = 10_000
    transient: int = 100
    synthetic_exponent: float | None = None
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for name in ("s", "l"):
            v = getattr(self, name)
            if not (v > 0 and float(2 * v).is_integer()):
                raise ConfigError(f"{name} must be a positive integer or half-integer, got {v}")
        for name in ("a", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if self.gamma < 0:
            raise ConfigError("gamma must be non-negative")
        if self.r is not None and not self.r > 0:
            raise ConfigError("r must be positive")
        for name in ("theta_s", "phi_s", "theta_l", "phi_l"):
            v = getattr(self, name)
            if not 0.0 <= v < 360.0:
                raise ConfigError(f"{name} must lie in [0, 360) degrees, got {v}")
        for name in ("theta_s", "theta_l"):
            if getattr(self, name) > 180.0:
                raise ConfigError(f"{name} is a polar angle and must not exceed 180 degrees")
        if self.steps < 0:
            raise ConfigError("steps must be >= 0")
        if self.ensemble is not None and self.ensemble < 1:
            raise ConfigError("ensemble must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        bad = [o for o in self.observables if o not in OBSERVABLES]
        if bad or not self.observables:
            raise ConfigError(f"observables must be drawn from {OBSERVABLES}, got {self.observables}")
        if self.snapshots is not None and any(n < 0 for n in self.snapshots):
            raise ConfigError("snapshot steps must be >= 0")
        if self.window is not None and not 0 <= self.window[0] <= self.window[1]:
            raise ConfigError(f"window must satisfy 0 <= n1 <= n2, got {self.window}")
        if any(n <= 0 for n in self.sizes):
            raise ConfigError("sizes must be positive")
        if self.grid < 1:
            raise ConfigError("grid must be >= 1")
        if self.lyap_steps < 1000:
            raise ConfigError("lyap_steps must be >= 1000")
        if self.transient < 0:
            raise ConfigError("transient must be >= 0")

    @property
    def spin_s(self) -> SpinMagnitude:
        return SpinMagnitude.from_value(self.s)

    @property
    def spin_l(self) -> SpinMagnitude:
        return SpinMagnitude.from_value(self.l)

    @property
    def ratio(self) -> float:
        return self.r if self.r is not None else self.l / self.s

    def angles_rad(self) -> tuple[float, float, float, float]:
        return tuple(math.radians(x) for x in (self.theta_s, self.phi_s, self.theta_l, self.phi_l))

    def ensemble_size(self) -> int:
        return self.ensemble if self.ensemble is not None else ensemble_rule(self.s, self.l)

    def snapshot_steps(self) -> tuple[int, ...]:
        if self.snapshots is None:
            return (0, self.steps) if self.steps else (0,)
        return tuple(sorted({n for n in self.snapshots if n <= self.steps}))

    def items(self) -> list[tuple[str, str]]:
        """Config echo as (key, text) pairs in a fixed order."""
        out = []
        for f in fields(self):
            if f.name == "warnings":
                continue
            v = getattr(self, f.name)
            if f.name == "window" and v is not None:
                out.append((f.name, f"{v[0]}:{v[1]}"))
            else:
                out.append((f.name, format_value(v)))
        return out

    def with_sizes(self, s: float, l: float) -> "ExperimentConfig":
        return replace(self, s=s, l=l)


PRESETS: dict[str, dict[str, object]] = {
    "ci": {"s": 20, "l": 22},
    "paper": {"s": 140, "l": 154},
}


def format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(format_value(x) for x in v)
    return str(v)


def _spin(text: str) -> float:
    t = text.strip()
    if "/" in t:
        num, den = t.split("/")
        v = int(num) / int(den)
    else:
        v = float(t)
    return int(v) if float(v).is_integer() else v


def _opt(conv):
    def parse(text: str):
        return None if text.strip().lower() in ("", "none") else conv(text)
    return parse


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _window(text: str) -> tuple[int, int]:
    sep = ":" if ":" in text else ","
    parts = text.split(sep)
    if len(parts) != 2:
        raise ValueError(f"window must look like n1:n2, got {text!r}")
    return int(parts[0]), int(parts[1])


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _observables(text: str) -> tuple[str, ...]:
    return tuple(x.strip().lower() for x in text.split(",") if x.strip())


PARSERS = {
    "s": _spin,
    "l": _spin,
    "a": float,
    "gamma": float,
    "r": _opt(float),
    "theta_s": float,
    "phi_s": float,
    "theta_l": float,
    "phi_l": float,
    "steps": int,
    "ensemble": _opt(int),
    "seed": int,
    "observables": _observables,
    "observable": _observables,
    "snapshots": _opt(_int_list),
    "window": _opt(_window),
    "sizes": _int_list,
    "uniform": _bool,
    "grid": int,
    "lyap_steps": int,
    "transient": int,
    "synthetic_exponent": _opt(float),
    "preset": str,
}


def _normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_").lower()


def parse_values(raw: dict[str, str]) -> dict[str, object]:
    out = {}
    for key, text in raw.items():
        k = _normalize_key(key)
        if k not in PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            v = PARSERS[k](text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
        out["observables" if k == "observable" else k] = v
    return out


def parse_config_text(text: str) -> dict[str, object]:
    """Flat key=value lines; '#' starts a comment."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        raw[key.strip()] = value.strip()
    return parse_values(raw)


def load_config_file(path: str | Path) -> dict[str, object]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


def build_config(
    preset: str | None = None,
    file_values: dict[str, object] | None = None,
    overrides: dict[str, object] | None = None,
) -> ExperimentConfig:
    """Defaults, then preset, then file values, then explicit overrides."""
    values: dict[str, object] = {}
    file_values = dict(file_values or {})
    preset = file_values.pop("preset", None) if preset is None else preset
    file_values.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        values.update(PRESETS[preset])
    values.update(file_values)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    warnings = []
    r = values.get("r")
    if r is not None and "s" not in values:
        values["s"] = max(1, round(values.get("l", ExperimentConfig.l) / r))
    try:
        cfg = ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.r is not None and abs(cfg.l / cfg.s - cfg.r) > 0.05 * cfg.r:
        warnings.append(f"l/s = {cfg.l / cfg.s:.4g} differs from r = {cfg.r:.4g} by more than 5%")
    return replace(cfg, warnings=tuple(warnings))


def config_dict(cfg: ExperimentConfig) -> dict[str, object]:
    d = asdict(cfg)
    d.pop("warnings")
    return d
