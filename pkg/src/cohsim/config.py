"""Strict JSON scenario configuration.

Angles are given in degrees; delays (``tau`` keys) in units of ``1/sigma``.
Unknown keys are errors at every nesting level.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import ConfigError
from .optics import OpticsParams

SCENARIOS = ("fields", "eraser", "hom_classical", "hom_heterodyne", "corrmap", "chsh", "montecarlo")
CANONICAL_CHSH_DEG = [0.0, 45.0, -22.5, -67.5]

# per-scenario default number of delay points
DEFAULT_TAU_POINTS = {"montecarlo": 13, "hom_classical": 241, "hom_heterodyne": 241}


@dataclass
class OpticsConfig:
    xi_deg: float = 45.0
    theta_deg: float = 45.0
    phi_deg: float = 0.0
    tau: float = 0.0
    delta_f: float = 0.0

    def to_params(self, sigma: float) -> OpticsParams:
        return OpticsParams(
            xi=math.radians(self.xi_deg),
            theta=math.radians(self.theta_deg),
            phi=math.radians(self.phi_deg),
            tau=self.tau / sigma,
            delta_f=self.delta_f,
        )


@dataclass
class EnsembleConfig:
    a: float = 1.0
    b: float = 0.0
    c: float = 5.0
    span_sigmas: float = 4.0
    n_points: int = 161

    def validate(self):
        if self.c <= 0:
            raise ConfigError("ensemble.c must be > 0")
        if self.a == 0:
            raise ConfigError("ensemble.a must be nonzero")
        if self.span_sigmas <= 0:
            raise ConfigError("ensemble.span_sigmas must be > 0")
        if self.n_points < 3:
            raise ConfigError("ensemble.n_points must be >= 3")
        if self.n_points % 2 == 0:
            raise ConfigError("n_points must be odd")


@dataclass
class ScanConfig:
    tau_start: float = 0.0
    tau_stop: float = 6.0
    tau_points: Optional[int] = None
    phi_points: int = 73
    angle_step_deg: float = 5.0
    draws: int = 1000
    slice_taus: list = field(default_factory=lambda: [0.0, 2.0, 4.0, 6.0])

    def validate(self):
        if self.tau_points is not None and self.tau_points < 1:
            raise ConfigError("scan.tau_points must be >= 1")
        if self.tau_stop < self.tau_start:
            raise ConfigError("scan.tau_stop must be >= scan.tau_start")
        if self.phi_points < 2:
            raise ConfigError("scan.phi_points must be >= 2")
        if not 0 < self.angle_step_deg <= 180:
            raise ConfigError("scan.angle_step_deg must lie in (0, 180]")
        if self.draws < 1:
            raise ConfigError("scan.draws must be >= 1")


@dataclass
class SourceSection:
    singles_rate: float = 1.0
    pair_fraction: float = 0.01
    duration: float = 1.0e5
    window: float = 1.0e-3
    workers: int = 1
    mean_photon_number: Optional[float] = None
    laser_linewidth: Optional[float] = None

    def validate(self):
        if self.singles_rate <= 0:
            raise ConfigError("source.singles_rate must be > 0")
        if not 0 <= self.pair_fraction <= 1:
            raise ConfigError("source.pair_fraction must lie in [0, 1]")
        if self.duration < 0:
            raise ConfigError("source.duration must be >= 0")
        if self.window <= 0:
            raise ConfigError("source.window must be > 0")
        if self.workers < 1:
            raise ConfigError("source.workers must be >= 1")
        if self.mean_photon_number is not None and not 0 < self.mean_photon_number < 1:
            raise ConfigError("source.mean_photon_number must satisfy 0 < <n> < 1")
        if self.laser_linewidth is not None and self.laser_linewidth <= 0:
            raise ConfigError("source.laser_linewidth must be > 0")


@dataclass
class OutputConfig:
    path: str = "out"
    format: str = "csv"

    def validate(self):
        if self.format not in ("csv", "json"):
            raise ConfigError("output.format must be 'csv' or 'json'")


@dataclass
class ScenarioConfig:
    scenario: str
    seed: int = 0
    optics: OpticsConfig = field(default_factory=OpticsConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    source: Optional[SourceSection] = None
    angles_deg: Optional[list] = None
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def sigma(self) -> float:
        return self.ensemble.c / abs(self.ensemble.a)

    def validate(self) -> "ScenarioConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {', '.join(SCENARIOS)}; got {self.scenario!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.source is not None and self.scenario != "montecarlo":
            raise ConfigError("source: only valid for the montecarlo scenario")
        if self.angles_deg is not None:
            if self.scenario != "chsh":
                raise ConfigError("angles_deg: only valid for the chsh scenario")
            if len(self.angles_deg) != 4 or not all(_is_number(a) for a in self.angles_deg):
                raise ConfigError("angles_deg must be four numbers [a, a', b, b']")
            self.angles_deg = [float(a) for a in self.angles_deg]
        for part in (self.ensemble, self.scan, self.output):
            part.validate()
        if self.source is not None:
            self.source.validate()
        for name in ("xi_deg", "theta_deg", "phi_deg", "tau", "delta_f"):
            if not math.isfinite(getattr(self.optics, name)):
                raise ConfigError(f"optics.{name} must be finite")
        return self

    def resolved(self) -> "ScenarioConfig":
        """Copy with every scenario-dependent default made explicit."""
        cfg = dataclasses.replace(
            self,
            optics=dataclasses.replace(self.optics),
            ensemble=dataclasses.replace(self.ensemble),
            scan=dataclasses.replace(self.scan, slice_taus=list(self.scan.slice_taus)),
            output=dataclasses.replace(self.output),
        )
        if cfg.scan.tau_points is None:
            cfg.scan.tau_points = DEFAULT_TAU_POINTS.get(cfg.scenario, 241)
        if cfg.scenario == "montecarlo" and cfg.source is None:
            cfg.source = SourceSection()
        elif cfg.source is not None:
            cfg.source = dataclasses.replace(cfg.source)
        if cfg.scenario == "chsh" and cfg.angles_deg is None:
            cfg.angles_deg = list(CANONICAL_CHSH_DEG)
        return cfg.validate()


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _coerce(name: str, value: Any, default: Any, type_hint: str):
    if value is None:
        if "Optional" in type_hint or default is None:
            return None
        raise ConfigError(f"{name}: null not allowed")
    if "list" in type_hint:
        if not isinstance(value, list) or not all(_is_number(v) for v in value):
            raise ConfigError(f"{name}: expected a list of numbers")
        return [float(v) for v in value]
    if "int" in type_hint and "float" not in type_hint:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return value
    if "float" in type_hint:
        if not _is_number(value):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{name}: must be finite")
        return float(value)
    if "str" in type_hint:
        if not isinstance(value, str):
            raise ConfigError(f"{name}: expected a string, got {value!r}")
        return value
    return value


def _build(cls, data: Any, prefix: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix or 'config'}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        where = f"{prefix}." if prefix else ""
        raise ConfigError(f"unknown key '{where}{unknown[0]}'")
    kwargs = {}
    for key, value in data.items():
        f = fields[key]
        name = f"{prefix}.{key}" if prefix else key
        sub = _SECTIONS.get(key) if not prefix else None
        if sub is not None:
            kwargs[key] = _build(sub, value, key)
        elif key == "angles_deg":
            if not isinstance(value, list):
                raise ConfigError("angles_deg must be four numbers [a, a', b, b']")
            kwargs[key] = value
        else:
            default = f.default if f.default is not dataclasses.MISSING else None
            kwargs[key] = _coerce(name, value, default, str(f.type))
    return cls(**kwargs)


_SECTIONS = {
    "optics": OpticsConfig,
    "ensemble": EnsembleConfig,
    "scan": ScanConfig,
    "source": SourceSection,
    "output": OutputConfig,
}


def parse_config(text: str | dict) -> ScenarioConfig:
    """Parse and validate a JSON scenario document; defaults are filled in."""
    if isinstance(text, dict):
        data = text
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config: expected a JSON object")
    if "scenario" not in data:
        raise ConfigError("missing required key 'scenario'")
    return _build(ScenarioConfig, data, "").resolved()


def config_to_dict(cfg: ScenarioConfig) -> dict:
    out = dataclasses.asdict(cfg)
    return {k: v for k, v in out.items() if v is not None}


def dump_config(cfg: ScenarioConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)
