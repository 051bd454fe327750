"""Run configuration: a YAML (or JSON) document validated against a versioned schema.

Times in sweep grids carry an ``_ms`` suffix, rates ``_hz``; rule time
constants are in seconds like the library. Unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .experiments import DEFAULT_DT_GRID, DEFAULT_RHO_GRID, DEFAULT_RHO_POST_GRID, DEFAULT_T_GRID
from .fitting import MASKS
from .presets import PRESETS
from .rules import BIAS_ALIASES, PARAM_NAMES, PairParams, SuppressionParams, TripletParams

SCHEMA_VERSION = 1
_PAIR_NAMES = {"a_plus": "a2_plus", "a_minus": "a2_minus"}


class ConfigError(ValueError):
    pass


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _ms_list(grid):
    return [round(float(x) * 1000.0, 9) for x in grid]


class RuleConfig(_Section):
    kind: Literal["triplet", "pair", "suppressive"] = "triplet"
    preset: Optional[str] = "hippocampal-style"
    params: Dict[str, float] = Field(default_factory=dict)
    tau_s: Optional[float] = None

    @field_validator("preset")
    @classmethod
    def _known_preset(cls, value):
        if value is not None and value not in PRESETS:
            raise ValueError(f"unknown preset {value!r}; choose from {sorted(PRESETS)}")
        return value

    @field_validator("params")
    @classmethod
    def _known_params(cls, value):
        allowed = set(PARAM_NAMES) | set(BIAS_ALIASES) | {"a_plus", "a_minus"}
        seen = {}
        for key in value:
            if key not in allowed:
                raise ValueError(f"unknown parameter {key!r}")
            name = _PAIR_NAMES.get(key, BIAS_ALIASES.get(key, key))
            if name in seen:
                raise ValueError(f"{key!r} and {seen[name]!r} set the same parameter")
            seen[name] = key
        return value

    def triplet(self):
        base = PRESETS[self.preset].as_dict() if self.preset else {}
        merged = dict(base)
        for key, value in self.params.items():
            merged[BIAS_ALIASES.get(key, key)] = value
        if "a_plus" in merged or "a_minus" in merged:
            raise ConfigError("rule.params: a_plus/a_minus belong to the pair rule")
        try:
            return TripletParams.from_mapping(merged)
        except (KeyError, ValueError) as err:
            raise ConfigError(f"rule.params: {err}") from None

    def build(self):
        """The parameter object selecting the rule."""
        if self.kind == "triplet":
            return self.triplet()
        values = {BIAS_ALIASES.get(k, k): v for k, v in self.params.items()}
        if self.preset:
            pair = PRESETS[self.preset].pair()
            defaults = dict(a_plus=pair.a_plus, a_minus=pair.a_minus,
                            tau_plus=pair.tau_plus, tau_minus=pair.tau_minus)
        else:
            defaults = {}
        merged = {**defaults}
        merged["a_plus"] = values.pop("a_plus", values.pop("a2_plus", merged.get("a_plus")))
        merged["a_minus"] = values.pop("a_minus", values.pop("a2_minus", merged.get("a_minus")))
        for key in ("tau_plus", "tau_minus"):
            merged[key] = values.pop(key, merged.get(key))
        if values:
            raise ConfigError(f"rule.params: {sorted(values)} not used by the {self.kind} rule")
        missing = [k for k, v in merged.items() if v is None]
        if missing:
            raise ConfigError(f"rule.params: missing {missing}")
        try:
            pair = PairParams(**merged)
            if self.kind == "pair":
                return pair
            if self.tau_s is None:
                raise ConfigError("rule.tau_s is required for the suppressive rule")
            return SuppressionParams(pair, self.tau_s)
        except ValueError as err:
            raise ConfigError(f"rule: {err}") from None


class WindowConfig(_Section):
    dt_ms: List[float] = Field(default_factory=lambda: _ms_list(DEFAULT_DT_GRID))
    rho_hz: float = 1.0
    n_pairs: int = 60


class FreqConfig(_Section):
    dt_ms: List[float] = Field(default_factory=lambda: [10.0, -10.0])
    rho_hz: List[float] = Field(default_factory=lambda: [float(r) for r in DEFAULT_RHO_GRID])
    n_pairs: int = 60


class TripletConfig(_Section):
    timings_ms: Dict[Literal["pre-post-pre", "post-pre-post"], List[Tuple[float, float]]] = Field(
        default_factory=lambda: {
            "pre-post-pre": [(5, -5), (10, -10), (15, -5), (5, -15)],
            "post-pre-post": [(-5, 5), (-10, 10), (-5, 15), (-15, 5)],
        }
    )
    rho_hz: float = 1.0
    n: int = 60


class QuadConfig(_Section):
    dt_ms: float = 5.0
    T_ms: List[float] = Field(default_factory=lambda: _ms_list(DEFAULT_T_GRID))
    rho_hz: float = 1.0
    n: int = 60


class SixConfig(_Section):
    gaps_ms: List[Tuple[float, float]] = Field(
        default_factory=lambda: [(a, b) for a in (5, 10, 20, 40) for b in (5, 10, 20, 40)]
    )
    rho_hz: float = 0.2
    n: int = 60


class BcmConfig(_Section):
    mode: Literal["postsynaptic", "presynaptic"] = "postsynaptic"
    rho_pre_hz: float = 10.0
    rho_post_hz: List[float] = Field(
        default_factory=lambda: [float(r) for r in DEFAULT_RHO_POST_GRID]
    )
    a3_plus: Optional[List[float]] = None
    duration_s: float = 100.0
    trials: int = 10


class FitConfig(_Section):
    mask: Union[Literal["visual-cortex", "hippocampal", "full"], List[str]] = "hippocampal"
    n_starts: int = 1
    max_iter: int = 2000
    tol_x: float = 1e-6
    tol_f: float = 1e-6
    restarts: int = 2

    @field_validator("mask")
    @classmethod
    def _known_names(cls, value):
        if isinstance(value, list):
            for name in value:
                if BIAS_ALIASES.get(name, name) not in PARAM_NAMES:
                    raise ValueError(f"unknown parameter {name!r}")
        return value

    def frozen(self):
        if isinstance(self.mask, str):
            return MASKS[self.mask]
        return frozenset(BIAS_ALIASES.get(n, n) for n in self.mask)


class McConfig(_Section):
    sigma_v: float = 0.030
    v_scale: float = 0.032
    n_runs: int = 1000
    retune: bool = False
    fit_baseline: bool = False


class RunConfig(_Section):
    version: Literal[1] = SCHEMA_VERSION
    seed: int = 0
    out: Optional[str] = None
    rule: RuleConfig = Field(default_factory=RuleConfig)
    window: WindowConfig = Field(default_factory=WindowConfig)
    freq: FreqConfig = Field(default_factory=FreqConfig)
    triplet: TripletConfig = Field(default_factory=TripletConfig)
    quad: QuadConfig = Field(default_factory=QuadConfig)
    six: SixConfig = Field(default_factory=SixConfig)
    bcm: BcmConfig = Field(default_factory=BcmConfig)
    fit: FitConfig = Field(default_factory=FitConfig)
    mc: McConfig = Field(default_factory=McConfig)

    def digest(self):
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()


def _describe(err):
    first = err.errors()[0]
    where = ".".join(str(p) for p in first["loc"]) or "<root>"
    if first["type"] == "extra_forbidden":
        return f"unknown key {where!r}"
    return f"{where}: {first['msg']}"


def load_config(source=None):
    """Parse and validate a config file path, mapping, or ``None`` for defaults."""
    if source is None:
        data = {}
    elif isinstance(source, dict):
        data = source
    else:
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as err:
            raise ConfigError(f"{path}: not valid YAML/JSON: {err}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping at the top level")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_describe(err)) from None
