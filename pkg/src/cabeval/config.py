"""Experiment configuration: file schema, validation, and policy construction.

Config files are INI-style: one ``[experiment]`` section plus optional
``[policy.<NAME>]`` sections. Unknown sections or keys are rejected so
typos fail loudly. Absent keys fall back to the simulation-study defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .policies import (
    EpsilonFirstPolicy,
    LockInFeedbackPolicy,
    Policy,
    ThompsonQuadraticPolicy,
    UniformRandomPolicy,
)
from .rewards import ActionRange


class ConfigError(ValueError):
    """Raised for schema or value violations in an experiment config."""


MODES = ("online", "offline", "ingest")
FAMILIES = ("parabola", "bimodal")
POLICY_KINDS = ("UR", "EF", "TBL", "LiF")

# Exploration length for the epsilon-first policy depends on the setting:
# long for simulation studies, short for field-style ingest runs.
EF_EXPLORE_DEFAULT = {"online": 2000, "offline": 2000, "ingest": 100}

_EXPERIMENT_KEYS = {
    "mode", "family", "stream", "repetitions", "horizon", "deltas",
    "master_seed", "t_eval", "noise_var", "range_lo", "range_hi", "out",
    "policies", "realized_regret",
}
_POLICY_KEYS = {
    "UR": set(),
    "EF": {"explore_steps"},
    "TBL": {"sigma2", "clamp_vertex", "j0", "p0_diag"},
    "LiF": {"a0", "amplitude", "window", "gamma", "omega"},
}


@dataclass(frozen=True)
class PolicySpec:
    name: str
    kind: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    repetitions: int
    horizon: int
    master_seed: int
    out_dir: str
    family: str | None = None
    stream_path: str | None = None
    deltas: tuple[float, ...] = ()
    t_eval: int = 1750
    noise_var: float = 0.01
    action_range: ActionRange = ActionRange(0.0, 1.0)
    policies: tuple[PolicySpec, ...] = ()
    realized_regret: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if self.mode in ("online", "offline") and self.horizon < 1:
            raise ConfigError("horizon must be at least 1")
        if self.mode in ("offline", "ingest") and not self.deltas:
            raise ConfigError(f"{self.mode} mode requires a non-empty deltas list")
        for d in self.deltas:
            if d <= 0:
                raise ConfigError(f"deltas must be positive, got {d}")
        if self.mode in ("online", "offline") and self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.mode == "ingest" and not self.stream_path:
            raise ConfigError("ingest mode requires a stream path")
        if self.t_eval < 1:
            raise ConfigError("t_eval must be positive")
        if self.noise_var < 0:
            raise ConfigError("noise_var must be non-negative")
        if not self.policies:
            raise ConfigError("at least one policy is required")


def default_policy_specs() -> tuple[PolicySpec, ...]:
    return tuple(PolicySpec(kind, kind) for kind in POLICY_KINDS)


def _parse_bool(raw: str, key: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _get(section, key: str, cast, default):
    if key not in section:
        return default
    raw = section[key]
    try:
        return cast(raw)
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None


def parse_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    sections = set(parser.sections())
    if "experiment" not in sections:
        raise ConfigError("missing [experiment] section")

    exp = parser["experiment"]
    unknown = set(exp.keys()) - _EXPERIMENT_KEYS
    if unknown:
        raise ConfigError(f"unknown experiment key(s): {sorted(unknown)}")

    mode = _get(exp, "mode", str, "online").strip()
    lo = _get(exp, "range_lo", float, 0.0)
    hi = _get(exp, "range_hi", float, 1.0)
    try:
        action_range = ActionRange(lo, hi)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    deltas_raw = _get(exp, "deltas", str, "")
    deltas = tuple(float(x) for x in deltas_raw.split(",") if x.strip()) if deltas_raw else ()

    policy_names = [
        name.strip()
        for name in _get(exp, "policies", str, ",".join(POLICY_KINDS)).split(",")
        if name.strip()
    ]

    specs = []
    seen_sections = {"experiment"}
    for name in policy_names:
        section_name = f"policy.{name}"
        params: dict = {}
        kind = name
        if section_name in sections:
            seen_sections.add(section_name)
            section = parser[section_name]
            kind = section.get("kind", name).strip()
            allowed = _POLICY_KEYS.get(kind)
            if allowed is None:
                raise ConfigError(f"{section_name}: unknown policy kind {kind!r}")
            unknown = set(section.keys()) - allowed - {"kind"}
            if unknown:
                raise ConfigError(f"{section_name}: unknown key(s) {sorted(unknown)}")
            for key in section:
                if key == "kind":
                    continue
                params[key] = section[key]
        if kind not in POLICY_KINDS:
            raise ConfigError(f"policy {name!r}: unknown kind {kind!r}")
        specs.append(PolicySpec(name=name, kind=kind, params=params))

    stray = sections - seen_sections
    if stray:
        raise ConfigError(f"unknown section(s): {sorted(stray)}")

    return ExperimentConfig(
        mode=mode,
        repetitions=_get(exp, "repetitions", int, 100),
        horizon=_get(exp, "horizon", int, 10_000),
        master_seed=_get(exp, "master_seed", int, 0),
        out_dir=_get(exp, "out", str, "results"),
        family=_get(exp, "family", str, None),
        stream_path=_get(exp, "stream", str, None),
        deltas=deltas,
        t_eval=_get(exp, "t_eval", int, 1750),
        noise_var=_get(exp, "noise_var", float, 0.01),
        action_range=action_range,
        policies=tuple(specs),
        realized_regret=_get(
            exp, "realized_regret", lambda raw: _parse_bool(raw, "realized_regret"), False
        ),
    )


def make_policy(
    spec: PolicySpec,
    action_range: ActionRange,
    mode: str,
    init_rng: np.random.Generator,
) -> Policy:
    """Instantiate a policy from its spec, applying per-mode defaults.

    ``init_rng`` supplies construction-time randomness (the lock-in
    policy's starting center when none is configured).
    """
    p = spec.params
    if spec.kind == "UR":
        return UniformRandomPolicy(action_range)
    if spec.kind == "EF":
        n = int(p.get("explore_steps", EF_EXPLORE_DEFAULT[mode]))
        return EpsilonFirstPolicy(action_range, explore_steps=n)
    if spec.kind == "TBL":
        J = (
            [float(x) for x in p["j0"].split(",")]
            if "j0" in p
            else None
        )
        P = (
            np.diag([float(x) for x in p["p0_diag"].split(",")])
            if "p0_diag" in p
            else None
        )
        clamp = p.get("clamp_vertex", "true")
        if isinstance(clamp, str):
            clamp = _parse_bool(clamp, "clamp_vertex")
        return ThompsonQuadraticPolicy(
            action_range,
            J=J,
            P=P,
            sigma2=float(p.get("sigma2", 1.0)),
            clamp_vertex=clamp,
        )
    if spec.kind == "LiF":
        a0 = (
            float(p["a0"])
            if "a0" in p
            else float(init_rng.uniform(action_range.lo, action_range.hi))
        )
        return LockInFeedbackPolicy(
            action_range,
            a0=a0,
            amplitude=float(p.get("amplitude", 0.05)),
            window=int(p.get("window", 50)),
            gamma=float(p.get("gamma", 0.1)),
            omega=float(p.get("omega", 1.0)),
        )
    raise ConfigError(f"unknown policy kind {spec.kind!r}")
