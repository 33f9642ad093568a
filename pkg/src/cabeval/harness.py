"""Experiment runner: online simulations, offline delta sweeps, field ingest.

Seed derivation is hierarchical so any single run is reproducible in
isolation and adding a policy or a delta never perturbs the randomness of
the others: every generator is seeded from
``SeedSequence(master_seed, spawn_key=(repetition, role, policy_key, delta_key))``
where ``role`` distinguishes model / stream / policy-init / proposal /
reward draws, ``policy_key`` is a CRC32 of the policy name, and
``delta_key`` encodes the tolerance in nano-units.
"""

from __future__ import annotations

import csv
import json
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig, make_policy
from .metrics import RankTable, RunAggregate, aggregate_runs, cumulative_regret, rank_at
from .replay import (
    LoggedStream,
    ReplayConfig,
    Trace,
    acceptance_probability,
    generate_logged_stream,
    load_stream,
    replay_cab,
)
from .rewards import RewardModel, make_model

ROLE_MODEL = 0
ROLE_STREAM = 1
ROLE_POLICY_INIT = 2
ROLE_PROPOSAL = 3
ROLE_REWARD = 4


def derive_rng(
    master_seed: int,
    repetition: int,
    role: int,
    policy_name: str = "",
    delta: float = 0.0,
) -> np.random.Generator:
    policy_key = zlib.crc32(policy_name.encode()) if policy_name else 0
    delta_key = int(round(delta * 1e9))
    seq = np.random.SeedSequence(
        master_seed, spawn_key=(repetition, role, policy_key, delta_key)
    )
    return np.random.default_rng(seq)


def simulate_online(
    policy, model: RewardModel, horizon: int, proposal_rng, reward_rng
) -> Trace:
    """Run a policy directly against the model for ``horizon`` interactions."""
    trace = Trace()
    propose = policy.propose
    update = policy.update
    sample = model.sample
    append = trace.append
    for t in range(horizon):
        action = propose(proposal_rng)
        reward = float(sample(action, reward_rng))
        update(action, reward)
        append(t, action, reward)
    return trace


@dataclass
class RunResult:
    """In-memory results of one harness invocation (also written to disk)."""

    aggregates: dict[tuple[str, float | None], RunAggregate]
    rank_tables: dict[float | None, RankTable]
    manifest: dict
    out_dir: str = ""
    errors: list = field(default_factory=list)


def _curve_key(policy: str, delta: float | None) -> str:
    return policy if delta is None else f"{policy}@delta={delta:g}"


def _online_repetition(config: ExperimentConfig, rep: int):
    """One online repetition: fresh model, fresh policies, full horizon."""
    model = make_model(
        config.family,
        derive_rng(config.master_seed, rep, ROLE_MODEL),
        config.action_range,
        config.noise_var,
    )
    curves = {}
    accepted = {}
    errors = []
    for spec in config.policies:
        try:
            policy = make_policy(
                spec,
                config.action_range,
                config.mode,
                derive_rng(config.master_seed, rep, ROLE_POLICY_INIT, spec.name),
            )
            trace = simulate_online(
                policy,
                model,
                config.horizon,
                derive_rng(config.master_seed, rep, ROLE_PROPOSAL, spec.name),
                derive_rng(config.master_seed, rep, ROLE_REWARD, spec.name),
            )
            key = _curve_key(spec.name, None)
            curves[key] = cumulative_regret(trace, model, config.realized_regret)
            accepted[key] = trace.T
        except Exception as exc:  # noqa: BLE001 - batch runs must survive one bad fit
            errors.append({"repetition": rep, "policy": spec.name, "error": str(exc)})
    return curves, accepted, errors


def _offline_repetition(config: ExperimentConfig, rep: int):
    """One offline repetition: fresh model and stream, replay per (delta, policy)."""
    model = make_model(
        config.family,
        derive_rng(config.master_seed, rep, ROLE_MODEL),
        config.action_range,
        config.noise_var,
    )
    stream = generate_logged_stream(
        model, config.horizon, derive_rng(config.master_seed, rep, ROLE_STREAM)
    )
    curves = {}
    accepted = {}
    errors = []
    for delta in config.deltas:
        cfg = ReplayConfig(delta=delta)
        for spec in config.policies:
            try:
                policy = make_policy(
                    spec,
                    config.action_range,
                    config.mode,
                    derive_rng(
                        config.master_seed, rep, ROLE_POLICY_INIT, spec.name, delta
                    ),
                )
                trace = replay_cab(
                    policy,
                    stream,
                    cfg,
                    derive_rng(
                        config.master_seed, rep, ROLE_PROPOSAL, spec.name, delta
                    ),
                )
                key = _curve_key(spec.name, delta)
                curves[key] = cumulative_regret(trace, model, config.realized_regret)
                accepted[key] = trace.T
            except Exception as exc:  # noqa: BLE001
                errors.append(
                    {
                        "repetition": rep,
                        "policy": spec.name,
                        "delta": delta,
                        "error": str(exc),
                    }
                )
    return curves, accepted, errors


def _ingest_repetition(config: ExperimentConfig, rep: int, stream: LoggedStream):
    """One ingest repetition: fixed stream, fresh policy randomness, reward only."""
    curves = {}
    accepted = {}
    errors = []
    for delta in config.deltas:
        cfg = ReplayConfig(delta=delta)
        for spec in config.policies:
            try:
                policy = make_policy(
                    spec,
                    config.action_range,
                    config.mode,
                    derive_rng(
                        config.master_seed, rep, ROLE_POLICY_INIT, spec.name, delta
                    ),
                )
                trace = replay_cab(
                    policy,
                    stream,
                    cfg,
                    derive_rng(
                        config.master_seed, rep, ROLE_PROPOSAL, spec.name, delta
                    ),
                )
                key = _curve_key(spec.name, delta)
                curves[key] = np.cumsum(np.asarray(trace.rewards)) if trace.T else np.empty(0)
                accepted[key] = trace.T
            except Exception as exc:  # noqa: BLE001
                errors.append(
                    {
                        "repetition": rep,
                        "policy": spec.name,
                        "delta": delta,
                        "error": str(exc),
                    }
                )
    return curves, accepted, errors


def _dispatch(args):
    config, rep, mode, stream = args
    if mode == "online":
        return rep, _online_repetition(config, rep)
    if mode == "offline":
        return rep, _offline_repetition(config, rep)
    return rep, _ingest_repetition(config, rep, stream)


def _collect_repetitions(config: ExperimentConfig, workers: int, stream=None):
    tasks = [(config, rep, config.mode, stream) for rep in range(config.repetitions)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_dispatch, tasks, chunksize=8))
    else:
        results = dict(map(_dispatch, tasks))
    # Fixed iteration order regardless of scheduling.
    per_key_curves: dict[str, list] = {}
    per_key_T: dict[str, list] = {}
    errors: list = []
    for rep in range(config.repetitions):
        curves, accepted, errs = results[rep]
        for key, curve in curves.items():
            per_key_curves.setdefault(key, []).append(curve)
            per_key_T.setdefault(key, []).append(accepted[key])
        errors.extend(errs)
    return per_key_curves, per_key_T, errors


def _write_aggregate_csv(path, agg: RunAggregate) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "mean", "se", "n"])
        for t in range(len(agg.mean)):
            se = agg.se[t]
            writer.writerow(
                [
                    t + 1,
                    repr(float(agg.mean[t])),
                    "nan" if np.isnan(se) else repr(float(se)),
                    int(agg.n[t]),
                ]
            )


def _write_rank_csv(path, table: RankTable) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(table.to_rows())


def _config_echo(config: ExperimentConfig) -> dict:
    return {
        "mode": config.mode,
        "family": config.family,
        "stream": config.stream_path,
        "repetitions": config.repetitions,
        "horizon": config.horizon,
        "deltas": list(config.deltas),
        "master_seed": config.master_seed,
        "t_eval": config.t_eval,
        "noise_var": config.noise_var,
        "range": [config.action_range.lo, config.action_range.hi],
        "realized_regret": config.realized_regret,
        "policies": [
            {"name": s.name, "kind": s.kind, "params": dict(s.params)}
            for s in config.policies
        ],
    }


def run_experiment(config: ExperimentConfig, workers: int = 1) -> RunResult:
    """Execute the configured experiment and write all artifacts to out_dir."""
    os.makedirs(config.out_dir, exist_ok=True)

    stream = None
    if config.mode == "ingest":
        stream = load_stream(config.stream_path, config.action_range)
        expected_T = acceptance_probability(
            min(config.deltas), config.action_range
        ) * len(stream)
        if expected_T < config.t_eval:
            import warnings

            warnings.warn(
                f"expected accepted count {expected_T:.0f} is below "
                f"t_eval={config.t_eval}; rank table may be all n/a",
                stacklevel=2,
            )

    per_key_curves, per_key_T, errors = _collect_repetitions(config, workers, stream)

    metric = "reward" if config.mode == "ingest" else "regret"
    deltas: list[float | None] = (
        [None] if config.mode == "online" else list(config.deltas)
    )

    aggregates: dict[tuple[str, float | None], RunAggregate] = {}
    rank_tables: dict[float | None, RankTable] = {}
    for delta in deltas:
        named = {}
        for spec in config.policies:
            key = _curve_key(spec.name, delta)
            curves = per_key_curves.get(key, [])
            if curves:
                agg = aggregate_runs(curves)
            else:
                agg = RunAggregate(np.empty(0), np.empty(0), np.empty(0, dtype=int), 0)
            aggregates[(spec.name, delta)] = agg
            named[spec.name] = agg
            suffix = "" if delta is None else f"_delta{delta:g}"
            _write_aggregate_csv(
                os.path.join(
                    config.out_dir,
                    f"aggregate_{config.mode}_{spec.name}{suffix}.csv",
                ),
                agg,
            )
        table = rank_at(named, config.t_eval, metric)
        rank_tables[delta] = table
        suffix = "" if delta is None else f"_delta{delta:g}"
        _write_rank_csv(
            os.path.join(config.out_dir, f"rank_{config.mode}{suffix}.csv"), table
        )

    manifest = {
        "config": _config_echo(config),
        "accepted_counts": {k: per_key_T[k] for k in sorted(per_key_T)},
        "errors": errors,
        "metric": metric,
    }
    with open(os.path.join(config.out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return RunResult(
        aggregates=aggregates,
        rank_tables=rank_tables,
        manifest=manifest,
        out_dir=config.out_dir,
        errors=errors,
    )


def run_online(config: ExperimentConfig, workers: int = 1) -> RunResult:
    if config.mode != "online":
        raise ValueError("config mode must be 'online'")
    return run_experiment(config, workers)


def run_offline(config: ExperimentConfig, workers: int = 1) -> RunResult:
    if config.mode != "offline":
        raise ValueError("config mode must be 'offline'")
    return run_experiment(config, workers)


def run_ingest(config: ExperimentConfig, workers: int = 1) -> RunResult:
    if config.mode != "ingest":
        raise ValueError("config mode must be 'ingest'")
    return run_experiment(config, workers)
