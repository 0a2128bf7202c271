"""Experiment harness: augmented-train / clean-test runs, tables, sweeps.

The protocol: train with a noise wrapper at each configured rate (plus an
unwrapped baseline), always evaluate on a clean copy of the environment,
repeat over seeds, and compare mean final returns against the baseline.
Outputs are byte-deterministic: records are written by the parent process in
a fixed order with canonical JSON, so reruns and different worker counts
produce identical files.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .agents import AGENTS, UnknownAgentError, train_agent
from .core import InvalidConfigError
from .envs import ENVS, UnknownEnvError, make_env
from .records import RunRecord
from .wrappers import SWEEP_AXES, WrapperConfig, config_from_dict, kind_params, wrap

__all__ = [
    "UnknownAxisError",
    "DegenerateBaselineError",
    "EmptyInputError",
    "DEFAULT_NOISE_RATES",
    "ExperimentConfig",
    "load_config",
    "fingerprint",
    "pct_improvement",
    "run_experiment",
    "sweep",
    "SummaryRow",
    "ConsistencyRow",
    "SummaryTable",
    "summarize",
    "report",
]

DEFAULT_NOISE_RATES = (0.01, 0.05, 0.1, 0.2, 0.5, 1.0)


class UnknownAxisError(LookupError):
    """Sweep axis is not a numeric parameter of the configured wrapper kind."""


class DegenerateBaselineError(ArithmeticError):
    """Percent improvement is undefined because the baseline mean is zero."""


class EmptyInputError(ValueError):
    """An input directory held no run records."""


@dataclass
class ExperimentConfig:
    """One experiment: env, agent, optional wrapper, rates, seeds, budgets."""

    env: str
    agent: str
    env_params: dict = field(default_factory=dict)
    agent_params: dict = field(default_factory=dict)
    wrapper: WrapperConfig | None = None
    noise_rates: tuple[float, ...] = DEFAULT_NOISE_RATES
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    train_episodes: int = 500
    eval_interval: int = 100
    eval_episodes: int = 5
    out_dir: str = "results"
    couplings: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        if self.env not in ENVS:
            raise UnknownEnvError(f"unknown env {self.env!r}; registered: {sorted(ENVS)}")
        if self.agent not in AGENTS:
            raise UnknownAgentError(f"unknown agent {self.agent!r}; registered: {sorted(AGENTS)}")
        if not self.seeds:
            raise InvalidConfigError("seeds must be a non-empty list")
        if len(set(self.seeds)) != len(self.seeds):
            raise InvalidConfigError("seeds must be distinct")
        if not self.noise_rates:
            raise InvalidConfigError("noise_rates must be a non-empty list")
        for rate in self.noise_rates:
            if not 0.0 <= rate <= 1.0:
                raise InvalidConfigError(f"noise rate {rate} outside [0, 1]")
        for name, value in (("train_episodes", self.train_episodes),
                            ("eval_interval", self.eval_interval),
                            ("eval_episodes", self.eval_episodes)):
            if int(value) < 1:
                raise InvalidConfigError(f"{name} must be >= 1")
        if self.wrapper is not None:
            self.wrapper.validate()

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {"env", "agent", "wrapper", "experiment", "sweep"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfigError(f"unknown config sections: {unknown}")

        def section(name, required=False):
            part = data.get(name)
            if part is None:
                if required:
                    raise InvalidConfigError(f"config needs an {name!r} section")
                return {}
            if not isinstance(part, dict):
                raise InvalidConfigError(f"config section {name!r} must be a mapping")
            return dict(part)

        env_part = section("env", required=True)
        agent_part = section("agent", required=True)
        for part, label in ((env_part, "env"), (agent_part, "agent")):
            if "name" not in part:
                raise InvalidConfigError(f"config section {label!r} needs a 'name'")
            extra = sorted(set(part) - {"name", "params"})
            if extra:
                raise InvalidConfigError(f"unknown keys in {label!r} section: {extra}")

        wrapper = None
        if data.get("wrapper") is not None:
            wrapper = config_from_dict(section("wrapper"))

        exp = section("experiment")
        extra = sorted(set(exp) - {"seeds", "noise_rates", "train_episodes",
                                   "eval_interval", "eval_episodes", "out_dir"})
        if extra:
            raise InvalidConfigError(f"unknown keys in 'experiment' section: {extra}")

        sweep_part = section("sweep")
        extra = sorted(set(sweep_part) - {"couple"})
        if extra:
            raise InvalidConfigError(f"unknown keys in 'sweep' section: {extra}")

        config = cls(
            env=str(env_part["name"]),
            agent=str(agent_part["name"]),
            env_params=dict(env_part.get("params") or {}),
            agent_params=dict(agent_part.get("params") or {}),
            wrapper=wrapper,
            noise_rates=tuple(exp.get("noise_rates", DEFAULT_NOISE_RATES)),
            seeds=tuple(exp.get("seeds", (1, 2, 3, 4, 5))),
            train_episodes=int(exp.get("train_episodes", 500)),
            eval_interval=int(exp.get("eval_interval", 100)),
            eval_episodes=int(exp.get("eval_episodes", 5)),
            out_dir=str(exp.get("out_dir", "results")),
            couplings=dict(sweep_part.get("couple") or {}),
        )
        config.validate()
        return config


def load_config(path) -> ExperimentConfig:
    """Load an experiment config from a YAML (or JSON) file."""
    with open(path, "r", encoding="utf-8") as handle:
        data = yaml.safe_load(handle)
    if not isinstance(data, dict):
        raise InvalidConfigError(f"config file {path} must hold a mapping")
    return ExperimentConfig.from_dict(data)


def fingerprint(group_config: dict) -> str:
    """12-hex-digit digest of a canonical JSON rendering of a group config."""
    canon = json.dumps(group_config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def _group_config(config: ExperimentConfig, wrapper: WrapperConfig | None,
                  rate: float | None) -> dict:
    """Canonical per-group config dict: everything but the seed."""
    wrapper_part = None
    if wrapper is not None:
        wrapper_part = wrapper.to_dict()
        wrapper_part["p"] = float(rate)
    return {
        "env": {"name": config.env, "params": dict(sorted(config.env_params.items()))},
        "agent": {"name": config.agent, "params": dict(sorted(config.agent_params.items()))},
        "wrapper": wrapper_part,
        "train_episodes": config.train_episodes,
        "eval_interval": config.eval_interval,
        "eval_episodes": config.eval_episodes,
    }


def _combine_seeds(config_seed: int, run_seed: int) -> int:
    """Mix the wrapper config seed with the run seed into one stream seed."""
    mixed = np.random.SeedSequence([int(config_seed), int(run_seed)])
    return int(mixed.generate_state(1, dtype=np.uint64)[0])


@dataclass
class RunSpec:
    """A fully resolved unit of work: one training run."""

    env_name: str
    env_params: dict
    agent_name: str
    agent_params: dict
    wrapper: WrapperConfig | None
    rate: float | None
    seed: int
    train_episodes: int
    eval_interval: int
    eval_episodes: int
    fingerprint: str
    group: dict


def _execute_run(spec: RunSpec) -> RunRecord:
    env = make_env(spec.env_name, **spec.env_params)
    if spec.wrapper is not None:
        env = wrap(env, spec.wrapper)
    eval_env = make_env(spec.env_name, **spec.env_params)
    record = train_agent(
        spec.agent_name, env, eval_env,
        seed=spec.seed, episodes=spec.train_episodes,
        eval_interval=spec.eval_interval, eval_episodes=spec.eval_episodes,
        params=spec.agent_params,
    )
    if any(record.eval_perturbations.values()):
        raise RuntimeError("evaluation env was perturbed; eval must stay clean")
    record.fingerprint = spec.fingerprint
    record.config = spec.group
    record.validate()
    return record


def _build_run_specs(config: ExperimentConfig, include_baseline: bool) -> list[RunSpec]:
    common = dict(
        env_name=config.env, env_params=config.env_params,
        agent_name=config.agent, agent_params=config.agent_params,
        train_episodes=config.train_episodes,
        eval_interval=config.eval_interval, eval_episodes=config.eval_episodes,
    )
    specs = []
    if include_baseline:
        group = _group_config(config, None, None)
        fp = fingerprint(group)
        for seed in config.seeds:
            specs.append(RunSpec(wrapper=None, rate=None, seed=int(seed),
                                 fingerprint=fp, group=group, **common))
    if config.wrapper is not None:
        for rate in config.noise_rates:
            group = _group_config(config, config.wrapper, rate)
            fp = fingerprint(group)
            for seed in config.seeds:
                run_wrapper = replace(
                    config.wrapper, p=float(rate),
                    seed=_combine_seeds(config.wrapper.seed, int(seed)),
                )
                specs.append(RunSpec(wrapper=run_wrapper, rate=float(rate), seed=int(seed),
                                     fingerprint=fp, group=group, **common))
    return specs


def _write_records(records: list[RunRecord], out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for record in records:
        path = out / f"run_{record.fingerprint}_{record.seed}.json"
        payload = json.dumps(record.to_dict(), sort_keys=True, indent=2) + "\n"
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(payload)


def run_experiment(config: ExperimentConfig, workers: int = 1, write: bool = True,
                   include_baseline: bool = True) -> list[RunRecord]:
    """Run baseline + per-rate training runs over all seeds.

    Results come back in spec order regardless of worker scheduling, and the
    parent process writes all record files, so output bytes do not depend on
    ``workers``.
    """
    config.validate()
    specs = _build_run_specs(config, include_baseline)
    if workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(specs))) as pool:
            records = list(pool.map(_execute_run, specs))
    else:
        records = [_execute_run(spec) for spec in specs]
    if write:
        _write_records(records, config.out_dir)
    return records


def _coerce_axis_value(axis: str, value):
    return int(value) if axis in ("a", "b") else float(value)


def sweep(config: ExperimentConfig, axis: str, values, workers: int = 1,
          write: bool = True) -> list[RunRecord]:
    """Re-run the experiment once per value of one wrapper parameter.

    Coupled parameters from the config's ``sweep.couple`` section are
    recomputed for each value (e.g. ``alpha: "2 - beta"`` while sweeping
    ``beta``). The baseline runs only once; every record lands in the same
    output directory for a combined report.
    """
    config.validate()
    if config.wrapper is None:
        raise InvalidConfigError("sweep requires a wrapper section in the config")
    values = list(values)
    if not values:
        raise InvalidConfigError("sweep needs at least one value")
    allowed = set(kind_params(config.wrapper.kind)) & SWEEP_AXES
    if axis not in allowed:
        raise UnknownAxisError(
            f"axis {axis!r} is not a numeric parameter of {config.wrapper.kind!r}; "
            f"valid axes: {sorted(allowed)}"
        )
    for param in config.couplings:
        if param == axis:
            raise InvalidConfigError("cannot couple the sweep axis to itself")
        if param not in allowed:
            raise UnknownAxisError(
                f"coupled parameter {param!r} is not a numeric parameter of "
                f"{config.wrapper.kind!r}"
            )

    all_records = []
    for index, value in enumerate(values):
        fields = {axis: _coerce_axis_value(axis, value)}
        for param, expr in config.couplings.items():
            try:
                coupled = eval(expr, {"__builtins__": {}}, {axis: fields[axis]})
            except Exception as exc:
                raise InvalidConfigError(
                    f"could not evaluate coupling {param!r} = {expr!r}: {exc}"
                ) from None
            fields[param] = _coerce_axis_value(param, coupled)
        wrapper = replace(config.wrapper, **fields)
        wrapper.validate()
        point = replace(config, wrapper=wrapper)
        all_records.extend(
            run_experiment(point, workers=workers, write=write,
                           include_baseline=(index == 0))
        )
    return all_records


# ---------------------------------------------------------------------------
# Aggregation and reporting


@dataclass
class SummaryRow:
    env: str
    agent: str
    wrapper: str | None
    noise_rate: float | None
    n_seeds: int
    mean_return: float
    std_return: float
    baseline_mean: float | None
    baseline_std: float | None
    pct_improvement: float | None
    degenerate_baseline: bool = False


@dataclass
class ConsistencyRow:
    agent: str
    wrapper: str
    noise_rate: float
    n_envs: int
    pct_envs_improved: float
    avg_pct_improvement: float
    std_pct_improvement: float


@dataclass
class SummaryTable:
    rows: list[SummaryRow]
    consistency: list[ConsistencyRow]
    threshold: float


def pct_improvement(baseline_mean: float, noisy_mean: float) -> float:
    """Percent change of a mean return against the baseline mean."""
    if baseline_mean == 0.0:
        raise DegenerateBaselineError("baseline mean is zero; improvement is undefined")
    return 100.0 * (noisy_mean - baseline_mean) / abs(baseline_mean)


def _label(name: str, params: dict) -> str:
    if not params:
        return name
    inner = ",".join(f"{k}={params[k]}" for k in sorted(params))
    return f"{name}({inner})"


def _wrapper_label(wrapper_part: dict) -> str:
    skip = {"kind", "p", "seed"}
    parts = [
        f"{k}={wrapper_part[k]}"
        for k in sorted(wrapper_part)
        if k not in skip and wrapper_part[k] is not None and wrapper_part[k] is not False
    ]
    return f"{wrapper_part['kind']}({','.join(parts)})" if parts else wrapper_part["kind"]


def _mean_std_across_seeds(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(np.mean(arr))
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return mean, std


def summarize(records: list[RunRecord], threshold: float = 0.8) -> SummaryTable:
    """Aggregate run records into summary rows and a cross-env consistency table.

    Std across seeds is the sample std (ddof=1); std across environments in
    the consistency table is the population std (ddof=0). "Improved" means
    pct_improvement >= 0, and a (agent, wrapper, rate) combination enters the
    consistency table only when at least ``threshold`` of its environments
    improved.
    """
    if not records:
        raise EmptyInputError("no run records to summarize")
    if not 0.0 <= threshold <= 1.0:
        raise InvalidConfigError("threshold must be in [0, 1]")

    groups: dict[str, list[RunRecord]] = {}
    for record in records:
        groups.setdefault(record.fingerprint, []).append(record)

    # (env label, agent label) -> (mean, std) of the unwrapped baseline group.
    baselines: dict[tuple[str, str], tuple[float, float]] = {}
    prepared = []
    for fp, members in groups.items():
        members = sorted(members, key=lambda r: r.seed)
        cfg = members[0].config
        env_label = _label(cfg["env"]["name"], cfg["env"]["params"])
        agent_label = _label(cfg["agent"]["name"], cfg["agent"]["params"])
        wrapper_part = cfg.get("wrapper")
        wrapper_label = None if wrapper_part is None else _wrapper_label(wrapper_part)
        rate = None if wrapper_part is None else float(wrapper_part["p"])
        mean, std = _mean_std_across_seeds([r.final_return for r in members])
        prepared.append((env_label, agent_label, wrapper_label, rate, len(members), mean, std))
        if wrapper_part is None:
            baselines[(env_label, agent_label)] = (mean, std)

    prepared.sort(key=lambda row: (row[0], row[1], row[2] or "", -1.0 if row[3] is None else row[3]))

    rows = []
    for env_label, agent_label, wrapper_label, rate, n_seeds, mean, std in prepared:
        baseline = baselines.get((env_label, agent_label))
        pct = None
        degenerate = False
        if wrapper_label is not None and baseline is not None:
            try:
                pct = pct_improvement(baseline[0], mean)
            except DegenerateBaselineError:
                degenerate = True
        rows.append(SummaryRow(
            env=env_label, agent=agent_label, wrapper=wrapper_label,
            noise_rate=rate, n_seeds=n_seeds, mean_return=mean, std_return=std,
            baseline_mean=None if (wrapper_label is None or baseline is None) else baseline[0],
            baseline_std=None if (wrapper_label is None or baseline is None) else baseline[1],
            pct_improvement=pct, degenerate_baseline=degenerate,
        ))

    combos: dict[tuple[str, str, float], list[float]] = {}
    for row in rows:
        if row.wrapper is None or row.pct_improvement is None:
            continue
        combos.setdefault((row.agent, row.wrapper, row.noise_rate), []).append(
            row.pct_improvement
        )
    consistency = []
    for (agent_label, wrapper_label, rate), pcts in sorted(combos.items()):
        arr = np.asarray(pcts, dtype=float)
        improved_frac = float(np.mean(arr >= 0.0))
        if improved_frac < threshold:
            continue
        consistency.append(ConsistencyRow(
            agent=agent_label, wrapper=wrapper_label, noise_rate=rate,
            n_envs=arr.size,
            pct_envs_improved=100.0 * improved_frac,
            avg_pct_improvement=float(np.mean(arr)),
            std_pct_improvement=float(np.std(arr)),
        ))
    return SummaryTable(rows=rows, consistency=consistency, threshold=threshold)


def _fmt(value, spec: str = ".1f") -> str:
    return "" if value is None else format(value, spec)


def _csv_text(header: list[str], rows: list[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _summary_csv(table: SummaryTable) -> str:
    header = ["env", "agent", "wrapper", "noise_rate", "n_seeds", "mean_return",
              "std_return", "baseline_mean", "baseline_std", "pct_improvement"]
    rows = []
    for row in table.rows:
        pct = "N/A" if row.degenerate_baseline else _fmt(row.pct_improvement)
        rows.append([
            row.env, row.agent, row.wrapper or "",
            _fmt(row.noise_rate, ".2f"), str(row.n_seeds),
            _fmt(row.mean_return), _fmt(row.std_return),
            _fmt(row.baseline_mean), _fmt(row.baseline_std), pct,
        ])
    return _csv_text(header, rows)


def _consistency_csv(table: SummaryTable) -> str:
    header = ["agent", "wrapper", "noise_rate", "n_envs", "pct_envs_improved",
              "avg_pct_improvement", "std_pct_improvement"]
    rows = [
        [row.agent, row.wrapper, _fmt(row.noise_rate, ".2f"), str(row.n_envs),
         _fmt(row.pct_envs_improved), _fmt(row.avg_pct_improvement),
         _fmt(row.std_pct_improvement)]
        for row in table.consistency
    ]
    return _csv_text(header, rows)


def _summary_json(table: SummaryTable) -> str:
    payload = {
        "metadata": {
            "improvement_rule": "improved means pct_improvement >= 0",
            "pct_improvement": "100 * (noisy_mean - baseline_mean) / abs(baseline_mean)",
            "std_across_seeds": "sample std (ddof=1); 0.0 for a single seed",
            "std_across_envs": "population std (ddof=0)",
            "returns": "undiscounted eval returns",
            "consistency_threshold": table.threshold,
        },
        "rows": [vars(row) for row in table.rows],
        "consistency": [vars(row) for row in table.consistency],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _curve_csv(record: RunRecord) -> str:
    lines = ["progress,mean_return,std_return"]
    for pt in record.curve:
        lines.append(f"{pt.progress},{pt.mean_return!r},{pt.std_return!r}")
    return "\n".join(lines) + "\n"


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def report(in_dir, threshold: float = 0.8, out_dir=None) -> SummaryTable:
    """Aggregate every run record in a directory into summary files.

    Writes summary.csv and consistency.csv (fixed 1-decimal formatting),
    summary.json (full precision plus the conventions used), and one
    curve_<fingerprint>_<seed>.csv per record. Returns the table.
    """
    in_path = Path(in_dir)
    paths = sorted(in_path.glob("run_*.json"))
    if not paths:
        raise EmptyInputError(f"no run records (run_*.json) found in {in_path}")
    records = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as handle:
            records.append(RunRecord.from_dict(json.load(handle)))
    table = summarize(records, threshold=threshold)
    out = Path(out_dir) if out_dir is not None else in_path
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / "summary.csv", _summary_csv(table))
    _write_text(out / "consistency.csv", _consistency_csv(table))
    _write_text(out / "summary.json", _summary_json(table))
    for record in records:
        _write_text(out / f"curve_{record.fingerprint}_{record.seed}.csv",
                    _curve_csv(record))
    return table
