"""Monte Carlo experiments: configs, trial fan-out, aggregation, sweeps and CSV output.

Seeding
-------
Trial ``k`` of an experiment with master seed ``s`` uses the seed triple
``(mix_seed(s, k, 1), mix_seed(s, k, 2), mix_seed(s, k, 3))`` for the
environment, agent and adversary streams (see :func:`pssbai.engine.mix_seed`,
chained splitmix64). Cell ``j`` of a sweep runs with master seed
``mix_seed(s, j, 4)``. Each 64-bit seed feeds ``numpy.random.default_rng``.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Sequence

from scipy.stats import norm

from .adversaries import ADVERSARY_NAMES, make_adversary
from .agents import AGENT_NAMES, make_agent
from .core import BanditInstance, make_instance, two_group_instance
from .engine import ROLE_CELL, mix_seed, run_trial, trial_seeds

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


class ExperimentError(RuntimeError):
    def __init__(self, config: "ExperimentConfig", error: Exception):
        super().__init__(f"{type(error).__name__}: {error} [config: {config.describe()}]")
        self.config = config
        self.error = error


CPS_RULES = (
    "none",
    "theorem-3.1",
    "theorem-4.3",
    "theorem-4.3-x-log2L",
    "theorem-4.4-I",
    "theorem-4.4-II",
)


def budget_from_rule(rule: str, instance: BanditInstance, T: int, lam: float) -> float:
    """Total corruption budget C for a named rule.

    theorem-3.1        1 + (1+lam) * 2*delta*T
    theorem-4.3        (1+lam) * 2*delta*T / (L log2 L)
    theorem-4.3-x-log2L  the theorem-4.3 budget times log2 L, i.e. (1+lam) * 2*delta*T / L
    theorem-4.4-I      L * (1 - (1-lam)(1 - w_max)) * T
    theorem-4.4-II     L * (1 - (1-lam) w_min) * T

    ``delta`` is the gap between the two best arms.
    """
    L = instance.L
    d = instance.delta
    if rule == "none":
        return 0.0
    if rule == "theorem-3.1":
        return 1.0 + (1.0 + lam) * 2.0 * d * T
    if rule == "theorem-4.3":
        return (1.0 + lam) * 2.0 * d * T / (L * math.log2(L))
    if rule == "theorem-4.3-x-log2L":
        return (1.0 + lam) * 2.0 * d * T / L
    if rule == "theorem-4.4-I":
        return L * (1.0 - (1.0 - lam) * (1.0 - max(instance.means))) * T
    if rule == "theorem-4.4-II":
        return L * (1.0 - (1.0 - lam) * min(instance.means)) * T
    raise ConfigError(f"unknown cps_rule {rule!r}; expected one of {CPS_RULES}")


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        return (0.0, 1.0)
    z = float(norm.ppf(0.5 + confidence / 2))
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    # at k = 0 or k = n the exact bound equals p; rounding can land it on the wrong side
    return (max(0.0, min(p, centre - half)), min(1.0, max(p, centre + half)))


# Config keys that may be given as a list to form a sweep axis, in sort order.
AXES = ("algorithm", "L", "T", "lambda", "w_star", "w_prime")

_FIELD_FOR_KEY = {"lambda": "lam"}
_KEY_FOR_FIELD = {"lam": "lambda"}

CONFIG_KEYS = (
    "algorithm",
    "adversary",
    "T",
    "trials",
    "master_seed",
    "u",
    "lambda",
    "C",
    "cps_rule",
    "means",
    "L",
    "w_star",
    "w_prime",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment, or a grid of them when ``axes`` is non-empty.

    The instance is either explicit ``means`` or the two-group family
    ``(L, w_star, w_prime)``. Exactly one of ``C`` and ``cps_rule`` fixes the
    budget.
    """

    algorithm: str = "pss"
    adversary: str = "noop"
    T: int = 2000
    trials: int = 1000
    master_seed: int = 0
    u: float = 2.0
    lam: float = 0.5
    C: Optional[float] = None
    cps_rule: Optional[str] = None
    means: Optional[tuple[float, ...]] = None
    L: Optional[int] = None
    w_star: Optional[float] = None
    w_prime: Optional[float] = None
    axes: dict[str, tuple] = field(default_factory=dict)

    def __hash__(self) -> int:
        return hash(self.config_hash())

    # ---- construction and validation

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if (self.C is None) == (self.cps_rule is None):
            raise ConfigError("give exactly one of C and cps_rule")
        if self.cps_rule is not None and self.cps_rule not in CPS_RULES:
            raise ConfigError(f"unknown cps_rule {self.cps_rule!r}")
        if self.C is not None and self.C < 0:
            raise ConfigError(f"C must be nonnegative, got {self.C}")
        for name, values in self.axes.items():
            if name not in AXES:
                raise ConfigError(f"{name!r} cannot be a sweep axis")
            if not values:
                raise ConfigError(f"sweep axis {name!r} is empty")
        algs = self.axes.get("algorithm", (self.algorithm,))
        for a in algs:
            if a not in AGENT_NAMES:
                raise ConfigError(f"unknown algorithm {a!r}")
        if self.adversary not in ADVERSARY_NAMES:
            raise ConfigError(f"unknown adversary {self.adversary!r}")
        two_group = any(
            getattr(self, f) is not None or f in self.axes for f in ("L", "w_star", "w_prime")
        )
        if self.means is not None and two_group:
            raise ConfigError("give either means or (L, w_star, w_prime), not both")
        if self.means is None:
            for f in ("L", "w_star", "w_prime"):
                if getattr(self, f) is None and f not in self.axes:
                    raise ConfigError(f"missing instance key {f!r}")

    def instance(self) -> BanditInstance:
        if self.axes:
            raise ConfigError("expand sweep axes before building an instance")
        if self.means is not None:
            return make_instance(self.means)
        return two_group_instance(int(self.L), float(self.w_star), float(self.w_prime))

    def budget(self, instance: Optional[BanditInstance] = None) -> float:
        if self.C is not None:
            return float(self.C)
        inst = instance if instance is not None else self.instance()
        return budget_from_rule(self.cps_rule, inst, self.T, self.lam)

    def expand(self) -> list["ExperimentConfig"]:
        """Cells of the sweep in lexicographic order of axis values, each with its own master seed."""
        if not self.axes:
            return [self]
        names = [a for a in AXES if a in self.axes]
        grids = [sorted(self.axes[a]) for a in names]
        cells = []
        for j, combo in enumerate(itertools.product(*grids)):
            changes = {_FIELD_FOR_KEY.get(n, n): v for n, v in zip(names, combo)}
            cells.append(
                replace(self, axes={}, master_seed=mix_seed(self.master_seed, j, ROLE_CELL), **changes)
            )
        return cells

    # ---- identity

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        axes = d.pop("axes")
        out: dict[str, Any] = {}
        for k, v in d.items():
            if v is None:
                continue
            key = _KEY_FOR_FIELD.get(k, k)
            out[key] = list(v) if isinstance(v, tuple) else v
        for k, v in axes.items():
            out[k] = list(v)
        return out

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def describe(self) -> str:
        return " ".join(f"{k}={v}" for k, v in sorted(self.to_dict().items()))

    # ---- file format

    def to_toml(self) -> str:
        lines = []
        for k in CONFIG_KEYS:
            v = self.to_dict().get(k)
            if v is not None:
                lines.append(f"{k} = {_toml_value(v)}")
        return "\n".join(lines) + "\n"


def _toml_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, float):
        return repr(v)
    return str(v)


_INT_KEYS = {"T", "trials", "master_seed", "L"}
_FLOAT_KEYS = {"u", "lambda", "C", "w_star", "w_prime"}
_STR_KEYS = {"algorithm", "adversary", "cps_rule"}


def _coerce(key: str, value: Any) -> Any:
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"key {key!r} must be an integer, got {value!r}")
        return value
    if key in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"key {key!r} must be a number, got {value!r}")
        return float(value)
    if key in _STR_KEYS:
        if not isinstance(value, str):
            raise ConfigError(f"key {key!r} must be a string, got {value!r}")
        return value
    raise ConfigError(f"unknown config key {key!r}")


def config_from_dict(raw: dict[str, Any]) -> ExperimentConfig:
    kwargs: dict[str, Any] = {}
    axes: dict[str, tuple] = {}
    for key, value in raw.items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        if key == "means":
            if not isinstance(value, list) or not value:
                raise ConfigError("key 'means' must be a non-empty list of numbers")
            kwargs["means"] = tuple(_coerce("C", x) for x in value)
            continue
        if isinstance(value, list):
            if key not in AXES:
                raise ConfigError(f"key {key!r} cannot be a list (not a sweep axis)")
            vals = tuple(_coerce(key, x) for x in value)
            if len(vals) == 1:
                kwargs[_FIELD_FOR_KEY.get(key, key)] = vals[0]
            else:
                axes[key] = vals
            continue
        kwargs[_FIELD_FOR_KEY.get(key, key)] = _coerce(key, value)
    if axes:
        kwargs["axes"] = axes
    cfg = ExperimentConfig(**kwargs)
    cfg.validate()
    return cfg


def read_config_dict(path: str | Path) -> dict[str, Any]:
    """Raw key/value table of a config file, before validation."""
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"{path}: malformed config: {err}") from err


def load_config(path: str | Path) -> ExperimentConfig:
    return config_from_dict(read_config_dict(path))


# ---- execution


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    seeds: tuple[int, int, int]
    output_arm: int
    best_arm: int
    success: bool
    gap: float
    budget_spent: float


@dataclass(frozen=True)
class ExperimentSummary:
    algorithm: str
    adversary: str
    L: int
    T: int
    u: float
    lam: float
    C: float
    trials: int
    successes: int
    success_rate: float
    ci_low: float
    ci_high: float
    mean_gap: float
    mean_budget_spent: float
    master_seed: int
    config_hash: str
    w_star: Optional[float] = None
    w_prime: Optional[float] = None
    records: tuple[TrialRecord, ...] = ()


def _run_chunk(config: ExperimentConfig, indices: Sequence[int]) -> list[TrialRecord]:
    inst = config.instance()
    C = config.budget(inst)
    out = []
    for k in indices:
        seeds = trial_seeds(config.master_seed, k)
        agent = make_agent(config.algorithm, inst.L, config.T, config.u)
        adversary = make_adversary(
            config.adversary, inst, config.T, config.lam, algorithm=config.algorithm, u=config.u
        )
        res = run_trial(inst, agent, adversary, config.T, C, seeds)
        out.append(
            TrialRecord(
                trial_id=k,
                seeds=res.seeds,
                output_arm=res.output,
                best_arm=res.best_arm,
                success=res.success,
                gap=res.gap_of_output,
                budget_spent=res.budget_spent,
            )
        )
    return out


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentSummary:
    """Run every trial of a single-cell config and aggregate in trial order."""
    config.validate()
    if config.axes:
        raise ConfigError("config has sweep axes; use run_sweep")
    try:
        inst = config.instance()
        C = config.budget(inst)
        make_agent(config.algorithm, inst.L, config.T, config.u)
        make_adversary(config.adversary, inst, config.T, config.lam, algorithm=config.algorithm, u=config.u)
    except Exception as err:
        raise ExperimentError(config, err) from err

    indices = list(range(config.trials))
    if workers <= 1 or config.trials < 2:
        records = _run_chunk(config, indices)
    else:
        n_chunks = min(config.trials, workers * 4)
        chunks = [indices[i::n_chunks] for i in range(n_chunks)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [config] * len(chunks), chunks))
        records = sorted((r for p in parts for r in p), key=lambda r: r.trial_id)
    return _summarize(config, inst, C, records)


def _summarize(config, inst, C, records) -> ExperimentSummary:
    n = len(records)
    succ = sum(r.success for r in records)
    lo, hi = wilson_interval(succ, n)
    return ExperimentSummary(
        algorithm=config.algorithm,
        adversary=config.adversary,
        L=inst.L,
        T=config.T,
        u=config.u,
        lam=config.lam,
        C=C,
        trials=n,
        successes=succ,
        success_rate=succ / n,
        ci_low=lo,
        ci_high=hi,
        mean_gap=math.fsum(r.gap for r in records) / n,
        mean_budget_spent=math.fsum(r.budget_spent for r in records) / n,
        master_seed=config.master_seed,
        config_hash=config.config_hash(),
        w_star=config.w_star,
        w_prime=config.w_prime,
        records=tuple(records),
    )


def run_sweep(config: ExperimentConfig, workers: int = 1) -> list[ExperimentSummary]:
    config.validate()
    return [run_experiment(cell, workers=workers) for cell in config.expand()]


# ---- persistence

CSV_COLUMNS = (
    "algorithm",
    "adversary",
    "L",
    "T",
    "u",
    "lambda",
    "C",
    "trials",
    "successes",
    "success_rate",
    "ci_low",
    "ci_high",
    "mean_gap",
    "mean_budget_spent",
    "master_seed",
    "config_hash",
)

TRIAL_COLUMNS = ("trial_id", "seed", "output_arm", "best_arm", "success", "gap", "budget_spent")


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def summary_row(s: ExperimentSummary) -> list[str]:
    values = {
        "algorithm": s.algorithm,
        "adversary": s.adversary,
        "L": s.L,
        "T": s.T,
        "u": s.u,
        "lambda": s.lam,
        "C": s.C,
        "trials": s.trials,
        "successes": s.successes,
        "success_rate": s.success_rate,
        "ci_low": s.ci_low,
        "ci_high": s.ci_high,
        "mean_gap": s.mean_gap,
        "mean_budget_spent": s.mean_budget_spent,
        "master_seed": s.master_seed,
        "config_hash": s.config_hash,
    }
    return [_fmt(values[c]) for c in CSV_COLUMNS]


def write_csv(summaries: Sequence[ExperimentSummary], path: str | Path) -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for s in summaries:
                w.writerow(summary_row(s))
    except OSError as err:
        raise OSError(f"cannot write results CSV {path}: {err}") from err


def write_trials_csv(summary: ExperimentSummary, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_COLUMNS)
        for r in summary.records:
            w.writerow(
                [
                    r.trial_id,
                    ":".join(str(s) for s in r.seeds),
                    r.output_arm,
                    r.best_arm,
                    int(r.success),
                    repr(r.gap),
                    repr(r.budget_spent),
                ]
            )


class SchemaError(ValueError):
    pass


_NUMERIC_INT = {"L", "T", "trials", "successes", "master_seed"}
_NUMERIC_FLOAT = {
    "u",
    "lambda",
    "C",
    "success_rate",
    "ci_low",
    "ci_high",
    "mean_gap",
    "mean_budget_spent",
}


def read_csv(path: str | Path) -> list[dict[str, Any]]:
    """Parse a results CSV, checking the column set; numeric columns are converted."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s): {', '.join(missing)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            out: dict[str, Any] = {}
            for c in CSV_COLUMNS:
                v = row[c]
                try:
                    if c in _NUMERIC_INT:
                        out[c] = int(v)
                    elif c in _NUMERIC_FLOAT:
                        out[c] = float(v)
                    else:
                        out[c] = v
                except ValueError as err:
                    raise SchemaError(f"{path}:{lineno}: column {c!r}: bad value {v!r}") from err
            rows.append(out)
    return rows
