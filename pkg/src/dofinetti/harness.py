"""Simultaneous discovery + effect estimation experiments on the bivariate XOR process."""

from __future__ import annotations

import ast
import csv
import logging
import os
import time
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import BIVARIATE_GRAPHS, Dag, InterventionSet, ZeroMassWarning, block_axes
from .discover import discover_bivariate, discover_bivariate_iid_baseline
from .estimate import fit_joint, fit_pooled, iid_truncated_factorization, truncated_factorization
from .oracle import analytic_post_interventional
from .plotting import sweep_svg
from .simulate import BetaPrior, Seed, sample_icm_bivariate, make_rng

log = logging.getLogger(__name__)

METHODS = ("do-finetti", "iid", "do-finetti-true-dag", "iid-true-dag")
GRAPH_NAMES = ("X->Y", "Y->X", "X|Y")
DEFAULT_ENV_COUNTS = (50, 100, 200, 500, 1000, 2000, 5000)

# sub-stream labels under a trial seed
_DATA, _INTERVENTION, _ORIENTATION = 0, 1, 2


@dataclass
class ExperimentConfig:
    env_counts: tuple[int, ...] = DEFAULT_ENV_COUNTS
    repeats: int = 100
    prior: BetaPrior = field(default_factory=BetaPrior)
    positions: int = 2
    methods: tuple[str, ...] = METHODS
    significance: float = 0.05
    master_seed: int = 0
    output_dir: Path = Path("sweep-out")

    def __post_init__(self):
        self.env_counts = tuple(int(e) for e in self.env_counts)
        self.methods = tuple(self.methods)
        self.output_dir = Path(self.output_dir)
        if isinstance(self.prior, (tuple, list)):
            self.prior = BetaPrior(*self.prior)
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not self.env_counts or any(b <= a for a, b in zip(self.env_counts, self.env_counts[1:])):
            raise ValueError("env_counts must be nonempty and strictly increasing")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ValueError(f"methods must be a nonempty subset of {METHODS}")
        if self.positions < 2:
            raise ValueError("discovery needs at least two positions")

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        """Parse ``key = literal`` lines; ``alpha``/``beta`` set the prior.

        ``DOFINETTI_SEED`` in the environment overrides ``master_seed``.
        """
        raw = parse_keyvalue(text)
        prior = BetaPrior(float(raw.pop("alpha", 1.0)), float(raw.pop("beta", 3.0)))
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        raw.setdefault("prior", prior)
        if "DOFINETTI_SEED" in os.environ:
            raw["master_seed"] = int(os.environ["DOFINETTI_SEED"])
        return cls(**raw)


def parse_keyvalue(text: str) -> dict:
    """``key = python-literal`` per line; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        try:
            out[key.strip()] = ast.literal_eval(value.strip())
        except (ValueError, SyntaxError):
            raise ValueError(f"line {lineno}: cannot parse value {value.strip()!r}") from None
    return out


@dataclass
class TrialRecord:
    method: str
    num_envs: int
    repeat_index: int
    true_graph: str
    chosen_graph: str
    intervened_axis: tuple[int, int]
    intervened_value: int
    mse: float
    graph_correct: bool
    fallback_contexts: int = 0
    error: str = ""


def draw_intervention(seed: Seed, num_positions: int = 2) -> InterventionSet:
    """Uniform choice of one block variable and a uniform binary forced value."""
    rng = make_rng(_child(seed, _INTERVENTION))
    axes = block_axes(2, num_positions)
    axis = axes[int(rng.integers(len(axes)))]
    return InterventionSet({axis: int(rng.integers(2))})


def _child(seed: Seed, label: int) -> tuple[int, ...]:
    base = (int(seed),) if isinstance(seed, (int, np.integer)) else tuple(int(s) for s in seed)
    return base + (label,)


def predict(
    method: str,
    dataset,
    intervention: InterventionSet,
    true_graph: Dag,
    significance: float = 0.05,
    seed: Seed = 0,
):
    """Returns ``(chosen_graph, predicted_table)`` for one of :data:`METHODS`."""
    if method == "do-finetti":
        graph = discover_bivariate(dataset, significance)
    elif method == "iid":
        graph = discover_bivariate_iid_baseline(dataset, significance, _child(seed, _ORIENTATION))
    elif method in ("do-finetti-true-dag", "iid-true-dag"):
        graph = true_graph
    else:
        raise ValueError(f"unknown method {method!r}")
    if method.startswith("do-finetti"):
        table = truncated_factorization(fit_joint(dataset), graph, intervention, zero_mass="uniform")
    else:
        table = iid_truncated_factorization(
            fit_pooled(dataset), graph, intervention, dataset.num_positions, zero_mass="uniform"
        )
    return graph, table


def run_trial(
    method: str,
    true_graph: Dag | str,
    num_envs: int,
    seed: Seed,
    prior: BetaPrior = BetaPrior(),
    positions: int = 2,
    significance: float = 0.05,
    repeat_index: int = 0,
) -> TrialRecord:
    """One dataset, one random single-variable intervention, one method.

    The dataset and the intervention depend only on ``seed``, so methods run
    with the same seed are scored on identical data.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    true_graph = BIVARIATE_GRAPHS[true_graph] if isinstance(true_graph, str) else true_graph
    name = str(true_graph)
    intervention = draw_intervention(seed, positions)
    (axis, value), = intervention.assignments.items()
    dataset = sample_icm_bivariate(true_graph, prior, num_envs, positions, _child(seed, _DATA))
    truth = analytic_post_interventional(true_graph, prior, intervention, positions)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ZeroMassWarning)
            graph, table = predict(method, dataset, intervention, true_graph, significance, seed)
        n_fallback = sum(issubclass(w.category, ZeroMassWarning) for w in caught)
    except (ValueError, ArithmeticError) as exc:
        log.warning("trial failed: %s %s E=%d seed=%s: %s", method, name, num_envs, seed, exc)
        return TrialRecord(method, num_envs, repeat_index, name, "", axis, value,
                           float("nan"), False, 0, f"{type(exc).__name__}: {exc}")
    mse = float(np.sum((table.transpose(truth.axes).probs - truth.probs) ** 2))
    return TrialRecord(method, num_envs, repeat_index, name, str(graph), axis, value,
                       mse, graph == true_graph, n_fallback)


def trial_seed(master_seed: int, env_index: int, repeat: int) -> tuple[int, int, int]:
    return (master_seed, env_index, repeat)


def draw_true_graph(seed: Seed) -> str:
    return GRAPH_NAMES[int(make_rng(_child(seed, 3)).integers(len(GRAPH_NAMES)))]


def run_trials(config: ExperimentConfig) -> list[TrialRecord]:
    records = []
    for k, num_envs in enumerate(config.env_counts):
        t0 = time.perf_counter()
        for r in range(config.repeats):
            seed = trial_seed(config.master_seed, k, r)
            graph = draw_true_graph(seed)
            for method in config.methods:
                records.append(run_trial(method, graph, num_envs, seed, config.prior,
                                         config.positions, config.significance, r))
        log.info("E=%d: %d repeats in %.1fs", num_envs, config.repeats, time.perf_counter() - t0)
    return records


SUMMARY_COLUMNS = ("method", "n_envs", "mse_mean", "mse_std", "dag_accuracy")


def summarize(records: Sequence[TrialRecord]) -> list[dict]:
    rows = []
    methods = list(dict.fromkeys(r.method for r in records))
    envs = sorted({r.num_envs for r in records})
    for m in methods:
        for e in envs:
            group = [r for r in records if r.method == m and r.num_envs == e]
            if not group:
                continue
            mse = np.array([r.mse for r in group if not np.isnan(r.mse)])
            rows.append({
                "method": m,
                "n_envs": e,
                "mse_mean": float(mse.mean()) if mse.size else float("nan"),
                "mse_std": float(mse.std()) if mse.size else float("nan"),
                "dag_accuracy": float(np.mean([r.graph_correct for r in group])),
            })
    return rows


TRIAL_COLUMNS = tuple(f.name for f in fields(TrialRecord))


def write_trials(records: Sequence[TrialRecord], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRIAL_COLUMNS)
        for r in records:
            row = asdict(r)
            row["intervened_axis"] = "{}:{}".format(*r.intervened_axis)
            row["mse"] = repr(r.mse)
            w.writerow([row[c] for c in TRIAL_COLUMNS])


def write_summary(rows: Sequence[dict], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


@dataclass
class SweepResult:
    records: list[TrialRecord]
    summary: list[dict]
    trials_path: Path
    summary_path: Path
    figure_path: Path


def run_sweep(config: ExperimentConfig) -> SweepResult:
    """Run every (env count, repeat, method) trial and write ``trials.csv``, ``summary.csv``, ``mse_accuracy.svg``."""
    records = run_trials(config)
    summary = summarize(records)
    out = config.output_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
        trials_path = out / "trials.csv"
        summary_path = out / "summary.csv"
        figure_path = out / "mse_accuracy.svg"
        write_trials(records, trials_path)
        write_summary(summary, summary_path)
        figure_path.write_text(sweep_svg(summary))
    except OSError as exc:
        raise OSError(f"writing sweep output to {out}: {exc}") from exc
    return SweepResult(records, summary, trials_path, summary_path, figure_path)
