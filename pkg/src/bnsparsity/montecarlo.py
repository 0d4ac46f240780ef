"""Seeded, replicate-parallel Monte Carlo harness for the rejection-rate
studies: three fixed-max-in-degree tables and the edge-growth power study.

Per-replicate seeds are derived from the master seed and the replicate
coordinates, so results are bit-identical regardless of thread count.
Replicates that fail numerically (heavy-tailed data can produce effectively
singular covariances) are never dropped silently: each grid row reports the
failure count, the rejection fraction among completed replicates, and the
fraction with failures counted as non-rejections.
"""

from __future__ import annotations

import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BnSparsityError, InputError
from .simulate import power_chain, random_model, sample_dataset, NoiseSpec, WeightedDag, GenerativeModel
from .sparsity import max_parents_test

BASIC_TABLES = {"sim1": 1, "sim2": 4, "sim3": 8}
TABLES = tuple(BASIC_TABLES) + ("power",)
DEFAULT_N_VALUES = (30, 50, 100, 500)

# Disjoint stream tags keep the derived seed spaces of the different draw
# sites from colliding.
_STREAM_MODEL = 11
_STREAM_DATA = 12
_STREAM_GRAPHS = 21
_STREAM_POWER_DATA = 23

THREADS_ENV_VAR = "BNSPARSITY_THREADS"


def resolve_threads(threads: int | None) -> int:
    """Explicit argument, else the environment variable, else 1."""
    if threads is not None:
        if threads < 1:
            raise InputError(f"thread count must be >= 1, got {threads}")
        return int(threads)
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise InputError(f"{THREADS_ENV_VAR}={env!r} is not an integer") from None
        if value < 1:
            raise InputError(f"{THREADS_ENV_VAR} must be >= 1, got {value}")
        return value
    return 1


def derived_rng(master_seed: int, *coords: int) -> np.random.Generator:
    """Independent generator for one site of the replication grid."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, coords)]))


@dataclass(frozen=True)
class MonteCarloRow:
    """One grid cell: rejection counts at a (model, n, in-degree or step)."""

    model: str
    n: int
    nabla_or_step: int
    requested: int
    completed: int
    failures: int
    rejections: int

    @property
    def reject_fraction(self) -> float:
        return self.rejections / self.completed if self.completed else float("nan")

    @property
    def reject_fraction_with_failures(self) -> float:
        return self.rejections / self.requested if self.requested else float("nan")

    @property
    def mc_standard_error(self) -> float:
        if not self.completed:
            return float("nan")
        f = self.reject_fraction
        return float(np.sqrt(f * (1.0 - f) / self.completed))

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "n": self.n,
            "nabla_or_step": self.nabla_or_step,
            "requested": self.requested,
            "completed": self.completed,
            "failures": self.failures,
            "rejections": self.rejections,
            "reject_fraction": self.reject_fraction,
            "reject_fraction_with_failures": self.reject_fraction_with_failures,
            "mc_standard_error": self.mc_standard_error,
        }


_CSV_COLUMNS = (
    "model",
    "n",
    "nabla_or_step",
    "requested",
    "completed",
    "failures",
    "rejections",
    "reject_fraction",
    "reject_fraction_with_failures",
    "mc_standard_error",
)


@dataclass
class MonteCarloReport:
    """Grid of rejection fractions plus the parameters that produced it."""

    table: str
    p: int
    alpha: float
    divisor: str
    seed: int
    replicates: int
    rows: list[MonteCarloRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "table": self.table,
            "p": self.p,
            "alpha": self.alpha,
            "divisor": self.divisor,
            "seed": self.seed,
            "replicates": self.replicates,
            "rows": [row.to_dict() for row in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(_CSV_COLUMNS) + "\n")
        for row in self.rows:
            record = row.to_dict()
            out.write(
                ",".join(
                    format(record[c], ".6g") if isinstance(record[c], float) else str(record[c])
                    for c in _CSV_COLUMNS
                )
                + "\n"
            )
        return out.getvalue()


def _run_many(worker, tasks, threads: int):
    if threads <= 1:
        return [worker(task) for task in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, tasks))


def _test_outcome(data, alpha: float, divisor: str, form: str):
    """True/False for reject, or the error message string on failure."""
    try:
        return max_parents_test(data, alpha, divisor=divisor, form=form).reject
    except BnSparsityError as err:
        return f"{type(err).__name__}: {err}"


def _aggregate(model: str, n: int, nabla_or_step: int, outcomes) -> MonteCarloRow:
    rejections = sum(1 for o in outcomes if o is True)
    failures = sum(1 for o in outcomes if not isinstance(o, bool))
    return MonteCarloRow(
        model=model,
        n=n,
        nabla_or_step=nabla_or_step,
        requested=len(outcomes),
        completed=len(outcomes) - failures,
        failures=failures,
        rejections=rejections,
    )


def run_basic_simulation(
    table: str,
    replicates: int = 400,
    seed: int | None = None,
    models: tuple[str, ...] = ("A", "B", "C", "D", "E"),
    n_values: tuple[int, ...] = DEFAULT_N_VALUES,
    p: int = 20,
    alpha: float = 0.05,
    divisor: str = "nminusp",
    form: str = "conservative",
    threads: int | None = None,
) -> MonteCarloReport:
    """Rejection-rate grid at a fixed max in-degree (tables sim1/sim2/sim3).

    Each replicate draws a fresh network of the given kind, then one dataset
    per sample size from that same network.
    """
    if table not in BASIC_TABLES:
        raise InputError(f"table must be one of {sorted(BASIC_TABLES)}, got {table!r}")
    if replicates < 50:
        raise InputError(f"need at least 50 replicates, got {replicates}")
    nabla = BASIC_TABLES[table]
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2**63))
    threads = resolve_threads(threads)
    kinds = tuple(str(m).upper() for m in models)

    def worker(task):
        kind_idx, rep = task
        kind = kinds[kind_idx]
        model = random_model(
            kind, p, nabla, rng=derived_rng(seed, _STREAM_MODEL, kind_idx, rep)
        )
        outcomes = []
        for n in n_values:
            data = sample_dataset(
                model, n, rng=derived_rng(seed, _STREAM_DATA, kind_idx, rep, n)
            )
            outcomes.append(_test_outcome(data, alpha, divisor, form))
        return outcomes

    report = MonteCarloReport(
        table=table, p=p, alpha=alpha, divisor=divisor, seed=seed, replicates=replicates
    )
    for kind_idx, kind in enumerate(kinds):
        tasks = [(kind_idx, rep) for rep in range(replicates)]
        per_replicate = _run_many(worker, tasks, threads)
        for n_idx, n in enumerate(n_values):
            outcomes = [row[n_idx] for row in per_replicate]
            report.rows.append(_aggregate(kind, n, nabla, outcomes))
    return report


def run_power_study(
    replicates_per_graph: int = 300,
    seed: int | None = None,
    n_values: tuple[int, ...] = DEFAULT_N_VALUES,
    p: int = 15,
    edges_per_step: int = 6,
    steps: int = 10,
    chains: int = 10,
    alpha: float = 0.05,
    divisor: str = "nminusp",
    form: str = "conservative",
    threads: int | None = None,
) -> MonteCarloReport:
    """Rejection rate as the true graph grows away from a tree.

    Step 0 is the single-parent base graph (the null holds); step k graphs
    carry ``k * edges_per_step`` extra edges. Fractions pool the chains at
    each step.
    """
    if replicates_per_graph < 1:
        raise InputError("need at least 1 replicate per graph")
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2**63))
    threads = resolve_threads(threads)

    chain_set = power_chain(
        p=p,
        edges_per_step=edges_per_step,
        steps=steps,
        chains=chains,
        rng=derived_rng(seed, _STREAM_GRAPHS),
    )

    def model_for(dag: WeightedDag) -> GenerativeModel:
        # the edge-growth protocol regenerates only edge weights; error
        # variances stay at 1
        return GenerativeModel(
            kind="A", dag=dag, noise=NoiseSpec(variances=np.ones(p), family="gaussian")
        )

    # (slot, step) grid; slot 0 is the shared base graph, chains are 1-based.
    graph_models = [(0, 0, model_for(chain_set.base))]
    for chain_idx, graphs in enumerate(chain_set.chains):
        for step_idx, dag in enumerate(graphs, start=1):
            graph_models.append((chain_idx + 1, step_idx, model_for(dag)))

    def worker(task):
        slot, step, model, n, rep = task
        data = sample_dataset(
            model, n, rng=derived_rng(seed, _STREAM_POWER_DATA, slot, step, n, rep)
        )
        return step, n, _test_outcome(data, alpha, divisor, form)

    tasks = [
        (slot, step, model, n, rep)
        for slot, step, model in graph_models
        for n in n_values
        for rep in range(replicates_per_graph)
    ]
    results = _run_many(worker, tasks, threads)

    report = MonteCarloReport(
        table="power",
        p=p,
        alpha=alpha,
        divisor=divisor,
        seed=seed,
        replicates=replicates_per_graph,
    )
    for n in n_values:
        for step in range(steps + 1):
            outcomes = [o for s, nn, o in results if s == step and nn == n]
            report.rows.append(_aggregate("A", n, step, outcomes))
    return report
