"""Replicated walk experiments: graph families, start schedules and the h sweep.

Every (graph, policy, start, run) replicate gets its own 64-bit seed derived
from ``base_seed`` through :class:`numpy.random.SeedSequence`, so results do
not depend on how replicates are spread over worker processes. Graph
instances and start nodes come from a separate per-graph stream and are
shared by all policies of one experiment (paired comparison).
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .graph import (
    connectivity_radius,
    generate_complete,
    generate_rgg,
    generate_torus,
    load_edge_list,
    stats,
)
from .metrics import aggregate
from .walk import DEFAULT_FRACTIONS, Policy, run_replicate

__all__ = [
    "PRESETS",
    "ExperimentConfig",
    "ExperimentResult",
    "GraphSpec",
    "SweepResult",
    "preset",
    "recommend_h",
    "replicate_seed",
    "run_experiment",
    "sweep_h",
]

_GRAPH_DOMAIN = 0
_REPLICATE_DOMAIN = 1


@dataclass(frozen=True)
class GraphSpec:
    """Graph family and parameters.

    ``family`` is ``rgg`` (``n`` plus ``radius`` or ``radius_mult`` times the
    connectivity radius), ``torus`` (``rows``, ``cols``), ``complete`` (``n``)
    or ``file`` (edge-list ``path``).
    """

    family: str
    n: int | None = None
    radius: float | None = None
    radius_mult: float | None = None
    rows: int | None = None
    cols: int | None = None
    path: str | None = None
    max_retries: int = 100

    def __post_init__(self):
        if self.family not in ("rgg", "torus", "complete", "file"):
            raise ValueError(f"unknown graph family {self.family!r}")
        if self.family in ("rgg", "complete") and (self.n is None or self.n < 1):
            raise ValueError(f"{self.family} needs n >= 1")
        if self.family == "torus" and (self.rows is None or self.cols is None):
            raise ValueError("torus needs rows and cols")
        if self.family == "file" and not self.path:
            raise ValueError("file graph needs a path")
        if self.family == "rgg" and self.radius is not None and self.radius_mult is not None:
            raise ValueError("give radius or radius_mult, not both")

    @property
    def random(self) -> bool:
        return self.family == "rgg"

    @property
    def effective_radius(self) -> float:
        if self.radius is not None:
            return self.radius
        mult = 2.0 if self.radius_mult is None else self.radius_mult
        return mult * connectivity_radius(self.n)

    def build(self, rng=None):
        if self.family == "rgg":
            graph, _ = generate_rgg(self.n, self.effective_radius, rng,
                                    require_connected=True, max_retries=self.max_retries)
            return graph
        if self.family == "torus":
            return generate_torus(self.rows, self.cols)
        if self.family == "complete":
            return generate_complete(self.n)
        with open(self.path, encoding="ascii") as fh:
            return load_edge_list(fh.read())

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None and not (k == "max_retries" and v == 100)}

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    def describe(self):
        if self.family == "rgg":
            return f"G({self.n}, {self.effective_radius:.6g})"
        if self.family == "torus":
            return f"T({self.rows},{self.cols})"
        if self.family == "complete":
            return f"K_{self.n}"
        return self.path


@dataclass(frozen=True)
class ExperimentConfig:
    graph: GraphSpec
    policies: tuple
    graphs: int = 1
    starts: int = 2
    runs: int = 2
    base_seed: int = 0
    step_cap: int | None = None
    fractions: tuple = DEFAULT_FRACTIONS
    # common random numbers: every policy replays the same replicate seeds
    paired: bool = False

    def __post_init__(self):
        if not self.policies:
            raise ValueError("at least one policy is required")
        if min(self.graphs, self.starts, self.runs) < 1:
            raise ValueError("graphs, starts and runs must all be >= 1")
        tokens = [p.token for p in self.policies]
        if len(set(tokens)) != len(tokens):
            raise ValueError(f"duplicate policies in {tokens}")
        object.__setattr__(self, "policies", tuple(self.policies))
        object.__setattr__(self, "fractions", tuple(Fraction(f) if not isinstance(f, float)
                                                    else Fraction(repr(f)) for f in self.fractions))

    @property
    def replicates_per_policy(self) -> int:
        return self.graphs * self.starts * self.runs

    def to_dict(self):
        first = self.policies[0]
        return {
            "graph": self.graph.to_dict(),
            "policies": [p.token for p in self.policies],
            "sampling": first.sampling,
            "rwc_offset": first.rwc_offset,
            "replication": {"graphs": self.graphs, "starts": self.starts, "runs": self.runs},
            "base_seed": self.base_seed,
            "step_cap": self.step_cap,
            "fractions": [str(f) for f in self.fractions],
            "paired": self.paired,
        }

    @classmethod
    def from_dict(cls, data):
        """Build from the JSON document layout (see README); unknown keys are rejected."""
        allowed = {"graph", "policies", "sampling", "rwc_offset", "replication",
                   "base_seed", "step_cap", "fractions", "paired", "output"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "graph" not in data or "policies" not in data:
            raise ValueError("config needs 'graph' and 'policies'")
        options = {}
        if "sampling" in data:
            options["sampling"] = data["sampling"]
        if "rwc_offset" in data:
            options["rwc_offset"] = int(data["rwc_offset"])
        policies = tuple(Policy.parse(t, **options) for t in data["policies"])
        rep = data.get("replication", {})
        extra = set(rep) - {"graphs", "starts", "runs"}
        if extra:
            raise ValueError(f"unknown replication keys: {sorted(extra)}")
        kwargs = {k: int(v) for k, v in rep.items()}
        if "fractions" in data:
            kwargs["fractions"] = tuple(Fraction(str(f)) for f in data["fractions"])
        return cls(
            graph=GraphSpec.from_dict(data["graph"]),
            policies=policies,
            base_seed=int(data.get("base_seed", 0)),
            step_cap=data.get("step_cap"),
            paired=bool(data.get("paired", False)),
            **kwargs,
        )

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def replicate_seed(base_seed, graph_index, policy_index, start_index, run_index) -> int:
    ss = np.random.SeedSequence(
        base_seed, spawn_key=(_REPLICATE_DOMAIN, graph_index, policy_index, start_index, run_index)
    )
    return int(ss.generate_state(1, np.uint64)[0])


def _graph_rng(base_seed, graph_index):
    return np.random.default_rng(
        np.random.SeedSequence(base_seed, spawn_key=(_GRAPH_DOMAIN, graph_index))
    )


def _graph_task(args):
    config, g, fixed = args
    rng = _graph_rng(config.base_seed, g)
    graph = fixed if fixed is not None else config.graph.build(rng)
    if config.starts > graph.n:
        raise ValueError(f"cannot draw {config.starts} distinct starts from {graph.n} nodes")
    starts = [int(s) for s in rng.choice(graph.n, size=config.starts, replace=False)]
    per_policy = []
    for p, policy in enumerate(config.policies):
        records = []
        for s, start in enumerate(starts):
            for r in range(config.runs):
                seed = replicate_seed(config.base_seed, g, 0 if config.paired else p, s, r)
                index = (g * config.starts + s) * config.runs + r
                records.append(run_replicate(
                    graph, policy, start, seed, config.step_cap, config.fractions,
                    replicate_index=index, seed=seed, graph_index=g,
                ))
        per_policy.append(records)
    return graph.n, stats(graph), graph.fingerprint, per_policy


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    reports: dict
    records: dict
    graph_stats: list = field(default_factory=list)
    graph_hashes: list = field(default_factory=list)

    @property
    def mean_degree(self) -> float:
        return float(sum(s.mean_degree for s in self.graph_stats) / len(self.graph_stats))


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Run every policy on the shared graph instances and aggregate per policy.

    The reduction is ordered by graph index, so ``jobs`` only affects speed.
    """
    fixed = None if config.graph.random else config.graph.build()
    tasks = [(config, g, fixed) for g in range(config.graphs)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunk = max(1, len(tasks) // (4 * jobs))
            outputs = list(pool.map(_graph_task, tasks, chunksize=chunk))
    else:
        outputs = [_graph_task(t) for t in tasks]

    ns = {n for n, *_ in outputs}
    if len(ns) != 1:
        raise RuntimeError(f"graph instances differ in size: {sorted(ns)}")
    n = ns.pop()
    records = {p.token: [] for p in config.policies}
    graph_stats, hashes = [], []
    for _, st, fp, per_policy in outputs:
        graph_stats.append(st)
        hashes.append(fp)
        for policy, recs in zip(config.policies, per_policy):
            records[policy.token].extend(recs)

    groups = [recs for recs in records.values()]
    if not config.paired:
        groups = [[r for recs in groups for r in recs]]
    for recs in groups:
        if len({r.seed for r in recs}) != len(recs):
            raise RuntimeError("replicate seed collision; choose another base_seed")

    reports = {tok: aggregate(recs, n, config.fractions) for tok, recs in records.items()}
    return ExperimentResult(config, reports, records, graph_stats, hashes)


@dataclass
class SweepResult:
    rows: list
    best_h: dict
    result: ExperimentResult

    def as_dict(self):
        return {
            "rows": [dict(zip(("d", "h", "mean_cs_norm", "mean_mnlcs"), r)) for r in self.rows],
            "best_h": {str(d): str(h) for d, h in self.best_h.items()},
        }


def sweep_h(graph_spec: GraphSpec, ds, hs, graphs=1, starts=2, runs=2, base_seed=0,
            *, jobs=1, step_cap=None, sampling="replace", paired=True) -> SweepResult:
    """ERWC(d, h) for every pair in ``ds x hs`` on one shared set of graph instances.

    With ``paired`` (the default) all h values replay the same replicate seeds,
    so differences between rows are not swamped by run-to-run noise.

    ``best_h[d]`` minimizes mean max node load at cover; ties go to the
    smaller h.
    """
    ds, hs = list(ds), [Fraction(h) for h in hs]
    if not ds or not hs:
        raise ValueError("sweep needs at least one d and one h")
    policies = tuple(Policy.erwc(d, h, sampling=sampling) for d in ds for h in hs)
    config = ExperimentConfig(graph_spec, policies, graphs, starts, runs, base_seed,
                              step_cap, fractions=(), paired=paired)
    result = run_experiment(config, jobs)
    rows, best = [], {}
    for p in policies:
        rep = result.reports[p.token]
        rows.append((p.d, p.h, rep.mean_cs_norm, rep.mean_mnlcs))
        if p.d not in best or rep.mnl_sum < best[p.d][1]:
            best[p.d] = (p.h, rep.mnl_sum)
    return SweepResult(rows, {d: h for d, (h, _) in best.items()}, result)


def recommend_h(graph_stats):
    """Heuristic h interval ``(d_n / 3, d_n / 2)`` from the mean degree, kept above 1.

    Accepts a :class:`GraphStats` or the mean degree itself.
    """
    dn = float(getattr(graph_stats, "mean_degree", graph_stats))
    if not dn > 0:
        raise ValueError("mean degree must be positive")
    floor = math.nextafter(1.0, 2.0)
    low = max(dn / 3, floor)
    high = max(dn / 2, low)
    return low, high


def _policies(*tokens):
    return tuple(Policy.parse(t) for t in tokens)


PRESETS = {
    # one RGG instance, many runs
    "rgg-single": dict(graph=GraphSpec("rgg", n=900, radius_mult=2.0),
                       policies=_policies("srw", "rwc:2", "erwc:2:9"),
                       graphs=1, starts=2, runs=1000),
    # many RGG instances, 2 starts x 2 runs each
    "rgg-family": dict(graph=GraphSpec("rgg", n=900, radius_mult=2.0),
                       policies=_policies("rwc:2", "erwc:2:9", "rwc:3", "erwc:3:9"),
                       graphs=1000, starts=2, runs=2),
    "torus": dict(graph=GraphSpec("torus", rows=30, cols=30),
                  policies=_policies("srw", "rwc:2", "erwc:2:3", "rwc:3", "erwc:3:3",
                                     "rwc:4", "erwc:4:3"),
                  graphs=1000, starts=2, runs=2),
}


def preset(name, **overrides) -> ExperimentConfig:
    try:
        base = dict(PRESETS[name])
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    base.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**base)
