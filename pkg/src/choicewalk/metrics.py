"""Per-run records and their aggregation into cover / load statistics."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = ["ExperimentReport", "RunRecord", "aggregate", "improvement", "visit_histogram"]


@dataclass(frozen=True, eq=False)
class RunRecord:
    """Outcome of one walk replicate, taken at the moment of full cover.

    ``visit_counts`` is a read-only int64 array indexed by node.
    """

    cover_steps: int
    partial_cover_steps: tuple
    visit_counts: np.ndarray
    max_node_load: int
    start: int
    replicate_index: int = 0
    seed: int = 0
    graph_index: int = 0
    graph_hash: str = ""

    def __post_init__(self):
        vc = np.array(self.visit_counts, dtype=np.int64)
        vc.setflags(write=False)
        object.__setattr__(self, "visit_counts", vc)
        object.__setattr__(self, "partial_cover_steps", tuple(self.partial_cover_steps))

    def __eq__(self, other):
        if not isinstance(other, RunRecord):
            return NotImplemented
        return self._key() == other._key() and np.array_equal(self.visit_counts, other.visit_counts)

    def _key(self):
        return (self.cover_steps, self.partial_cover_steps, self.max_node_load, self.start,
                self.replicate_index, self.seed, self.graph_index, self.graph_hash)

    def to_dict(self):
        return {
            "cover_steps": self.cover_steps,
            "partial_cover_steps": list(self.partial_cover_steps),
            "visit_counts": self.visit_counts.tolist(),
            "max_node_load": self.max_node_load,
            "start": self.start,
            "replicate_index": self.replicate_index,
            "seed": self.seed,
            "graph_index": self.graph_index,
            "graph_hash": self.graph_hash,
        }


@dataclass(frozen=True)
class ExperimentReport:
    """Statistics over R replicates on graphs with n nodes.

    ``*_norm`` values are step counts divided by n. ``ct_norm`` and ``mnlct``
    come from the slowest observed run (the empirical cover time), ``bc_*``
    from the fastest one.
    """

    n: int
    replicates: int
    mean_cs_norm: float
    mean_mnlcs: float
    ct_norm: float
    mnlct: int
    bc_cs_norm: float
    bc_mnlcs: int
    cs_se_norm: float
    mnlcs_se: float
    fractions: tuple
    partial_cover_curve: tuple
    visit_distribution: tuple
    mnl_distribution: tuple
    cs_distribution: tuple
    cs_sum: int = field(repr=False, default=0)
    mnl_sum: int = field(repr=False, default=0)

    def summary(self):
        return {
            "R": self.replicates,
            "mean_cs_norm": self.mean_cs_norm,
            "mean_mnlcs": self.mean_mnlcs,
            "ct_norm": self.ct_norm,
            "mnlct": self.mnlct,
            "bc_cs_norm": self.bc_cs_norm,
            "bc_mnlcs": self.bc_mnlcs,
        }


def _std_error(values):
    # exact integer sums keep the result independent of record order
    k = len(values)
    if k < 2:
        return 0.0
    total = sum(int(x) for x in values)
    squares = sum(int(x) * int(x) for x in values)
    variance = Fraction(k * squares - total * total, k * (k - 1))
    return math.sqrt(variance / k)


def aggregate(records, n, fractions=()) -> ExperimentReport:
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    R = len(records)
    cs = np.array([r.cover_steps for r in records], dtype=np.int64)
    mnl = np.array([r.max_node_load for r in records], dtype=np.int64)
    cs_sum, mnl_sum = int(cs.sum()), int(mnl.sum())

    worst, best = int(cs.max()), int(cs.min())
    # ties on cover steps resolved by load so the result does not depend on record order
    mnlct = int(mnl[cs == worst].max())
    bc_mnlcs = int(mnl[cs == best].min())

    fractions = tuple(fractions)
    curve = []
    for j in range(len(fractions)):
        steps = [r.partial_cover_steps[j] for r in records]
        curve.append(float(Fraction(sum(steps), R * n)))

    return ExperimentReport(
        n=n,
        replicates=R,
        mean_cs_norm=float(Fraction(cs_sum, R * n)),
        mean_mnlcs=float(Fraction(mnl_sum, R)),
        ct_norm=float(Fraction(worst, n)),
        mnlct=mnlct,
        bc_cs_norm=float(Fraction(best, n)),
        bc_mnlcs=bc_mnlcs,
        cs_se_norm=_std_error(cs) / n,
        mnlcs_se=_std_error(mnl),
        fractions=fractions,
        partial_cover_curve=tuple(curve),
        visit_distribution=tuple(visit_histogram(records)),
        mnl_distribution=tuple(sorted(mnl.tolist())),
        cs_distribution=tuple(sorted(cs.tolist())),
        cs_sum=cs_sum,
        mnl_sum=mnl_sum,
    )


def improvement(baseline, enhanced):
    """Percentage reduction of ``enhanced`` relative to ``baseline``."""
    if not baseline > 0:
        raise ValueError(f"baseline must be positive, got {baseline}")
    return (baseline - enhanced) / baseline * 100.0


def visit_histogram(records):
    """Histogram (bin width 1, from 0) of the mean visit count of each node.

    Node means are taken within each graph instance; nodes of different
    instances are then pooled. ``result[k]`` counts nodes whose mean lies in
    ``[k, k+1)``.
    """
    sums = {}
    counts = defaultdict(int)
    for r in records:
        vc = r.visit_counts
        if r.graph_index in sums:
            sums[r.graph_index] = sums[r.graph_index] + vc
        else:
            sums[r.graph_index] = vc.copy()
        counts[r.graph_index] += 1
    hist = []
    for g in sorted(sums):
        bins = sums[g] // counts[g]
        top = int(bins.max()) + 1 if len(bins) else 0
        if top > len(hist):
            hist.extend([0] * (top - len(hist)))
        for b, c in zip(*np.unique(bins, return_counts=True)):
            hist[int(b)] += int(c)
    return hist
