"""Simple, choice and enhanced-choice random walks run to full cover.

The hot loop lives in a kernel module. The compiled kernel (``_ckernel``) is
used when it was built; otherwise, or when ``CHOICEWALK_PURE_PYTHON=1`` is
set, the pure-Python ``_pykernel`` runs instead. Both consume the bit
generator identically, so a seed gives the same walk on either backend.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _pykernel
from ._pykernel import (
    ERWC,
    RWC,
    SRW,
    BoundedDraw,
    WalkState,
    sample_with_replacement,
    sample_without_replacement,
)
from .errors import CapExceededError, StuckWalkError
from .metrics import RunRecord

__all__ = [
    "BACKEND",
    "DEFAULT_FRACTIONS",
    "Policy",
    "WalkState",
    "cover_step_samples",
    "cover_targets",
    "default_step_cap",
    "get_backend",
    "init_walk",
    "make_bitgen",
    "run_replicate",
    "sample_candidates",
]

_KERNELS = {"python": _pykernel}
if not os.environ.get("CHOICEWALK_PURE_PYTHON"):
    try:
        from . import _ckernel

        _KERNELS["compiled"] = _ckernel
    except ImportError:
        pass

BACKEND = "compiled" if "compiled" in _KERNELS else "python"

DEFAULT_FRACTIONS = tuple(Fraction(k, 20) for k in range(1, 21))

_KIND_CODES = {"srw": SRW, "rwc": RWC, "erwc": ERWC}


def get_backend(name=None):
    """Return the kernel module for ``name`` ("compiled", "python" or None for the default)."""
    if name is None:
        name = BACKEND
    try:
        return _KERNELS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} is not available (have {sorted(_KERNELS)})") from None


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


SAMPLING_MODES = ("replace", "distinct")


@dataclass(frozen=True)
class Policy:
    """Step rule: ``srw``, ``rwc`` with ``d`` choices, or ``erwc`` with ``d`` and ``h``.

    ``sampling`` picks how the ``d`` candidates are drawn: ``"replace"``
    makes ``d`` independent draws and drops repeats, ``"distinct"`` draws a
    uniform subset of ``min(d, deg)`` neighbors. ``rwc_offset`` is added to the
    visit count in the RWC score ``(visits + offset) / degree``; with 0 an
    unvisited neighbor always scores lowest.
    """

    kind: str
    d: int = 1
    h: Fraction = Fraction(0)
    sampling: str = "replace"
    rwc_offset: int = 0

    def __post_init__(self):
        if self.sampling not in SAMPLING_MODES:
            raise ValueError(f"sampling must be one of {SAMPLING_MODES}, got {self.sampling!r}")
        if self.rwc_offset not in (0, 1):
            raise ValueError(f"rwc_offset must be 0 or 1, got {self.rwc_offset!r}")
        if self.kind not in _KIND_CODES:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if not isinstance(self.d, int) or self.d < 1:
            raise ValueError(f"d must be an integer >= 1, got {self.d!r}")
        object.__setattr__(self, "h", _as_fraction(self.h))
        if self.kind == "erwc" and not self.h > 1:
            raise ValueError(f"h must be > 1, got {self.h}")
        if self.kind == "srw":
            object.__setattr__(self, "d", 1)
        if self.kind != "erwc":
            object.__setattr__(self, "h", Fraction(0))

    @classmethod
    def srw(cls):
        return cls("srw")

    @classmethod
    def rwc(cls, d, **options):
        return cls("rwc", d, **options)

    @classmethod
    def erwc(cls, d, h, **options):
        return cls("erwc", d, h, **options)

    @classmethod
    def parse(cls, token: str, **options) -> "Policy":
        """Parse ``srw``, ``rwc:D`` or ``erwc:D:H`` (H may be ``9``, ``4.5`` or ``9/2``)."""
        parts = token.strip().lower().split(":")
        kind, args = parts[0], parts[1:]
        expected = {"srw": 0, "rwc": 1, "erwc": 2}.get(kind)
        if expected is None or len(args) != expected:
            raise ValueError(f"bad policy {token!r}; expected srw, rwc:D or erwc:D:H")
        try:
            d = int(args[0]) if args else 1
            h = Fraction(args[1]) if len(args) > 1 else Fraction(0)
        except ValueError:
            raise ValueError(f"bad policy {token!r}: non-numeric parameter") from None
        return cls(kind, d, h, **options)

    @property
    def distinct(self) -> bool:
        return self.sampling == "distinct"

    @property
    def code(self) -> int:
        return _KIND_CODES[self.kind]

    @property
    def token(self) -> str:
        if self.kind == "srw":
            return "srw"
        if self.kind == "rwc":
            return f"rwc:{self.d}"
        return f"erwc:{self.d}:{self.h}"

    @property
    def label(self) -> str:
        if self.kind == "srw":
            return "SRW"
        if self.kind == "rwc":
            return f"RWC({self.d})"
        return f"ERWC({self.d},h={self.h})"

    def __str__(self):
        return self.token


def make_bitgen(rng=None):
    """Coerce a seed, SeedSequence, Generator or BitGenerator to a bit generator."""
    if isinstance(rng, np.random.BitGenerator):
        return rng
    if isinstance(rng, np.random.Generator):
        return rng.bit_generator
    return np.random.PCG64(rng)


def default_step_cap(n: int) -> int:
    return 10_000 * n


def cover_targets(n, fractions):
    """Covered-node counts ``ceil(f * n)`` for each fraction, computed exactly."""
    out = []
    for f in fractions:
        f = _as_fraction(f)
        if not 0 < f <= 1:
            raise ValueError(f"cover fraction must lie in (0, 1], got {f}")
        out.append(math.ceil(f * n))
    return out


def init_walk(graph, policy: Policy, start: int, rng=None) -> WalkState:
    """Fresh walk state with the start node counted as the first visit."""
    if not 0 <= start < graph.n:
        raise ValueError(f"start node {start} out of range 0..{graph.n - 1}")
    h = policy.h
    return WalkState(graph.adjacency, policy.code, policy.d, h.numerator, h.denominator,
                     start, make_bitgen(rng), policy.distinct, policy.rwc_offset)


def sample_candidates(graph, current, d, rng=None, sampling="replace"):
    """Candidate set M drawn from the neighbors of ``current``; ``1 <= |M| <= min(d, deg)``."""
    nbrs = graph.adjacency[current]
    if not nbrs:
        raise StuckWalkError(current)
    sample = sample_without_replacement if sampling == "distinct" else sample_with_replacement
    return sample(nbrs, d, BoundedDraw(make_bitgen(rng)))


def _traced_walk(graph, policy, start, bitgen, step_cap, targets, trace):
    state = init_walk(graph, policy, start, bitgen)
    partial = [-1] * len(targets)
    j = 0
    while j < len(targets) and targets[j] <= 1:
        partial[j] = 0
        j += 1
    status = _pykernel.OK
    while state.covered < graph.n:
        if state.t >= step_cap:
            status = _pykernel.CAP_EXCEEDED
            break
        if not graph.adjacency[state.current]:
            status = _pykernel.STUCK
            break
        v = state.current
        pre = list(state.hval if policy.kind == "erwc" else state.visits)
        nxt = state.step()
        cands = state.last_candidates
        if policy.kind == "srw":
            scores = [None]
        elif policy.kind == "rwc":
            scores = [(pre[u] + policy.rwc_offset) / graph.degree(u) for u in cands]
        else:
            scores = [pre[u] / policy.h.denominator / graph.degree(u) for u in cands]
        trace.write(json.dumps({"t": state.t, "from": v, "candidates": cands,
                                "chosen": nxt, "scores": scores}) + "\n")
        while j < len(targets) and targets[j] <= state.covered:
            partial[j] = state.t
            j += 1
    visits = np.asarray(state.visits, dtype=np.int64)
    return status, state.t, partial, visits, state.covered, state.current


def run_replicate(graph, policy: Policy, start: int, rng=None, step_cap=None,
                  fractions=DEFAULT_FRACTIONS, *, backend=None, trace=None,
                  replicate_index=0, seed=0, graph_index=0) -> RunRecord:
    """Walk from ``start`` until every node has been visited.

    ``partial_cover_steps[j]`` is the first step at which ``ceil(f_j * n)``
    nodes were covered. Raises :class:`CapExceededError` (carrying the partial
    record) if ``step_cap`` steps pass first. When ``trace`` is a writable
    text stream, one JSON line per step is written there and the pure-Python
    path is used.
    """
    if step_cap is None:
        step_cap = default_step_cap(graph.n)
    if step_cap < 1:
        raise ValueError("step_cap must be >= 1")
    bitgen = make_bitgen(rng)
    targets = cover_targets(graph.n, fractions)
    order = sorted(range(len(targets)), key=targets.__getitem__)
    sorted_targets = [targets[i] for i in order]
    if trace is not None:
        result = _traced_walk(graph, policy, start, bitgen, step_cap, sorted_targets, trace)
    else:
        h = policy.h
        result = get_backend(backend).run_walk(
            graph, policy.code, policy.d, h.numerator, h.denominator, policy.distinct,
            policy.rwc_offset, start, bitgen, step_cap, sorted_targets,
        )
    status, steps, partial_sorted, visits, covered, current = result
    partial = [0] * len(targets)
    for pos, i in enumerate(order):
        partial[i] = int(partial_sorted[pos])
    if status == _pykernel.STUCK:
        raise StuckWalkError(current)
    record = RunRecord(
        cover_steps=int(steps),
        partial_cover_steps=tuple(partial),
        visit_counts=visits,
        max_node_load=int(visits.max()),
        start=start,
        replicate_index=replicate_index,
        seed=seed,
        graph_index=graph_index,
        graph_hash=graph.fingerprint,
    )
    if status == _pykernel.CAP_EXCEEDED:
        raise CapExceededError(record, int(covered))
    return record


def cover_step_samples(graph, policy: Policy, start: int, rng, replicates: int,
                       step_cap=None, *, backend=None):
    """Cover steps and max node loads of ``replicates`` walks sharing one stream.

    Faster than repeated :func:`run_replicate` calls when only these two
    numbers are needed.
    """
    if step_cap is None:
        step_cap = default_step_cap(graph.n)
    h = policy.h
    status, cover, loads = get_backend(backend).run_batch(
        graph, policy.code, policy.d, h.numerator, h.denominator, policy.distinct,
        policy.rwc_offset, start, make_bitgen(rng), step_cap, replicates,
    )
    if status == _pykernel.STUCK:
        raise StuckWalkError(start)
    if status == _pykernel.CAP_EXCEEDED:
        raise RuntimeError(f"step cap {step_cap} exceeded after {len(cover)} replicates")
    return cover, loads
