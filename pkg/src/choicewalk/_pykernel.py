"""Pure-Python walk kernel.

This is both the fallback backend and the step-by-step implementation behind
:mod:`choicewalk.walk`. The compiled kernel in ``_ckernel.pyx`` mirrors it
draw for draw: given the same bit generator state, both return identical
results.

Random integers come from the raw 64-bit output of a numpy bit generator.
A bounded draw in ``[0, k)`` takes the top 32 bits and applies Lemire's
multiply-and-reject method, so it is exactly uniform and cheap to mirror in C.
"""
import numpy as np

from .errors import StuckWalkError

SRW, RWC, ERWC = 0, 1, 2

OK, CAP_EXCEEDED, STUCK = 0, 1, 2

_MASK32 = 0xFFFFFFFF
_TWO32 = 0x100000000


class BoundedDraw:
    __slots__ = ("_raw",)

    def __init__(self, bitgen):
        self._raw = bitgen.random_raw

    def __call__(self, k):
        m = (self._raw() >> 32) * k
        low = m & _MASK32
        if low < k:
            threshold = (_TWO32 - k) % k
            while low < threshold:
                m = (self._raw() >> 32) * k
                low = m & _MASK32
        return m >> 32


def sample_with_replacement(nbrs, d, draw):
    """Distinct nodes among ``d`` independent uniform draws from ``nbrs``, in draw order."""
    k = len(nbrs)
    out = []
    for _ in range(d):
        u = nbrs[draw(k)]
        if u not in out:
            out.append(u)
    return out


def sample_without_replacement(nbrs, d, draw):
    """Uniform ``min(d, len(nbrs))``-subset of ``nbrs`` (Floyd's algorithm)."""
    k = len(nbrs)
    picked = []
    for j in range(k - min(d, k), k):
        i = draw(j + 1)
        picked.append(j if i in picked else i)
    return [nbrs[i] for i in picked]


class WalkState:
    """Mutable state of one walk replicate.

    ``hval`` holds the ERWC metric scaled by ``h_den`` so every update and
    comparison stays in exact integer arithmetic.
    """

    def __init__(self, adjacency, kind, d, h_num, h_den, start, bitgen,
                 distinct=False, rwc_offset=0):
        n = len(adjacency)
        if not 0 <= start < n:
            raise ValueError(f"start node {start} out of range 0..{n - 1}")
        self.adj = adjacency
        self.deg = [len(a) for a in adjacency]
        self.kind = kind
        self.d = d
        self.h_num = h_num
        self.h_den = h_den
        self.current = start
        self.t = 0
        self.visits = [0] * n
        self.visits[start] = 1
        self.visited = [False] * n
        self.visited[start] = True
        self.covered = 1
        self.hval = [0] * n
        if kind == ERWC:
            self.hval[start] = h_num
        self.draw = BoundedDraw(bitgen)
        self.distinct = distinct
        self.rwc_offset = rwc_offset
        self._sample = sample_without_replacement if distinct else sample_with_replacement
        self.last_candidates = None

    @property
    def n(self):
        return len(self.adj)

    def sample_candidates(self, v, d):
        return self._sample(self.adj[v], d, self.draw)

    def _argmin(self, cands, num):
        """Minimize ``num[u] / deg[u]``; ties broken uniformly via reservoir draws."""
        deg = self.deg
        best = cands[0]
        bn, bd = num(best), deg[best]
        ties = 1
        for u in cands[1:]:
            un, ud = num(u), deg[u]
            lhs, rhs = un * bd, bn * ud
            if lhs < rhs:
                best, bn, bd, ties = u, un, ud, 1
            elif lhs == rhs:
                ties += 1
                if self.draw(ties) == 0:
                    best, bn, bd = u, un, ud
        return best

    def _advance(self, nxt):
        self.t += 1
        self.current = nxt
        self.visits[nxt] += 1
        if not self.visited[nxt]:
            self.visited[nxt] = True
            self.covered += 1

    def _check_stuck(self):
        if not self.adj[self.current]:
            raise StuckWalkError(self.current)

    def step_srw(self):
        self._check_stuck()
        nbrs = self.adj[self.current]
        nxt = nbrs[self.draw(len(nbrs))]
        self.last_candidates = [nxt]
        self._advance(nxt)
        return nxt

    def step_rwc(self):
        self._check_stuck()
        cands = self.sample_candidates(self.current, self.d)
        self.last_candidates = cands
        visits = self.visits
        off = self.rwc_offset
        nxt = self._argmin(cands, lambda u: visits[u] + off)
        self._advance(nxt)
        return nxt

    def step_erwc(self):
        self._check_stuck()
        v = self.current
        cands = self.sample_candidates(v, self.d)
        fresh = [u for u in cands if not self.visited[u]]
        if fresh:
            cands = fresh
        self.last_candidates = cands
        hval = self.hval
        nxt = self._argmin(cands, hval.__getitem__)
        q = self.h_den
        for k in self.adj[v]:
            hval[k] += q
        # nxt is a neighbor of v and got +q above; it should get +h only
        hval[nxt] += self.h_num - q
        self._advance(nxt)
        return nxt

    def step(self):
        if self.kind == SRW:
            return self.step_srw()
        if self.kind == RWC:
            return self.step_rwc()
        return self.step_erwc()


def run_walk(graph, kind, d, hp, hq, distinct, rwc_offset, start, bitgen, step_cap, targets):
    """Walk until every node is visited or ``step_cap`` steps were taken.

    ``targets`` are ascending covered-node counts; the returned partial list
    gives the first step at which each was reached (``-1`` if never).
    Returns ``(status, steps, partial, visits, covered, current)``.
    """
    adj = graph.adjacency
    n = len(adj)
    state = WalkState(adj, kind, d, hp, hq, start, bitgen, distinct, rwc_offset)
    targets = [int(x) for x in targets]
    partial = [-1] * len(targets)
    j = 0
    while j < len(targets) and targets[j] <= 1:
        partial[j] = 0
        j += 1
    step = state.step_srw if kind == SRW else state.step_rwc if kind == RWC else state.step_erwc
    status = OK
    while state.covered < n:
        if state.t >= step_cap:
            status = CAP_EXCEEDED
            break
        if not adj[state.current]:
            status = STUCK
            break
        before = state.covered
        step()
        if state.covered != before:
            while j < len(targets) and targets[j] <= state.covered:
                partial[j] = state.t
                j += 1
    return status, state.t, partial, np.asarray(state.visits, dtype=np.int64), state.covered, state.current


def run_batch(graph, kind, d, hp, hq, distinct, rwc_offset, start, bitgen, step_cap, replicates):
    """Run ``replicates`` walks back to back on one stream.

    Returns ``(status, cover_steps, max_loads)``; on failure the arrays are
    truncated to the completed replicates.
    """
    cover = np.zeros(replicates, dtype=np.int64)
    loads = np.zeros(replicates, dtype=np.int64)
    for r in range(replicates):
        status, t, _, visits, _, _ = run_walk(graph, kind, d, hp, hq, distinct, rwc_offset, start,
                                               bitgen, step_cap, ())
        if status != OK:
            return status, cover[:r], loads[:r]
        cover[r] = t
        loads[r] = visits.max()
    return OK, cover, loads
