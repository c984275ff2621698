"""Exact expected cover steps of the simple random walk on small graphs.

The walk together with its visited set is an absorbing Markov chain on states
``(visited set S, current node v)``. Visited sets only grow, so the chain is
solved one set at a time from the largest down: for fixed ``S`` the unknowns
``E[S, v]`` satisfy a ``|S| x |S|`` linear system whose right-hand side only
refers to already solved supersets.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import InfiniteExpectation, OracleTooLarge
from .graph import is_connected

__all__ = ["MAX_ORACLE_NODES", "exact_cover_expectation", "exact_cover_time"]

MAX_ORACLE_NODES = 20


def _solver(graph):
    n = graph.n
    if n > MAX_ORACLE_NODES:
        raise OracleTooLarge(f"exact oracle limited to n <= {MAX_ORACLE_NODES}, got {n}")
    if not is_connected(graph):
        raise InfiniteExpectation("graph is disconnected; cover never completes")
    adj = graph.adjacency
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def expected(mask):
        """Expected remaining steps from each node of ``mask`` (NaN elsewhere)."""
        out = np.full(n, np.nan)
        members = [v for v in range(n) if mask >> v & 1]
        if mask == full:
            out[members] = 0.0
            return out
        pos = {v: i for i, v in enumerate(members)}
        k = len(members)
        a = np.eye(k)
        b = np.ones(k)
        for i, v in enumerate(members):
            p = 1.0 / len(adj[v])
            for u in adj[v]:
                if mask >> u & 1:
                    a[i, pos[u]] -= p
                else:
                    b[i] += p * expected(mask | 1 << u)[u]
        out[members] = np.linalg.solve(a, b)
        return out

    return expected


def exact_cover_expectation(graph, start: int) -> float:
    """Expected number of steps for a simple random walk from ``start`` to visit every node."""
    if not 0 <= start < graph.n:
        raise ValueError(f"start node {start} out of range 0..{graph.n - 1}")
    expected = _solver(graph)
    return float(expected(1 << start)[start])


def exact_cover_time(graph) -> float:
    """Worst case over start nodes of :func:`exact_cover_expectation`."""
    expected = _solver(graph)
    return max(float(expected(1 << v)[v]) for v in range(graph.n))
