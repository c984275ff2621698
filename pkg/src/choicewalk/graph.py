"""Undirected graphs in compressed adjacency form, plus the generators we study.

Node ids are dense integers ``0..n-1``. A :class:`Graph` stores neighbors in
CSR layout (``indptr``/``indices``) so the compiled kernel can walk it without
conversion; the pure-Python path uses the cached :attr:`Graph.adjacency`.
"""
from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import GenerationError, GraphParseError

__all__ = [
    "Graph",
    "GraphStats",
    "connectivity_radius",
    "generate_complete",
    "generate_cycle",
    "generate_path",
    "generate_rgg",
    "generate_star",
    "generate_torus",
    "is_connected",
    "load_edge_list",
    "save_edge_list",
    "stats",
]


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    @classmethod
    def from_adjacency(cls, adjacency) -> "Graph":
        """Build from per-node neighbor iterables, validating symmetry."""
        n = len(adjacency)
        if n < 1:
            raise ValueError("graph needs at least one node")
        rows = []
        for v, nbrs in enumerate(adjacency):
            row = sorted(int(u) for u in nbrs)
            for i, u in enumerate(row):
                if not 0 <= u < n:
                    raise ValueError(f"neighbor {u} of node {v} out of range")
                if u == v:
                    raise ValueError(f"self-loop at node {v}")
                if i and row[i - 1] == u:
                    raise ValueError(f"duplicate neighbor {u} of node {v}")
            rows.append(row)
        sets = [set(r) for r in rows]
        for v, row in enumerate(rows):
            for u in row:
                if v not in sets[u]:
                    raise ValueError(f"edge {v}-{u} is not symmetric")
        return cls._from_rows(rows)

    @classmethod
    def from_edges(cls, n, edges) -> "Graph":
        if n < 1:
            raise ValueError("graph needs at least one node")
        adj = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if v in adj[u]:
                raise ValueError(f"duplicate edge ({u}, {v})")
            adj[u].add(v)
            adj[v].add(u)
        return cls._from_rows([sorted(s) for s in adj])

    @classmethod
    def _from_rows(cls, rows):
        degrees = np.fromiter((len(r) for r in rows), dtype=np.int64, count=len(rows))
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        indices = np.fromiter(
            (u for r in rows for u in r), dtype=np.int64, count=int(indptr[-1])
        )
        return cls(len(rows), indptr, indices)

    @property
    def m(self) -> int:
        return int(self.indptr[-1]) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.diff(self.indptr)
        deg.setflags(write=False)
        return deg

    @cached_property
    def adjacency(self) -> tuple:
        ptr = self.indptr.tolist()
        idx = self.indices.tolist()
        return tuple(idx[ptr[v]:ptr[v + 1]] for v in range(self.n))

    def neighbors(self, v: int) -> list:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def edges(self):
        """Yield each edge once as ``(u, v)`` with ``u < v``, ascending."""
        for u, row in enumerate(self.adjacency):
            for v in row:
                if u < v:
                    yield u, v

    @cached_property
    def fingerprint(self) -> str:
        return hashlib.sha256(save_edge_list(self).encode("ascii")).hexdigest()[:16]

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash(self.fingerprint)

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class GraphStats:
    mean_degree: Fraction
    min_degree: int
    max_degree: int
    connected: bool

    def as_dict(self):
        return {
            "mean_degree": float(self.mean_degree),
            "min_degree": self.min_degree,
            "max_degree": self.max_degree,
            "connected": self.connected,
        }


def connectivity_radius(n: int) -> float:
    """Critical connectivity radius ``sqrt(ln n / (pi n))`` for n uniform points."""
    if n < 2:
        raise ValueError(f"connectivity radius needs n >= 2, got {n}")
    return math.sqrt(math.log(n) / (math.pi * n))


def _geometric_edges(points, radius):
    # squared distances, so "at most r" is exact for representable inputs
    r2 = radius * radius
    n = len(points)
    us, vs = [], []
    chunk = max(1, 4_000_000 // max(n, 1))
    for lo in range(0, n, chunk):
        block = points[lo:lo + chunk]
        diff = block[:, None, :] - points[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        i, j = np.nonzero(d2 <= r2)
        i = i + lo
        keep = i < j
        us.append(i[keep])
        vs.append(j[keep])
    return np.concatenate(us), np.concatenate(vs)


def graph_from_points(points, radius) -> Graph:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array")
    u, v = _geometric_edges(points, radius)
    return _from_edge_arrays(len(points), u, v)


def _from_edge_arrays(n, u, v):
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return Graph(n, indptr, dst.astype(np.int64))


def generate_rgg(n, radius, rng, require_connected=True, max_retries=100):
    """Random geometric graph on the unit square.

    Returns ``(graph, points)``. With ``require_connected`` the point set is
    resampled until the graph is connected; after ``max_retries`` failed
    draws a :class:`GenerationError` is raised.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 < radius <= math.sqrt(2):
        raise ValueError(f"radius must lie in (0, sqrt(2)], got {radius}")
    rng = np.random.default_rng(rng)
    attempts = max_retries if require_connected else 1
    for _ in range(max(attempts, 1)):
        points = rng.random((n, 2))
        graph = graph_from_points(points, radius)
        if not require_connected or is_connected(graph):
            return graph, points
    raise GenerationError(f"no connected G({n}, {radius:.6g}) sample", max_retries)


def generate_torus(rows, cols) -> Graph:
    """``rows x cols`` mesh with wrap-around; node id is ``row * cols + col``."""
    if rows < 3 or cols < 3:
        raise ValueError(f"torus needs rows, cols >= 3 (got {rows}x{cols})")
    adj = []
    for r in range(rows):
        for c in range(cols):
            adj.append({
                ((r - 1) % rows) * cols + c,
                ((r + 1) % rows) * cols + c,
                r * cols + (c - 1) % cols,
                r * cols + (c + 1) % cols,
            })
    return Graph._from_rows([sorted(s) for s in adj])


def generate_complete(n) -> Graph:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Graph._from_rows([[u for u in range(n) if u != v] for v in range(n)])


def generate_path(n) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def generate_cycle(n) -> Graph:
    if n < 3:
        raise ValueError(f"cycle needs n >= 3, got {n}")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def generate_star(leaves) -> Graph:
    """Star with centre 0 and leaves ``1..leaves``."""
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def is_connected(graph: Graph) -> bool:
    adj = graph.adjacency
    seen = [False] * graph.n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if not seen[u]:
                seen[u] = True
                count += 1
                queue.append(u)
    return count == graph.n


def stats(graph: Graph) -> GraphStats:
    deg = graph.degrees
    return GraphStats(
        mean_degree=Fraction(int(deg.sum()), graph.n),
        min_degree=int(deg.min()),
        max_degree=int(deg.max()),
        connected=is_connected(graph),
    )


def save_edge_list(graph: Graph) -> str:
    lines = [f"{graph.n} {graph.m}"]
    lines.extend(f"{u} {v}" for u, v in graph.edges())
    return "\n".join(lines) + "\n"


def load_edge_list(text: str) -> Graph:
    """Parse the ``n m`` header followed by ``m`` lines of ``u v`` with ``u < v``."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise GraphParseError("empty input", 1)

    def ints(lineno, line):
        parts = line.split(" ")
        if len(parts) != 2 or not all(p.isascii() and p.isdigit() for p in parts):
            raise GraphParseError(f"expected two non-negative integers, got {line!r}", lineno)
        return int(parts[0]), int(parts[1])

    n, m = ints(1, lines[0])
    if n < 1:
        raise GraphParseError("node count must be >= 1", 1)
    if len(lines) - 1 != m:
        raise GraphParseError(f"header declares {m} edges, found {len(lines) - 1}", len(lines))
    adj = [set() for _ in range(n)]
    for lineno, line in enumerate(lines[1:], start=2):
        u, v = ints(lineno, line)
        if u >= n or v >= n:
            raise GraphParseError(f"node id out of range 0..{n - 1}", lineno)
        if u == v:
            raise GraphParseError(f"self-loop at node {u}", lineno)
        if u > v:
            raise GraphParseError(f"edge must be written with u < v, got {u} {v}", lineno)
        if v in adj[u]:
            raise GraphParseError(f"duplicate edge {u} {v}", lineno)
        adj[u].add(v)
        adj[v].add(u)
    return Graph._from_rows([sorted(s) for s in adj])
