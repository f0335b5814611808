"""Combinatorics of the rooted comb graph.

Vertices are integer pairs (k, l) with k, l >= 0.  The horizontal spine is
the set of vertices with l = 0; above each spine vertex (k, 0) hangs an
infinite tooth (k, 1), (k, 2), ...  The root is (0, 0).

Every vertex is reached from the root by a unique directed path, so the
graph is a tree when edges are oriented away from the root:

* a spine vertex (k, 0) has two successors, (k+1, 0) then (k, 1),
* a tooth vertex (k, l), l >= 1, has the single successor (k, l+1).

``level(n)`` collects the vertices at graph distance n from the root and
``volume(n)`` the ball of radius n.  Both are returned in a fixed canonical
order that every tensor factorization in this package relies on.
"""

from __future__ import annotations

import enum
from typing import Iterable, NamedTuple


class Vertex(NamedTuple):
    """A comb-graph vertex (k, l): spine position k, tooth height l."""

    k: int
    l: int

    @property
    def level(self) -> int:
        """Graph distance from the root, equal to k + l."""
        return self.k + self.l

    def to_json(self) -> list[int]:
        return [self.k, self.l]


class VertexClass(enum.Enum):
    """Branching class of a vertex: L1 = tooth (one successor), L2 = spine (two)."""

    L1 = "L1"
    L2 = "L2"


def as_vertex(obj) -> Vertex:
    """Coerce a (k, l) pair to a Vertex, rejecting negative coordinates."""
    v = Vertex(int(obj[0]), int(obj[1]))
    if v.k < 0 or v.l < 0:
        raise ValueError(f"vertex coordinates must be non-negative, got {tuple(obj)}")
    return v


def is_spine(v) -> bool:
    return as_vertex(v).l == 0


def classify(v) -> VertexClass:
    """Return L2 for spine vertices and L1 for tooth vertices."""
    return VertexClass.L2 if is_spine(v) else VertexClass.L1


def successors(v) -> tuple[Vertex, ...]:
    """Ordered successor list of ``v``.

    Spine vertices continue the spine first and start their tooth second;
    this order fixes the tensor-factor order of every three-site kernel.
    """
    v = as_vertex(v)
    if v.l == 0:
        return (Vertex(v.k + 1, 0), Vertex(v.k, 1))
    return (Vertex(v.k, v.l + 1),)


def level(n: int) -> tuple[Vertex, ...]:
    """Vertices at distance n from the root, ordered (n,0), (n-1,1), ..., (0,n)."""
    if n < 0:
        raise ValueError("level index must be non-negative")
    return tuple(Vertex(n - l, l) for l in range(n + 1))


def volume(n: int) -> tuple[Vertex, ...]:
    """The ball of radius n: levels 0..n concatenated, (n+1)(n+2)/2 vertices."""
    if n < 0:
        raise ValueError("volume index must be non-negative")
    return tuple(v for m in range(n + 1) for v in level(m))


def translate(v, n: int) -> Vertex:
    """Shift a vertex n steps along the spine: (k, l) -> (k+n, l)."""
    v = as_vertex(v)
    if n < 0:
        raise ValueError("translation step must be non-negative")
    return Vertex(v.k + n, v.l)


def canonical_key(v) -> tuple[int, int]:
    """Sort key realizing the volume order: by level, then by tooth height."""
    v = as_vertex(v)
    return (v.k + v.l, v.l)


def canonical_order(vertices: Iterable) -> tuple[Vertex, ...]:
    """Sort distinct vertices into the canonical volume order."""
    vs = tuple(as_vertex(v) for v in vertices)
    if len(set(vs)) != len(vs):
        raise ValueError("duplicate vertices")
    return tuple(sorted(vs, key=canonical_key))
