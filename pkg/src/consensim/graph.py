"""Undirected communication graphs and the small algebra the controllers need.

Agents exchange information over a fixed undirected graph.  Everything the
protocols use is derived from the oriented incidence matrix ``D``: the edge
difference operator ``D.T @ x`` (one row per edge, ``x_j - x_i`` with
``i < j``), the Laplacian ``L = D @ D.T`` and its algebraic connectivity
``lambda_2``, and the disagreement projector ``P = I - (1/n) 11^T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Graph",
    "build_graph",
    "incidence",
    "laplacian",
    "lambda2",
    "projector",
    "consensus_error",
    "is_connected",
    "path_graph",
]


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0 .. n-1``.

    Attributes
    ----------
    n : int
        Number of vertices.
    edges : tuple of (int, int)
        Sorted tuple of edges, each stored as ``(i, j)`` with ``i < j``.
        Construct via :func:`build_graph`, which validates and normalizes.
    """

    n: int
    edges: tuple = field(default=())

    @property
    def m(self) -> int:
        """Number of edges."""
        return len(self.edges)

    def neighbors(self, i: int) -> list:
        """Vertices adjacent to ``i``, ascending."""
        out = [j for (a, j) in self.edges if a == i]
        out += [a for (a, j) in self.edges if j == i]
        return sorted(out)


def build_graph(n: int, edges) -> Graph:
    """Validate and normalize an edge list into a :class:`Graph`.

    Parameters
    ----------
    n : int
        Number of vertices, ``n >= 1``.
    edges : iterable of pairs
        Undirected edges over vertices ``0 .. n-1``.  Orientation is
        irrelevant; ``(i, j)`` and ``(j, i)`` denote the same edge and
        duplicates collapse.

    Returns
    -------
    Graph

    Raises
    ------
    ValueError
        If ``n < 1``, an index is out of range, or an edge is a self-loop.
    """
    if n < 1:
        raise ValueError(f"graph needs at least one vertex, got n={n}")
    normalized = set()
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
        if i == j:
            raise ValueError(f"self-loop ({i}, {j}) not allowed")
        normalized.add((min(i, j), max(i, j)))
    return Graph(n=n, edges=tuple(sorted(normalized)))


def path_graph(n: int) -> Graph:
    """Path graph ``0 - 1 - ... - (n-1)``."""
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def incidence(g: Graph) -> np.ndarray:
    """Oriented incidence matrix ``D`` of shape ``(n, m)``.

    Column ``e`` for edge ``(i, j)`` with ``i < j`` has ``-1`` in row ``i``
    and ``+1`` in row ``j``; columns follow the sorted edge order.  With this
    orientation ``(D.T @ x)[e] = x[j] - x[i]``, and for any odd map ``s``
    (``tanh``, signed power, ``sign``) the per-vertex neighbor sum satisfies

        sum_{j in N(i)} s(x_i - x_j) = (D @ s(D.T @ x))[i].
    """
    D = np.zeros((g.n, g.m))
    for e, (i, j) in enumerate(g.edges):
        D[i, e] = -1.0
        D[j, e] = 1.0
    return D


def laplacian(g: Graph) -> np.ndarray:
    """Graph Laplacian ``L = D @ D.T`` (= degree matrix minus adjacency)."""
    D = incidence(g)
    return D @ D.T


def lambda2(g: Graph) -> float:
    """Algebraic connectivity: second-smallest Laplacian eigenvalue.

    ``lambda2(g) > 0`` iff the graph is connected; for a path on ``n``
    vertices the exact value is ``2 - 2*cos(pi/n)``.  Eigenvalues come from
    the symmetric eigensolver (tridiagonalization + QL) on ``L``.
    """
    if g.n == 1:
        return 0.0
    vals = np.linalg.eigvalsh(laplacian(g))
    return float(vals[1])


def projector(n: int) -> np.ndarray:
    """Disagreement projector ``P = I - (1/n) 11^T``.

    Symmetric idempotent; ``P @ x`` removes the mean of ``x``.  For a
    connected graph, ``||P @ x||^2 <= x.T @ L @ x / lambda2`` (Courant-
    Fischer on the complement of the consensus line).
    """
    if n < 1:
        raise ValueError(f"projector needs n >= 1, got {n}")
    return np.eye(n) - np.full((n, n), 1.0 / n)


def consensus_error(x: np.ndarray) -> float:
    """Norm of the disagreement component of stacked agent states.

    Parameters
    ----------
    x : ndarray, shape (N,) or (N, d)
        One row per agent.  The projector acts per state dimension.

    Returns
    -------
    float
        ``||x - mean(x)||`` (Frobenius norm over agents and dimensions).
        Zero iff all agents agree.
    """
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - x.mean(axis=0)))


def is_connected(g: Graph) -> bool:
    """Exact connectivity via union-find (no floating point)."""
    parent = list(range(g.n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in g.edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    return len({find(i) for i in range(g.n)}) == 1
