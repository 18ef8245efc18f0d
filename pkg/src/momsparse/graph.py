"""Support graphs, clique enumeration, edge covers and chordal extensions."""
from __future__ import annotations

from itertools import combinations
from typing import FrozenSet, Iterable, List, Sequence, Tuple

import numpy as np

Edge = Tuple[int, int]


def _canon(i: int, j: int) -> Edge:
    if i == j:
        raise ValueError(f"loop at vertex {i}")
    return (i, j) if i < j else (j, i)


class Graph:
    """Simple undirected graph on vertices ``0..n-1``."""

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        self.n = int(n)
        es = set()
        for e in edges:
            i, j = int(e[0]), int(e[1])
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge {e} out of range")
            es.add(_canon(i, j))
        self.edges: FrozenSet[Edge] = frozenset(es)
        adj = [set() for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        self.adj: Tuple[FrozenSet[int], ...] = tuple(frozenset(a) for a in adj)

    def has_edge(self, i: int, j: int) -> bool:
        return i != j and _canon(i, j) in self.edges

    def nonedges(self) -> List[Edge]:
        return [(i, j) for i, j in combinations(range(self.n), 2) if (i, j) not in self.edges]

    def is_clique(self, vs: Iterable[int]) -> bool:
        vs = list(vs)
        return all(self.has_edge(i, j) for i, j in combinations(vs, 2))

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in self.adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, |E|={len(self.edges)})"


class BipartiteGraph:
    """Bipartite graph with left side ``0..m-1`` and right side ``m..m+n-1``."""

    def __init__(self, m: int, n: int, edges: Iterable[Sequence[int]] = ()):
        self.m, self.n = int(m), int(n)
        es = set()
        for e in edges:
            i, j = int(e[0]), int(e[1])
            if i > j:
                i, j = j, i
            if not (0 <= i < m <= j < m + n):
                raise ValueError(f"edge {e} does not cross the bipartition")
            es.add((i, j))
        self.edges: FrozenSet[Edge] = frozenset(es)

    @property
    def size(self) -> int:
        return self.m + self.n

    def nonedges(self) -> List[Edge]:
        return [(i, j) for i in range(self.m) for j in range(self.m, self.m + self.n)
                if (i, j) not in self.edges]

    def cross_completion(self) -> Graph:
        """Add every within-side pair; cliques of the result are bicliques."""
        within = list(combinations(range(self.m), 2))
        within += list(combinations(range(self.m, self.m + self.n), 2))
        return Graph(self.size, list(self.edges) + within)

    def __repr__(self) -> str:
        return f"BipartiteGraph(m={self.m}, n={self.n}, |E|={len(self.edges)})"


def _check_symmetric(A: np.ndarray) -> None:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")


def support_graph(A, zero_tol: float = 0.0) -> Graph:
    """Graph with an edge ``{i, j}`` whenever ``|A[i, j]| > zero_tol``, ``i != j``."""
    A = np.asarray(A, dtype=float)
    _check_symmetric(A)
    n = A.shape[0]
    idx = np.argwhere(np.triu(np.abs(A) > zero_tol, k=1))
    return Graph(n, [tuple(e) for e in idx])


def bipartite_support(M, zero_tol: float = 0.0) -> BipartiteGraph:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    m, n = M.shape
    idx = np.argwhere(np.abs(M) > zero_tol)
    return BipartiteGraph(m, n, [(int(i), m + int(j)) for i, j in idx])


# -- clique enumeration ------------------------------------------------------

def _degeneracy_order(adj) -> List[int]:
    n = len(adj)
    deg = [len(a) for a in adj]
    removed = [False] * n
    order = []
    for _ in range(n):
        v = min((u for u in range(n) if not removed[u]), key=lambda u: (deg[u], u))
        order.append(v)
        removed[v] = True
        for w in adj[v]:
            if not removed[w]:
                deg[w] -= 1
    return order


def _bron_kerbosch(adj, R, P, X, out):
    if not P and not X:
        out.append(tuple(sorted(R)))
        return
    # Tomita pivot: maximise |P ∩ N(u)|
    pivot = max(P | X, key=lambda u: (len(P & adj[u]), -u))
    for v in sorted(P - adj[pivot]):
        _bron_kerbosch(adj, R | {v}, P & adj[v], X & adj[v], out)
        P = P - {v}
        X = X | {v}


def maximal_cliques(G: Graph) -> List[Tuple[int, ...]]:
    """All inclusion-maximal cliques, each a sorted tuple, listed in sorted order.

    Bron-Kerbosch with pivoting, run from a degeneracy ordering.  Isolated
    vertices come out as singleton cliques.
    """
    adj = [set(a) for a in G.adj]
    order = _degeneracy_order(adj)
    pos = {v: k for k, v in enumerate(order)}
    out: List[Tuple[int, ...]] = []
    for v in order:
        later = {w for w in adj[v] if pos[w] > pos[v]}
        earlier = {w for w in adj[v] if pos[w] < pos[v]}
        _bron_kerbosch(adj, {v}, later, earlier, out)
    return sorted(set(out))


def maximal_bicliques(B: BipartiteGraph) -> List[Tuple[int, ...]]:
    """Maximal bicliques with both sides nonempty, as sorted vertex tuples."""
    out = []
    for c in maximal_cliques(B.cross_completion()):
        left = any(v < B.m for v in c)
        right = any(v >= B.m for v in c)
        if left and right:
            out.append(c)
    return out


def clique_edges(clique: Iterable[int]) -> List[Edge]:
    return list(combinations(sorted(clique), 2))


# -- covers ---------------------------------------------------------------

COVER_TOL = 1e-11


def frac_cover(cliques: Sequence[Iterable[int]], target_edges: Iterable[Sequence[int]]):
    """Fractional edge cover ``min sum x_k`` s.t. every target edge is covered once.

    Returns ``(value, weights)``.  Raises ``ValueError`` when some edge lies in
    no clique, since the covering LP is then infeasible.
    """
    from .conic.hsd import SolverOptions
    from .conic.lp import lp_solve

    sets = [frozenset(c) for c in cliques]
    edges = sorted({_canon(int(e[0]), int(e[1])) for e in target_edges})
    p = len(sets)
    if not edges:
        return 0.0, np.zeros(p)
    rows = []
    for i, j in edges:
        row = np.array([1.0 if (i in s and j in s) else 0.0 for s in sets])
        if not row.any():
            raise ValueError(f"edge {(i, j)} is not covered by any clique")
        rows.append(row)
    A = np.array(rows)
    # covering LPs are tiny, so solve them well past the default accuracy
    res = lp_solve(np.ones(p), A, np.ones(len(edges)), sense="ge",
                   opts=SolverOptions(tol_gap=COVER_TOL, tol_feas=COVER_TOL))
    if res.status != "Optimal":
        raise RuntimeError(f"covering LP ended with status {res.status}")
    return float(res.value), res.x


def greedy_edge_clique_cover(G: Graph, cliques: Sequence[Iterable[int]]) -> List[Tuple[int, ...]]:
    """Greedy max-coverage cover; ties go to the lowest clique index."""
    cl = [tuple(sorted(c)) for c in cliques]
    covers = [set(clique_edges(c)) & G.edges for c in cl]
    uncovered = set(G.edges)
    coverable = set().union(*covers) if covers else set()
    if not uncovered <= coverable:
        raise ValueError("cliques do not cover the edge set")
    chosen = []
    while uncovered:
        gains = [len(c & uncovered) for c in covers]
        k = int(np.argmax(gains))  # argmax returns the first maximiser
        chosen.append(cl[k])
        uncovered -= covers[k]
    return chosen


# -- chordal extension -----------------------------------------------------

def min_fill_order(G: Graph) -> Tuple[List[int], List[Edge]]:
    """Greedy minimum-fill elimination order and the fill edges it creates."""
    adj = [set(a) for a in G.adj]
    alive = set(range(G.n))
    order, fill = [], []

    def fill_of(v):
        nb = sorted(adj[v] & alive)
        return [(a, b) for a, b in combinations(nb, 2) if b not in adj[a]]

    while alive:
        v = min(alive, key=lambda u: (len(fill_of(u)), u))
        for a, b in fill_of(v):
            adj[a].add(b)
            adj[b].add(a)
            fill.append(_canon(a, b))
        order.append(v)
        alive.remove(v)
    return order, fill


def is_perfect_elimination_order(G: Graph, order: Sequence[int]) -> bool:
    pos = {v: k for k, v in enumerate(order)}
    for v in order:
        later = [w for w in G.adj[v] if pos[w] > pos[v]]
        if not G.is_clique(later):
            return False
    return True


def is_chordal(G: Graph) -> bool:
    order, fill = min_fill_order(G)
    return not fill


def satisfies_rip(cliques: Sequence[Iterable[int]]) -> bool:
    """Running intersection: each clique meets the union of its predecessors
    inside a single earlier clique."""
    sets = [frozenset(c) for c in cliques]
    for k in range(1, len(sets)):
        seen = frozenset().union(*sets[:k])
        inter = sets[k] & seen
        if not any(inter <= sets[i] for i in range(k)):
            return False
    return True


def chordal_extension(G: Graph) -> Tuple[Graph, List[Tuple[int, ...]]]:
    """Min-fill chordal extension and its maximal cliques in RIP order."""
    order, fill = min_fill_order(G)
    H = Graph(G.n, list(G.edges) + fill)
    pos = {v: k for k, v in enumerate(order)}
    cand = []
    for v in order:
        cand.append(frozenset([v] + [w for w in H.adj[v] if pos[w] > pos[v]]))
    cliques = [c for c in cand if not any(c < d for d in cand)]
    cliques = sorted(set(cliques), key=lambda c: tuple(sorted(c)))
    # Prim on the clique intersection graph yields a clique tree order
    if not cliques:
        return H, []
    done = [0]
    rest = list(range(1, len(cliques)))
    while rest:
        best = max(rest, key=lambda r: (max(len(cliques[r] & cliques[d]) for d in done), -r))
        done.append(best)
        rest.remove(best)
    return H, [tuple(sorted(cliques[k])) for k in done]
