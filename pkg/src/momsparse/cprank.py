"""Completely positive rank: moment bounds and combinatorial companions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from . import graph as gr
from .momrelax import (BoundResult, GmpSpec, MatrixLocalizer, build_dense, build_isp,
                       solve_relaxation)
from .polybasis import Polynomial, unit, zero_exponent

MODES = ("dense", "isp", "wisp")
STRENGTHS = ("plain", "dagger", "ddagger")


@dataclass
class CpInstance:
    A: np.ndarray
    graph: gr.Graph
    cliques: List[tuple]

    @property
    def n(self) -> int:
        return self.A.shape[0]


def cp_instance(A, zero_tol: float = 0.0) -> CpInstance:
    A = np.array(A, dtype=float)
    G = gr.support_graph(A, zero_tol)   # also checks symmetry
    if np.any(A < -zero_tol):
        raise ValueError("matrix has negative entries")
    if np.any(np.diag(A) <= 0):
        raise ValueError("every diagonal entry must be positive")
    return CpInstance(A, G, gr.maximal_cliques(G))


def _xx(n, i, j) -> Polynomial:
    e = [0] * n
    e[i] += 1
    e[j] += 1
    return {tuple(e): 1.0}


def cp_spec(A, strength: str = "plain", zero_tol: float = 0.0) -> GmpSpec:
    """Moment formulation of the convexified cp-rank of ``A``.

    Equalities ``L(x_i x_j) = A_ij`` for all ``i <= j``; generators
    ``sqrt(A_ii) x_i - x_i^2`` and ``A_ij - x_i x_j`` on edges; the ideal of the
    nonedges; and the matrix localizer ``A - x x^T``.  ``dagger`` adds the
    scalar family ``L((A_ij - x_i x_j) x^gamma) >= 0`` on edges, ``ddagger``
    further ``L(x^gamma) >= 0``, ``L((sqrt(A_ii) x_i - x_i^2) x^gamma) >= 0``
    and localizing matrices for ``x_i x_j`` on edges.
    """
    if strength not in STRENGTHS:
        raise ValueError(f"unknown strength {strength!r}")
    inst = cp_instance(A, zero_tol)
    A, G, n = inst.A, inst.graph, inst.n
    zero = zero_exponent(n)
    eqs = []
    for i in range(n):
        for j in range(i, n):
            eqs.append((_xx(n, i, j), float(A[i, j]) if (i == j or G.has_edge(i, j)) else 0.0))
    diag_gens = [{unit(n, i): math.sqrt(A[i, i]), unit(n, i, 2): -1.0} for i in range(n)]
    edges = sorted(G.edges)
    edge_gens = [{zero: float(A[i, j]), **{k: -v for k, v in _xx(n, i, j).items()}} for i, j in edges]
    loc = [[({zero: float(A[i, j])} if A[i, j] != 0 else {}) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            e = tuple(_xx(n, i, j))[0]
            loc[i][j] = dict(loc[i][j])
            loc[i][j][e] = loc[i][j].get(e, 0.0) - 1.0
    spec = GmpSpec(n=n, objective={zero: 1.0}, equalities=eqs,
                   ineq_gens=diag_gens + edge_gens, nonedges=frozenset(G.nonedges()),
                   matrix_localizers=[MatrixLocalizer(loc, row_vars=list(range(n)))])
    if strength in ("dagger", "ddagger"):
        spec.sign_monomial_families.extend(edge_gens)
    if strength == "ddagger":
        spec.sign_monomial_families[:0] = [{zero: 1.0}] + diag_gens
        spec.monomial_psd_localizers.extend(_xx(n, i, j) for i, j in edges)
    return spec


def cp_program(A, t: int = 1, mode: str = "dense", strength: str = "plain",
               zero_tol: float = 0.0):
    """Build the level-``t`` relaxation of the unit-diagonal rescaling of ``A``.

    Returns ``(program, layout, d)`` where ``d`` is the vector of square
    roots of the diagonal used for the rescaling.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if t < 1:
        raise ValueError("level t must be at least 1")
    inst = cp_instance(A, zero_tol)
    d = np.sqrt(np.diag(inst.A))
    As = inst.A / np.outer(d, d)
    np.fill_diagonal(As, 1.0)
    As[inst.A == 0] = 0.0
    spec = cp_spec(As, strength)
    if mode == "dense":
        prog, layout = build_dense(spec, t)
    else:
        prog, layout = build_isp(spec, t, inst.cliques, principal=(mode == "wisp"))
    return prog, layout, d


def cp_bound(A, t: int = 1, mode: str = "dense", strength: str = "plain",
             opts=None, zero_tol: float = 0.0) -> BoundResult:
    """Lower bound on the cp-rank of ``A`` from a level-``t`` relaxation.

    ``mode`` picks the dense, ideal-sparse (``isp``) or weak ideal-sparse
    (``wisp``) hierarchy.  The matrix is first rescaled to unit diagonal;
    every parameter of the family is invariant under positive diagonal
    scaling, and the returned pseudo-moments are mapped back to ``A``.
    """
    prog, layout, d = cp_program(A, t, mode, strength, zero_tol)
    return solve_relaxation(prog, layout, opts, moment_scale=d)


def numeric_rank(A, tol_ratio: float = 1e-8) -> int:
    s = np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol_ratio * s[0]))


def cp_upper_bound(n: int, r: int) -> int:
    """Smallest applicable published cp-rank upper bound."""
    cands = []
    if n <= 4:
        cands.append(n)
    else:
        cands.append(n * (n + 1) // 2 - 4)
    if r >= 2:
        cands.append(r * (r + 1) // 2 - 1)
    return min(cands)


def cp_combinatorial(A, zero_tol: float = 0.0) -> Dict[str, object]:
    inst = cp_instance(A, zero_tol)
    r = numeric_rank(inst.A)
    cover = gr.greedy_edge_clique_cover(inst.graph, inst.cliques)
    cfrac = gr.frac_cover(inst.cliques, inst.graph.edges)[0] if inst.graph.edges else 0.0
    return {"rank": r, "c_greedy": len(cover), "c_frac": cfrac,
            "upper": cp_upper_bound(inst.n, r)}
