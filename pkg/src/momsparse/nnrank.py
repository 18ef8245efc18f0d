"""Nonnegative rank: moment bounds over the bipartite variable split."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from . import graph as gr
from .cprank import STRENGTHS, numeric_rank
from .momrelax import BoundResult, GmpSpec, build_dense, build_isp, solve_relaxation
from .polybasis import unit, zero_exponent

MODES = ("dense", "isp")


@dataclass
class NnInstance:
    M: np.ndarray
    bigraph: gr.BipartiteGraph
    bicliques: List[tuple]

    @property
    def shape(self):
        return self.M.shape

    @property
    def M_max(self) -> float:
        return float(self.M.max())


def nn_instance(M, zero_tol: float = 0.0) -> NnInstance:
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise ValueError("expected a nonempty matrix")
    if np.any(M < -zero_tol):
        raise ValueError("matrix has negative entries")
    if not M.max() > 0:
        raise ValueError("matrix is identically zero")
    B = gr.bipartite_support(M, zero_tol)
    return NnInstance(M, B, gr.maximal_bicliques(B))


def nn_spec(M, strength: str = "plain", zero_tol: float = 0.0) -> GmpSpec:
    """Moment formulation over ``m + n`` variables; column ``j`` is variable ``m + j``."""
    if strength not in STRENGTHS:
        raise ValueError(f"unknown strength {strength!r}")
    inst = nn_instance(M, zero_tol)
    M = inst.M
    m, n = M.shape
    N = m + n
    zero = zero_exponent(N)
    root = math.sqrt(inst.M_max)

    def cross(i, j):
        e = [0] * N
        e[i] = e[m + j] = 1
        return tuple(e)

    eqs = [({cross(i, j): 1.0}, float(M[i, j])) for i in range(m) for j in range(n)]
    box = [{unit(N, v): root, unit(N, v, 2): -1.0} for v in range(N)]
    edges = sorted(inst.bigraph.edges)
    edge_gens = [{zero: float(M[i, j - m]), cross(i, j - m): -1.0} for i, j in edges]
    spec = GmpSpec(n=N, objective={zero: 1.0}, equalities=eqs, ineq_gens=box + edge_gens,
                   nonedges=frozenset(inst.bigraph.nonedges()))
    if strength in ("dagger", "ddagger"):
        spec.sign_monomial_families.extend(edge_gens)
    if strength == "ddagger":
        spec.sign_monomial_families[:0] = [{zero: 1.0}] + box
    return spec


def nn_program(M, t: int = 1, mode: str = "dense", strength: str = "plain",
               zero_tol: float = 0.0):
    """Build the relaxation of ``M / max(M)``; returns ``(program, layout, max(M))``."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if t < 1:
        raise ValueError("level t must be at least 1")
    inst = nn_instance(M, zero_tol)
    s = inst.M_max
    Ms = inst.M / s
    Ms[inst.M == 0] = 0.0
    spec = nn_spec(Ms, strength)
    if mode == "dense":
        prog, layout = build_dense(spec, t)
    else:
        prog, layout = build_isp(spec, t, inst.bicliques)
    return prog, layout, s


def nn_bound(M, t: int = 1, mode: str = "dense", strength: str = "plain",
             opts=None, zero_tol: float = 0.0) -> BoundResult:
    """Lower bound on the nonnegative rank of ``M``.

    The matrix is divided by its largest entry before building; the
    parameters are invariant under that scaling and the pseudo-moments are
    mapped back afterwards.
    """
    prog, layout, s = nn_program(M, t, mode, strength, zero_tol)
    scale = np.full(sum(np.shape(M)), math.sqrt(s))
    return solve_relaxation(prog, layout, opts, moment_scale=scale)


def nn_combinatorial(M, zero_tol: float = 0.0) -> Dict[str, object]:
    inst = nn_instance(M, zero_tol)
    B = inst.bigraph
    G = gr.Graph(B.size, B.edges)
    cover = gr.greedy_edge_clique_cover(G, inst.bicliques) if B.edges else []
    bfrac = gr.frac_cover(inst.bicliques, B.edges)[0] if B.edges else 0.0
    return {"rank": numeric_rank(inst.M), "bc_greedy": len(cover), "bc_frac": bfrac}
