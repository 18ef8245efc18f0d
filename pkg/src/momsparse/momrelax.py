"""Generalized moment problems and their moment relaxations.

A :class:`GmpSpec` describes

    min  L(f_0)  s.t.  L(f_i) = a_i,  L >= 0 on K

where ``K`` is cut out by the generators ``g_j >= 0`` and the ideal of the
nonedge monomials ``x_i x_j``.  The builders below lower its level-``t``
relaxations to standard-form :class:`~momsparse.conic.ConicProgram` objects:

* :func:`build_dense` -- one functional on all variables,
* :func:`build_isp` -- one independent functional per clique, coupled only
  through the equality rows,
* :func:`build_ext` -- like ``build_isp`` on cliques of a supergraph, with the
  nonedges inside each clique imposed as explicit zero rows,
* :func:`build_csp` -- one functional whose moment and localizing matrices are
  split along the cliques of a chordal extension.

Pseudo-moments live in the entries of the moment blocks.  Every monomial gets
one representative entry; all other entries carrying the same monomial, and
every entry of a localizing block, are tied to representatives through
equality rows.  Moments whose support contains a nonedge are structurally
zero: they never get a representative, and rows or columns of a block whose
diagonal is identically zero are pruned before the block is created.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .conic import ConicProgram, ConicSolution, ProgramBuilder
from .polybasis import (Exponent, MonomialBasis, Polynomial, poly_degree, poly_restrict,
                        poly_support, product_exponent, support, zero_exponent)

Entry = Tuple[int, int, int]


class SupportInfeasibleError(ValueError):
    """An equality has a nonzero right-hand side but no surviving moments."""


@dataclass
class MatrixLocalizer:
    """Symmetric polynomial matrix ``G`` giving ``L(G (x) [x]_s [x]_s^T) >= 0``.

    ``row_vars`` ties each row to a variable; builders that take principal
    submatrices per clique keep the rows whose variable lies in the clique.
    """
    entries: List[List[Polynomial]]
    row_vars: Optional[List[int]] = None

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def degree(self) -> int:
        return max((poly_degree(p) for row in self.entries for p in row), default=0)


@dataclass
class GmpSpec:
    n: int
    objective: Polynomial
    equalities: List[Tuple[Polynomial, float]] = field(default_factory=list)
    ineq_gens: List[Polynomial] = field(default_factory=list)
    nonedges: FrozenSet[Tuple[int, int]] = frozenset()
    matrix_localizers: List[MatrixLocalizer] = field(default_factory=list)
    sign_monomial_families: List[Polynomial] = field(default_factory=list)
    monomial_psd_localizers: List[Polynomial] = field(default_factory=list)

    def __post_init__(self):
        ne = set()
        for i, j in self.nonedges:
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"bad nonedge {(i, j)}")
            ne.add((min(i, j), max(i, j)))
        self.nonedges = frozenset(ne)
        for G in self.matrix_localizers:
            E = G.entries
            for a in range(len(E)):
                for b in range(len(E)):
                    if E[a][b] != E[b][a]:
                        raise ValueError("matrix localizer is not symmetric")

    def max_degree(self) -> int:
        polys = [self.objective] + [f for f, _ in self.equalities] + list(self.ineq_gens)
        d = max((poly_degree(p) for p in polys), default=0)
        for G in self.matrix_localizers:
            d = max(d, G.degree)
        return d


@dataclass
class PseudoMoment:
    """Values ``L(x^alpha)`` for every ``alpha`` of a degree ``<= 2t`` basis."""
    basis: MonomialBasis
    values: np.ndarray
    clique: Optional[Tuple[int, ...]] = None

    def __getitem__(self, alpha: Exponent) -> float:
        return float(self.values[self.basis.index_of(alpha)])

    def moment_matrix(self, s: int) -> np.ndarray:
        B = MonomialBasis(self.basis.n, self.basis.vars, s)
        M = np.empty((len(B), len(B)))
        for a, u in enumerate(B):
            for b in range(a, len(B)):
                M[a, b] = M[b, a] = self[product_exponent(u, B[b])]
        return M

    def to_dict(self) -> dict:
        return {"vars": list(self.basis.vars), "degree": self.basis.max_deg,
                "clique": list(self.clique) if self.clique is not None else None,
                "moments": [[list(a), float(v)] for a, v in zip(self.basis, self.values)]}


@dataclass
class FunctionalLayout:
    """Where the pseudo-moments of one functional sit in the program."""
    name: str
    vars: Tuple[int, ...]
    t: int
    reps: Dict[Exponent, Entry]
    zero: FrozenSet[Tuple[int, int]]
    moment_blocks: List[int]
    moment_index_sets: List[List[Exponent]]

    def is_zero(self, alpha: Exponent) -> bool:
        s = support(alpha)
        return any(p in self.zero for p in combinations(sorted(s), 2))

    def to_dict(self) -> dict:
        return {"name": self.name, "vars": list(self.vars), "t": self.t,
                "zero_pairs": sorted(list(p) for p in self.zero),
                "moment_blocks": self.moment_blocks,
                "reps": [[list(a), *e] for a, e in sorted(self.reps.items())]}


@dataclass
class Layout:
    n: int
    t: int
    functionals: List[FunctionalLayout]
    block_names: List[str]

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "t": self.t, "block_names": self.block_names,
                           "functionals": [f.to_dict() for f in self.functionals]})

    def pseudo_moments(self, sol: ConicSolution) -> List[PseudoMoment]:
        """Read ``L_k(x^alpha)`` for ``|alpha| <= 2t`` off a solution."""
        out = []
        for f in self.functionals:
            B = MonomialBasis(self.n, f.vars, 2 * f.t)
            vals = np.full(len(B), np.nan)
            for k, a in enumerate(B):
                e = f.reps.get(a)
                if e is not None:
                    blk, i, j = e
                    vals[k] = sol.primal[blk][i, j]
                elif f.is_zero(a):
                    vals[k] = 0.0
            out.append(PseudoMoment(B, vals, clique=f.vars if len(self.functionals) > 1 else None))
        return out


def _ceil_half(d: int) -> int:
    return (d + 1) // 2


def _is_positive_constant(p: Polynomial, n: int) -> bool:
    return len(p) == 1 and zero_exponent(n) in p and p[zero_exponent(n)] > 0


class _Assembler:
    """Shared lowering machinery for all builders."""

    def __init__(self, n: int, t: int):
        self.n, self.t = n, t
        self.pb = ProgramBuilder()
        self.layouts: List[FunctionalLayout] = []

    # -- functionals ------------------------------------------------------
    def add_functional(self, name: str, vars_: Sequence[int], zero_pairs: Iterable[Tuple[int, int]],
                       block_sets: Optional[List[Sequence[int]]] = None) -> FunctionalLayout:
        vars_ = tuple(sorted(vars_))
        lay = FunctionalLayout(name, vars_, self.t, {}, frozenset(zero_pairs), [], [])
        for k, bset in enumerate(block_sets or [vars_]):
            B = MonomialBasis(self.n, bset, self.t)
            keep = [u for u in B if not lay.is_zero(u)]
            blk = self.pb.add_block(f"{name}.M{k}" if block_sets else f"{name}.M", len(keep))
            lay.moment_blocks.append(blk)
            lay.moment_index_sets.append(keep)
            for a in range(len(keep)):
                for b in range(a, len(keep)):
                    alpha = product_exponent(keep[a], keep[b])
                    if lay.is_zero(alpha):
                        self.pb.add_equality({(blk, a, b): 1.0}, 0.0)
                    elif alpha in lay.reps:
                        rep = lay.reps[alpha]
                        self.pb.add_equality({(blk, a, b): 1.0, rep: -1.0}, 0.0)
                    else:
                        lay.reps[alpha] = (blk, a, b)
        self.layouts.append(lay)
        return lay

    def expr(self, lay: FunctionalLayout, p: Polynomial) -> Dict[Entry, float]:
        """Linear expression for ``L(p)`` in terms of representative entries."""
        out: Dict[Entry, float] = {}
        for alpha, c in p.items():
            if c == 0 or lay.is_zero(alpha):
                continue
            try:
                e = lay.reps[alpha]
            except KeyError:
                raise ValueError(f"moment {alpha} is not covered by any moment block of "
                                 f"{lay.name}; raise the level or enlarge the cliques") from None
            out[e] = out.get(e, 0.0) + c
        return {e: c for e, c in out.items() if c != 0}

    # -- constraints --------------------------------------------------------
    def _psd_block(self, name: str, lay: FunctionalLayout, cells) -> None:
        """``cells[a][b]`` is the polynomial whose L-value fills entry (a, b)."""
        dim = len(cells)
        exprs = {}
        live = [False] * dim
        for a in range(dim):
            for b in range(a, dim):
                e = self.expr(lay, cells[a][b])
                if e:
                    exprs[(a, b)] = e
                    live[a] = live[b] = True
        keep = [a for a in range(dim) if live[a]]
        if not keep:
            return
        blk = self.pb.add_block(name, len(keep))
        for ia, a in enumerate(keep):
            for ib in range(ia, len(keep)):
                e = exprs.get((a, keep[ib]), {})
                row = {(blk, ia, ib): 1.0}
                for ent, c in e.items():
                    row[ent] = row.get(ent, 0.0) - c
                self.pb.add_equality(row, 0.0)

    def localizer(self, name: str, lay: FunctionalLayout, g: Polynomial, subset: Sequence[int]) -> None:
        if not g or _is_positive_constant(g, self.n):
            return
        s = self.t - _ceil_half(poly_degree(g))
        if s < 0:
            raise ValueError(f"level {self.t} too small for a generator of degree {poly_degree(g)}")
        B = MonomialBasis(self.n, subset, s)
        cells = [[{product_exponent(a, product_exponent(u, v)): c for a, c in g.items()}
                  for v in B] for u in B]
        self._psd_block(name, lay, cells)

    def matrix_localizer(self, name: str, lay: FunctionalLayout, G: List[List[Polynomial]],
                         subset: Sequence[int]) -> None:
        D = len(G)
        if D == 0:
            return
        deg = max(poly_degree(p) for row in G for p in row)
        s = self.t - _ceil_half(deg)
        if s < 0:
            raise ValueError(f"level {self.t} too small for a matrix localizer of degree {deg}")
        B = MonomialBasis(self.n, subset, s)
        idx = [(d, u) for d in range(D) for u in B]
        cells = [[{product_exponent(a, product_exponent(u, v)): c for a, c in G[d][e].items()}
                  for (e, v) in idx] for (d, u) in idx]
        self._psd_block(name, lay, cells)

    def sign_family(self, name: str, lay: FunctionalLayout, h: Polynomial, subset: Sequence[int]) -> None:
        if not h:
            return
        deg = 2 * self.t - poly_degree(h)
        if deg < 0:
            raise ValueError(f"level {self.t} too small for a sign family of degree {poly_degree(h)}")
        for gamma in MonomialBasis(self.n, subset, deg):
            e = self.expr(lay, {product_exponent(a, gamma): c for a, c in h.items()})
            if not e:
                continue
            k = self.pb.add_nonneg(f"{name}{gamma}")
            row = {(ProgramBuilder.NONNEG, k, k): 1.0}
            for ent, c in e.items():
                row[ent] = row.get(ent, 0.0) - c
            self.pb.add_equality(row, 0.0)

    def finish(self, spec: GmpSpec, restrict_to: List[Sequence[int]]) -> Tuple[ConicProgram, Layout]:
        """Equality rows and objective, summed over functionals."""
        for f, a in spec.equalities:
            row: Dict[Entry, float] = {}
            for lay, vs in zip(self.layouts, restrict_to):
                for ent, c in self.expr(lay, poly_restrict(f, vs)).items():
                    row[ent] = row.get(ent, 0.0) + c
            row = {e: c for e, c in row.items() if c != 0}
            if not row:
                if a != 0:
                    raise SupportInfeasibleError(
                        f"instance infeasible by support: equality with rhs {a} has no surviving moments")
                continue
            self.pb.add_equality(row, a)
        obj: Dict[Entry, float] = {}
        for lay, vs in zip(self.layouts, restrict_to):
            for ent, c in self.expr(lay, poly_restrict(spec.objective, vs)).items():
                obj[ent] = obj.get(ent, 0.0) + c
        self.pb.set_objective(obj)
        prog = self.pb.build(maximize=False)
        names = [nm for nm, _ in prog.psd_blocks]
        return prog, Layout(self.n, self.t, self.layouts, names)


def _check_level(spec: GmpSpec, t: int) -> None:
    if t < 1:
        raise ValueError("level t must be at least 1")
    if 2 * t < spec.max_degree():
        raise ValueError(f"level {t} too small: degree {spec.max_degree()} needs 2t >= degree")


def _attach_constraints(asm: _Assembler, lay: FunctionalLayout, spec: GmpSpec,
                        vs: Sequence[int], tag: str, principal: bool = False,
                        contained: bool = False) -> None:
    """Localizers of ``spec`` restricted to the variables ``vs``.

    Restriction sets the variables outside ``vs`` to zero, which is sound
    when the functional belongs to a measure supported on ``vs``.  With
    ``contained=True`` (one measure over all variables) a scalar constraint is
    attached only when its variables lie inside ``vs``, and matrix localizers
    are cut to principal submatrices.
    """
    vset = set(vs)

    def pick(p: Polynomial) -> Polynomial:
        if contained:
            return p if poly_support(p) <= vset else {}
        return poly_restrict(p, vs)

    for j, g in enumerate(spec.ineq_gens):
        asm.localizer(f"{tag}.g{j}", lay, pick(g), vs)
    for j, h in enumerate(spec.monomial_psd_localizers):
        asm.localizer(f"{tag}.h{j}", lay, pick(h), vs)
    for j, G in enumerate(spec.matrix_localizers):
        rows = range(G.dim)
        if principal or contained:
            if G.row_vars is None:
                raise ValueError("principal restriction needs row_vars on the matrix localizer")
            rows = [r for r in rows if G.row_vars[r] in vset]
            if contained and not all(poly_support(G.entries[a][b]) <= vset
                                     for a in rows for b in rows):
                continue
        if not rows:
            continue
        sub = [[poly_restrict(G.entries[a][b], vs) for b in rows] for a in rows]
        asm.matrix_localizer(f"{tag}.G{j}", lay, sub, vs)
    for j, h in enumerate(spec.sign_monomial_families):
        hr = pick(h)
        # a family whose generator leaves the clique is not part of it
        if hr and poly_degree(hr) == poly_degree(h):
            asm.sign_family(f"{tag}.s{j}", lay, hr, vs)


def build_dense(spec: GmpSpec, t: int) -> Tuple[ConicProgram, Layout]:
    """Dense level-``t`` relaxation with structural ideal zeros."""
    _check_level(spec, t)
    asm = _Assembler(spec.n, t)
    allv = list(range(spec.n))
    lay = asm.add_functional("L", allv, spec.nonedges)
    _attach_constraints(asm, lay, spec, allv, "L")
    return asm.finish(spec, [allv])


def _clique_list(cliques) -> List[Tuple[int, ...]]:
    cl = [tuple(sorted(set(int(v) for v in c))) for c in cliques]
    if not cl:
        raise ValueError("empty clique list")
    return cl


def build_isp(spec: GmpSpec, t: int, cliques, principal: bool = False) -> Tuple[ConicProgram, Layout]:
    """Ideal-sparse relaxation: an independent functional ``L_k`` per clique.

    With ``principal=True`` every matrix localizer is cut down to its principal
    submatrix on the clique's rows (the weak variant) instead of having the
    variables outside the clique set to zero.
    """
    _check_level(spec, t)
    cl = _clique_list(cliques)
    asm = _Assembler(spec.n, t)
    for k, V in enumerate(cl):
        pairs = [p for p in combinations(V, 2) if p in spec.nonedges]
        if pairs:
            raise ValueError(f"clique {V} contains the nonedge {pairs[0]}")
        lay = asm.add_functional(f"L{k}", V, ())
        _attach_constraints(asm, lay, spec, V, f"L{k}", principal=principal)
    return asm.finish(spec, cl)


def build_ext(spec: GmpSpec, t: int, supercliques) -> Tuple[ConicProgram, Layout]:
    """Extended ideal-sparse relaxation on the cliques of a supergraph."""
    _check_level(spec, t)
    cl = _clique_list(supercliques)
    asm = _Assembler(spec.n, t)
    for k, V in enumerate(cl):
        zero = [p for p in combinations(V, 2) if p in spec.nonedges]
        lay = asm.add_functional(f"L{k}", V, zero)
        _attach_constraints(asm, lay, spec, V, f"L{k}")
    return asm.finish(spec, cl)


def build_csp(spec: GmpSpec, t: int, chordal_cliques) -> Tuple[ConicProgram, Layout]:
    """Correlative-sparse relaxation: one functional, clique-wise blocks."""
    _check_level(spec, t)
    cl = _clique_list(chordal_cliques)
    asm = _Assembler(spec.n, t)
    allv = list(range(spec.n))
    lay = asm.add_functional("L", allv, spec.nonedges, block_sets=cl)
    for k, V in enumerate(cl):
        _attach_constraints(asm, lay, spec, V, f"L.C{k}", contained=True)
    return asm.finish(spec, [allv])


@dataclass
class BoundResult:
    """Outcome of one relaxation solve."""
    status: str
    value: float
    pseudo_moments: List[PseudoMoment]
    wall_time: float
    program_stats: Dict[str, object]
    layout: Optional[Layout] = None
    solution: Optional[ConicSolution] = None
    blocks: List[int] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == "Optimal"


def scale_moments(pms: List[PseudoMoment], factors: Sequence[float]) -> List[PseudoMoment]:
    """Moments of the pushforward under ``x_i -> factors[i] * x_i``."""
    f = np.asarray(factors, dtype=float)
    out = []
    for pm in pms:
        mult = np.array([np.prod(f ** np.asarray(a)) for a in pm.basis])
        out.append(PseudoMoment(pm.basis, pm.values * mult, pm.clique))
    return out


def solve_relaxation(prog: ConicProgram, layout: Layout, opts=None,
                     moment_scale: Optional[Sequence[float]] = None,
                     value_scale: float = 1.0) -> BoundResult:
    """Solve a built relaxation and read back its pseudo-moments."""
    import time

    from .conic import OPTIMAL, solve

    t0 = time.perf_counter()
    sol = solve(prog, opts)
    elapsed = time.perf_counter() - t0
    pms: List[PseudoMoment] = []
    if sol.status == OPTIMAL:
        pms = layout.pseudo_moments(sol)
        if moment_scale is not None:
            pms = scale_moments(pms, moment_scale)
    value = sol.objective * value_scale if sol.status in (OPTIMAL, "Unknown") else float("nan")
    stats = dict(prog.stats())
    stats["iterations"] = sol.iterations
    return BoundResult(sol.status, value, pms, elapsed, stats, layout, sol, prog.block_dims)
