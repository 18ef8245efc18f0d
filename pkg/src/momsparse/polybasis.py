"""Monomial bases and sparse polynomials.

Exponents are tuples of non-negative ints of length ``n``; a polynomial is a
plain ``dict`` mapping exponent tuples to float coefficients.  Variables are
0-based throughout the package.
"""
from __future__ import annotations

from itertools import combinations_with_replacement
from typing import Dict, Iterable, Sequence, Tuple

Exponent = Tuple[int, ...]
Polynomial = Dict[Exponent, float]


def degree(alpha: Exponent) -> int:
    return sum(alpha)


def support(alpha: Exponent) -> frozenset:
    """Indices of the variables appearing in ``alpha``."""
    return frozenset(i for i, a in enumerate(alpha) if a)


def product_exponent(alpha: Exponent, beta: Exponent) -> Exponent:
    if len(alpha) != len(beta):
        raise ValueError("exponents of different length")
    return tuple(a + b for a, b in zip(alpha, beta))


def unit(n: int, i: int, power: int = 1) -> Exponent:
    e = [0] * n
    e[i] = power
    return tuple(e)


def zero_exponent(n: int) -> Exponent:
    return (0,) * n


def _grlex_key(alpha: Exponent):
    # degree first; inside a degree x_0 dominates x_1 dominates ...
    return (sum(alpha), tuple(-a for a in alpha))


class MonomialBasis:
    """Monomials in the variables ``vars_`` with degree in ``[min_deg, max_deg]``.

    The order is graded lexicographic: ascending degree, and within one degree
    the exponent tuples in decreasing lexicographic order, so that
    ``1, x0, x1, x0^2, x0 x1, x1^2`` is the basis of degree 2 in two variables.
    """

    def __init__(self, n: int, vars_: Iterable[int], max_deg: int, min_deg: int = 0):
        vs = sorted(set(int(v) for v in vars_))
        if any(v < 0 or v >= n for v in vs):
            raise ValueError("variable index out of range")
        if max_deg < 0 or min_deg < 0:
            raise ValueError("degrees must be non-negative")
        self.n = n
        self.vars = tuple(vs)
        self.max_deg = max_deg
        self.min_deg = min_deg
        monos = []
        for d in range(min_deg, max_deg + 1):
            for combo in combinations_with_replacement(vs, d):
                e = [0] * n
                for v in combo:
                    e[v] += 1
                monos.append(tuple(e))
        monos.sort(key=_grlex_key)
        self.monomials: Tuple[Exponent, ...] = tuple(monos)
        self._index = {m: k for k, m in enumerate(self.monomials)}

    def __len__(self) -> int:
        return len(self.monomials)

    def __iter__(self):
        return iter(self.monomials)

    def __getitem__(self, k: int) -> Exponent:
        return self.monomials[k]

    def __contains__(self, alpha) -> bool:
        return alpha in self._index

    def index_of(self, alpha: Exponent) -> int:
        """Position of ``alpha``; raises ``KeyError`` if it is not in the basis."""
        try:
            return self._index[alpha]
        except KeyError:
            raise KeyError(f"monomial {alpha} not in basis") from None

    def restrict(self, subset: Iterable[int]) -> "MonomialBasis":
        """Basis of the same degree range in the variables ``subset``."""
        sub = set(subset)
        if not sub <= set(self.vars):
            raise ValueError("subset is not contained in the basis variables")
        return MonomialBasis(self.n, sub, self.max_deg, self.min_deg)

    def __repr__(self) -> str:
        return (f"MonomialBasis(n={self.n}, vars={self.vars}, "
                f"deg={self.min_deg}..{self.max_deg}, size={len(self)})")


def basis(n: int, vars_: Iterable[int], max_deg: int, min_deg: int = 0) -> MonomialBasis:
    return MonomialBasis(n, vars_, max_deg, min_deg)


# -- polynomials ---------------------------------------------------------------

def poly_degree(p: Polynomial) -> int:
    nz = [sum(a) for a, c in p.items() if c != 0]
    return max(nz) if nz else 0


def poly_support(p: Polynomial) -> frozenset:
    s = set()
    for a, c in p.items():
        if c != 0:
            s |= support(a)
    return frozenset(s)


def poly_add(p: Polynomial, q: Polynomial, scale: float = 1.0) -> Polynomial:
    out = dict(p)
    for a, c in q.items():
        out[a] = out.get(a, 0.0) + scale * c
    return {a: c for a, c in out.items() if c != 0}


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    out: Polynomial = {}
    for a, c in p.items():
        for b, d in q.items():
            e = product_exponent(a, b)
            out[e] = out.get(e, 0.0) + c * d
    return {a: c for a, c in out.items() if c != 0}


def poly_shift(p: Polynomial, gamma: Exponent) -> Polynomial:
    """``p * x^gamma``."""
    return {product_exponent(a, gamma): c for a, c in p.items()}


def poly_restrict(p: Polynomial, subset: Iterable[int]) -> Polynomial:
    """Set every variable outside ``subset`` to zero."""
    sub = frozenset(subset)
    return {a: c for a, c in p.items() if c != 0 and support(a) <= sub}


def constant(n: int, c: float) -> Polynomial:
    return {zero_exponent(n): float(c)} if c != 0 else {}


def monomial(n: int, powers: Dict[int, int], coef: float = 1.0) -> Polynomial:
    e = [0] * n
    for i, k in powers.items():
        e[i] += k
    return {tuple(e): float(coef)}


def evaluate(p: Polynomial, x: Sequence[float]) -> float:
    total = 0.0
    for a, c in p.items():
        term = c
        for xi, ai in zip(x, a):
            if ai:
                term *= xi ** ai
        total += term
    return total
