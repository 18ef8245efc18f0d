"""Flatness tests, atom extraction and factorization reconstruction.

Given optimal pseudo-moments of a moment relaxation, a rank condition on
nested moment matrices certifies that they come from a finitely atomic
measure.  The atoms are then recovered with the classical recipe of
Henrion and Lasserre: a column echelon basis of the moment matrix gives
multiplication matrices, and a random combination of those is
diagonalized.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import schur

from .momrelax import PseudoMoment
from .polybasis import MonomialBasis, degree, product_exponent, unit

RANK_TOL = 1e-6
CLIP_TOL = 1e-6
WEIGHT_MIN = 1e-9


class ExtractionFailed(RuntimeError):
    """Raised when the moments do not yield a consistent atomic measure."""


def numeric_rank(S, tol_ratio: float = RANK_TOL) -> int:
    """Number of singular values above ``tol_ratio * sigma_max``."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if S.size == 0:
        return 0
    sv = np.linalg.svd(S, compute_uv=False)
    if sv[0] <= 0:
        return 0
    return int(np.sum(sv > tol_ratio * sv[0]))


# -- flatness --------------------------------------------------------------

@dataclass
class BlockFlatness:
    s: int
    rank_s: int
    rank_s_minus_d: int
    flat: bool
    clique: Optional[Tuple[int, ...]] = None

    def to_dict(self) -> dict:
        return {"clique": list(self.clique) if self.clique is not None else None, "s": self.s,
                "rank_s": self.rank_s, "rank_s_minus_d": self.rank_s_minus_d, "flat": self.flat}


@dataclass
class FlatnessReport:
    blocks: List[BlockFlatness]
    rank_tol: float

    @property
    def overall_flat(self) -> bool:
        return all(b.flat for b in self.blocks)

    def to_dict(self) -> dict:
        return {"overall_flat": self.overall_flat, "rank_tol": self.rank_tol,
                "blocks": [b.to_dict() for b in self.blocks]}


def _block_flatness(pm: PseudoMoment, t: int, d_K: int, tol_ratio: float) -> BlockFlatness:
    ranks = {s: numeric_rank(pm.moment_matrix(s), tol_ratio) for s in range(0, t + 1)}
    for s in range(d_K, t + 1):
        if ranks[s] == ranks[s - d_K]:
            return BlockFlatness(s, ranks[s], ranks[s - d_K], True, pm.clique)
    return BlockFlatness(t, ranks[t], ranks[t - d_K], False, pm.clique)


def check_flatness(pms: Union[PseudoMoment, Sequence[PseudoMoment]], t: int, d_K: int = 1,
                   tol_ratio: float = RANK_TOL) -> FlatnessReport:
    """Test ``rank M_s = rank M_{s - d_K}`` for ``s = d_K .. t`` on each block.

    A block is flat when the equality holds for some ``s``; the smallest such
    ``s`` is reported.  Accepts one pseudo-moment vector or a list of them
    (one per clique).
    """
    if isinstance(pms, PseudoMoment):
        pms = [pms]
    if t < d_K:
        raise ValueError("level t must be at least d_K")
    return FlatnessReport([_block_flatness(pm, t, d_K, tol_ratio) for pm in pms], tol_ratio)


# -- extraction ------------------------------------------------------------

@dataclass
class AtomicMeasure:
    """Weighted points in the ambient space ``R^n``."""
    points: np.ndarray                       # (k, n)
    weights: np.ndarray                      # (k,)
    clique: Optional[Tuple[int, ...]] = None

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def atoms(self) -> List[Tuple[np.ndarray, float]]:
        return [(p, float(w)) for p, w in zip(self.points, self.weights)]

    def moments(self, basis: MonomialBasis) -> np.ndarray:
        """``sum_k w_k x_k^alpha`` over the basis."""
        E = np.array(list(basis), dtype=float)
        if len(self) == 0:
            return np.zeros(len(E))
        V = np.prod(self.points[:, None, :] ** E[None, :, :], axis=2)
        return self.weights @ V

    def to_dict(self) -> dict:
        return {"clique": list(self.clique) if self.clique is not None else None,
                "atoms": [{"weight": float(w), "point": [float(v) for v in p]}
                          for p, w in zip(self.points, self.weights)]}


def _column_echelon(C: np.ndarray, tol: float) -> Tuple[np.ndarray, List[int]]:
    """Reduced column echelon form of ``C`` (rows ordered by the basis).

    Returns ``U`` with ``U[pivots] = I`` and ``C`` spanning the same column
    space, plus the pivot row indices in increasing order.
    """
    R = C.T.copy()                          # row echelon on the transpose
    r, ncol = R.shape
    pivots: List[int] = []
    row = 0
    for j in range(ncol):
        if row == r:
            break
        k = row + int(np.argmax(np.abs(R[row:, j])))
        if abs(R[k, j]) <= tol:
            R[row:, j] = 0.0
            continue
        R[[row, k]] = R[[k, row]]
        R[row] /= R[row, j]
        others = np.arange(r) != row
        R[others] -= np.outer(R[others, j], R[row])
        pivots.append(j)
        row += 1
    if row < r:
        raise ExtractionFailed("echelon form lost rank")
    return R.T, pivots


def extract_atoms(pm: PseudoMoment, t: int, tol_ratio: float = RANK_TOL, seed: int = 0,
                  d_K: int = 1, nonneg: bool = False, s: Optional[int] = None) -> AtomicMeasure:
    """Recover an atomic measure from pseudo-moments.

    Extraction is attempted at the smallest flat degree, or at ``t`` when no
    flat degree exists.  ``nonneg=True`` rejects atoms with coordinates
    below ``-CLIP_TOL`` and clips smaller negative values to zero.

    Raises
    ------
    ExtractionFailed
        When the echelon basis needs monomials of top degree, the
        multiplication matrices have complex spectrum, or a weight is not
        positive.
    """
    if s is None:
        fl = _block_flatness(pm, t, d_K, tol_ratio)
        s = fl.s
    n, vs = pm.basis.n, pm.basis.vars
    Bs = MonomialBasis(n, vs, s)
    M = pm.moment_matrix(s)
    M = 0.5 * (M + M.T)
    lam, Q = np.linalg.eigh(M)
    lam, Q = lam[::-1], Q[:, ::-1]
    if lam[0] <= 0:
        return AtomicMeasure(np.zeros((0, n)), np.zeros(0), pm.clique)
    r = int(np.sum(lam > tol_ratio * lam[0]))
    C = Q[:, :r] * np.sqrt(lam[:r])
    U, piv = _column_echelon(C, tol_ratio * np.sqrt(lam[0]))
    gens = [Bs[k] for k in piv]
    if any(degree(g) >= s for g in gens):
        raise ExtractionFailed("generating monomials reach the top degree")
    Ns = []
    for v in vs:
        rows = [Bs.index_of(product_exponent(g, unit(n, v))) for g in gens]
        Ns.append(U[rows, :])
    rng = np.random.default_rng(seed)
    coef = rng.uniform(size=len(vs))
    coef /= coef.sum()
    N = sum(c * Nv for c, Nv in zip(coef, Ns))
    ev = np.linalg.eigvals(N)
    if np.max(np.abs(ev.imag), initial=0.0) > 1e-6 * max(1.0, float(np.max(np.abs(ev)))):
        raise ExtractionFailed("multiplication matrix has complex eigenvalues")
    # orthonormal Schur vectors give stable coordinates
    _, Z = schur(N)
    pts = np.zeros((r, n))
    for a, v in enumerate(vs):
        pts[:, v] = np.array([Z[:, k] @ Ns[a] @ Z[:, k] for k in range(r)])
    if nonneg:
        neg = pts < 0
        if np.any(pts < -CLIP_TOL * max(1.0, float(np.max(np.abs(pts))))):
            raise ExtractionFailed("atom with negative coordinates on a nonnegative support")
        pts[neg] = 0.0
    # weights from the moment-matching system over the full basis
    full = pm.basis
    E = np.array(list(full), dtype=float)
    V = np.prod(pts[:, None, :] ** E[None, :, :], axis=2).T
    w, *_ = np.linalg.lstsq(V, pm.values, rcond=None)
    if np.any(w <= WEIGHT_MIN):
        raise ExtractionFailed("non-positive atom weight")
    return AtomicMeasure(pts, w, pm.clique)


def extract_all(pms: Sequence[PseudoMoment], t: int, tol_ratio: float = RANK_TOL, seed: int = 0,
                nonneg: bool = True) -> List[AtomicMeasure]:
    """Extraction on each clique; blocks with zero mass contribute no atoms."""
    return [extract_atoms(pm, t, tol_ratio, seed=seed, nonneg=nonneg) for pm in pms]


# -- reconstruction --------------------------------------------------------

def _gather(measures: Iterable[AtomicMeasure]):
    measures = list(measures)
    if not measures:
        return np.zeros((0, 0)), np.zeros(0)
    pts = np.vstack([m.points for m in measures])
    w = np.concatenate([m.weights for m in measures])
    return pts, w


def reconstruct_cp(measures: Iterable[AtomicMeasure], A) -> Dict[str, object]:
    """``A_rec = sum_k w_k x_k x_k^T`` and its entrywise l1 distance to ``A``."""
    A = np.asarray(A, dtype=float)
    pts, w = _gather(measures)
    A_rec = (pts.T * w) @ pts if len(w) else np.zeros_like(A)
    return {"A_rec": A_rec, "l1_residual": float(np.abs(A_rec - A).sum()), "atoms": len(w)}


def reconstruct_nn(measures: Iterable[AtomicMeasure], M) -> Dict[str, object]:
    """Split each atom into row and column parts and sum ``w a b^T``."""
    M = np.asarray(M, dtype=float)
    m = M.shape[0]
    pts, w = _gather(measures)
    if len(w):
        a, b = pts[:, :m], pts[:, m:]
        M_rec = (a.T * w) @ b
    else:
        M_rec = np.zeros_like(M)
    return {"M_rec": M_rec, "l1_residual": float(np.abs(M_rec - M).sum()), "atoms": len(w)}


def certify(result, target, t: int, family: str = "cp", tol_ratio: float = RANK_TOL,
            seed: int = 0) -> Dict[str, object]:
    """Flatness, extraction and reconstruction for one :class:`BoundResult`.

    Extraction is tried even without flatness; a failure is reported as zero
    atoms with the reason attached.
    """
    pms = result.pseudo_moments
    fl = check_flatness(pms, t, tol_ratio=tol_ratio)
    out: Dict[str, object] = {"flat": fl.overall_flat, "flatness": fl.to_dict()}
    try:
        measures = extract_all(pms, t, tol_ratio, seed=seed, nonneg=True)
    except ExtractionFailed as exc:
        out.update(atoms=0, residual=None, reason=str(exc), measures=[])
        return out
    rec = reconstruct_cp(measures, target) if family == "cp" else reconstruct_nn(measures, target)
    out.update(atoms=rec["atoms"], residual=rec["l1_residual"], measures=measures)
    if np.isfinite(result.value):
        out["value_equals_atoms"] = bool(abs(result.value - rec["atoms"]) <= 0.01)
    return out
