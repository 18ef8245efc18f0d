"""Standard-form conic programs over PSD blocks and a nonnegative orthant.

A program is::

    min (or max)  <C, X>
    s.t.          <A_r, X> = b_r,   r = 1..m
                  X = (X_1, ..., X_p, x),  X_k PSD,  x >= 0

Coefficient matrices follow the SDPA convention: an entry ``(i, j, v)`` with
``i <= j`` stands for a symmetric matrix with ``F[i, j] = F[j, i] = v``, so an
off-diagonal entry contributes ``2 v X[i, j]`` to the inner product.  All
coefficients are kept in five parallel arrays ``mat, blk, row, col, val``
where ``mat == 0`` is the objective and ``mat == r`` the r-th equality
(1-based), exactly as in a ``.dat-s`` file.  Block index ``p`` (one past the
last PSD block) addresses the nonnegative variables, with ``row == col``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

OPTIMAL = "Optimal"
PRIMAL_INFEASIBLE = "PrimalInfeasible"
DUAL_INFEASIBLE = "DualInfeasible"
UNKNOWN = "Unknown"
STATUSES = (OPTIMAL, PRIMAL_INFEASIBLE, DUAL_INFEASIBLE, UNKNOWN)


@dataclass
class ConicProgram:
    psd_blocks: List[Tuple[str, int]]
    nonneg_count: int
    b: np.ndarray
    mat: np.ndarray
    blk: np.ndarray
    row: np.ndarray
    col: np.ndarray
    val: np.ndarray
    maximize: bool = False
    nonneg_names: Optional[List[str]] = None

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        self.mat = np.asarray(self.mat, dtype=np.int64)
        self.blk = np.asarray(self.blk, dtype=np.int64)
        self.row = np.asarray(self.row, dtype=np.int64)
        self.col = np.asarray(self.col, dtype=np.int64)
        self.val = np.asarray(self.val, dtype=float)
        self.validate()

    @property
    def num_constraints(self) -> int:
        return len(self.b)

    @property
    def block_dims(self) -> List[int]:
        return [d for _, d in self.psd_blocks]

    def validate(self) -> None:
        p = len(self.psd_blocks)
        n = len(self.mat)
        if not (len(self.blk) == len(self.row) == len(self.col) == len(self.val) == n):
            raise ValueError("coefficient arrays have different lengths")
        if n == 0:
            return
        if self.mat.min() < 0 or self.mat.max() > self.num_constraints:
            raise ValueError("constraint index out of range")
        if self.blk.min() < 0 or self.blk.max() > p:
            raise ValueError("block index out of range")
        if np.any(self.row > self.col):
            raise ValueError("coefficients must sit on or above the diagonal")
        dims = np.array(self.block_dims + [self.nonneg_count], dtype=np.int64)
        if np.any(self.row < 0) or np.any(self.col >= dims[self.blk]):
            raise ValueError("coefficient references a missing block entry")
        lp = self.blk == p
        if np.any(self.row[lp] != self.col[lp]):
            raise ValueError("nonnegative block coefficients must be diagonal")

    def canonical(self) -> "ConicProgram":
        """Equivalent maximisation program with merged, sorted coefficients."""
        sign = 1.0 if self.maximize else -1.0
        val = np.where(self.mat == 0, sign * self.val, self.val)
        key = np.stack([self.mat, self.blk, self.row, self.col])
        uniq, inv = np.unique(key, axis=1, return_inverse=True)
        merged = np.zeros(uniq.shape[1])
        np.add.at(merged, inv.ravel(), val)
        keep = merged != 0
        return ConicProgram(list(self.psd_blocks), self.nonneg_count, self.b.copy(),
                            uniq[0][keep], uniq[1][keep], uniq[2][keep], uniq[3][keep],
                            merged[keep], maximize=True)

    def same_as(self, other: "ConicProgram") -> bool:
        a, c = self.canonical(), other.canonical()
        return (a.block_dims == c.block_dims and a.nonneg_count == c.nonneg_count
                and np.array_equal(a.b, c.b)
                and all(np.array_equal(getattr(a, f), getattr(c, f))
                        for f in ("mat", "blk", "row", "col", "val")))

    def stats(self) -> Dict[str, object]:
        return {"constraints": self.num_constraints,
                "psd_blocks": len(self.psd_blocks),
                "max_block": max(self.block_dims, default=0),
                "nonneg": self.nonneg_count,
                "nnz": int(len(self.val))}


@dataclass
class ConicSolution:
    status: str
    objective: float = float("nan")
    primal: List[np.ndarray] = field(default_factory=list)
    primal_nonneg: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dual: np.ndarray = field(default_factory=lambda: np.zeros(0))
    certificate: Optional[np.ndarray] = None
    residuals: Dict[str, float] = field(default_factory=dict)
    iterations: int = 0

    @property
    def value(self) -> float:
        return self.objective

    @property
    def x(self) -> np.ndarray:
        return self.primal_nonneg


class ProgramBuilder:
    """Incremental construction of a :class:`ConicProgram`.

    Linear expressions are dicts mapping a variable entry ``(blk, i, j)`` to
    the coefficient multiplying ``X_blk[i, j]`` itself (not SDPA's halved
    convention); the builder does the conversion.  Nonnegative scalars are
    addressed as ``(NONNEG, k, k)``.
    """

    NONNEG = -1

    def __init__(self):
        self.blocks: List[Tuple[str, int]] = []
        self.nonneg_names: List[str] = []
        self._mat: List[int] = []
        self._blk: List[int] = []
        self._row: List[int] = []
        self._col: List[int] = []
        self._val: List[float] = []
        self._b: List[float] = []

    def add_block(self, name: str, dim: int) -> int:
        if dim <= 0:
            raise ValueError("block dimension must be positive")
        self.blocks.append((name, int(dim)))
        return len(self.blocks) - 1

    def add_nonneg(self, name: str = "") -> int:
        self.nonneg_names.append(name)
        return len(self.nonneg_names) - 1

    def _emit(self, matno: int, expr: Dict[Tuple[int, int, int], float]) -> None:
        for (blk, i, j), c in expr.items():
            if c == 0:
                continue
            if i > j:
                i, j = j, i
            self._mat.append(matno)
            self._blk.append(blk)
            self._row.append(i)
            self._col.append(j)
            self._val.append(c if i == j else 0.5 * c)

    def add_equality(self, expr: Dict[Tuple[int, int, int], float], rhs: float) -> int:
        self._b.append(float(rhs))
        self._emit(len(self._b), expr)
        return len(self._b) - 1

    def set_objective(self, expr: Dict[Tuple[int, int, int], float]) -> None:
        self._emit(0, expr)

    @property
    def num_constraints(self) -> int:
        return len(self._b)

    def build(self, maximize: bool = False) -> ConicProgram:
        p = len(self.blocks)
        blk = np.array(self._blk, dtype=np.int64)
        blk[blk == self.NONNEG] = p
        return ConicProgram(list(self.blocks), len(self.nonneg_names), np.array(self._b),
                            np.array(self._mat, dtype=np.int64), blk,
                            np.array(self._row, dtype=np.int64),
                            np.array(self._col, dtype=np.int64),
                            np.array(self._val), maximize=maximize,
                            nonneg_names=list(self.nonneg_names))
