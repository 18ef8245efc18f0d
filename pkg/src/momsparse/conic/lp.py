"""Linear programs through the conic solver's nonnegative block."""
from __future__ import annotations

import numpy as np

from .hsd import SolverOptions, solve
from .program import ConicSolution, ProgramBuilder


def lp_solve(c, A, b, sense="ge", maximize: bool = False,
             opts: SolverOptions = None) -> ConicSolution:
    """Solve ``min c^T x`` subject to ``A x (>=|<=|==) b`` and ``x >= 0``.

    ``sense`` is a single string for all rows or one entry per row.  Each
    inequality row gets its own slack in the nonnegative block.  The returned
    solution exposes the original variables as ``.x``.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape if A.size else (0, len(c))
    senses = [sense] * m if isinstance(sense, str) else list(sense)
    if len(senses) != m:
        raise ValueError("one sense per row expected")
    pb = ProgramBuilder()
    xs = [pb.add_nonneg(f"x{j}") for j in range(n)]
    for r in range(m):
        expr = {(pb.NONNEG, xs[j], xs[j]): A[r, j] for j in range(n) if A[r, j] != 0}
        s = senses[r]
        if s in ("ge", ">="):
            k = pb.add_nonneg(f"slack{r}")
            expr[(pb.NONNEG, k, k)] = -1.0
        elif s in ("le", "<="):
            k = pb.add_nonneg(f"slack{r}")
            expr[(pb.NONNEG, k, k)] = 1.0
        elif s not in ("eq", "=="):
            raise ValueError(f"unknown sense {s!r}")
        pb.add_equality(expr, b[r])
    pb.set_objective({(pb.NONNEG, xs[j], xs[j]): c[j] for j in range(n)})
    sol = solve(pb.build(maximize=maximize), opts)
    if len(sol.primal_nonneg):
        sol.primal_nonneg = sol.primal_nonneg[:n]
    return sol
