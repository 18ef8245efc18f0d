"""Solver-independent optimality and certificate checks for conic solutions.

Everything is recomputed from the raw coefficient lists of the program, so
these checks share no code with the solver.
"""
import numpy as np


def _entries(prog):
    return (prog.mat.astype(int), prog.blk.astype(int), prog.row.astype(int),
            prog.col.astype(int), prog.val.astype(float))


def apply(prog, X, x):
    """Values ``<A_r, X> + a_r . x`` for every row ``r`` (row 0 is the objective)."""
    mat, blk, row, col, val = _entries(prog)
    p = len(prog.block_dims)
    out = np.zeros(prog.num_constraints + 1)
    for k in range(len(val)):
        if blk[k] == p:
            out[mat[k]] += val[k] * x[row[k]]
        else:
            f = 1.0 if row[k] == col[k] else 2.0
            out[mat[k]] += f * val[k] * X[blk[k]][row[k], col[k]]
    return out


def adjoint(prog, w):
    """``sum_r w_r A_r`` per block, with ``w[0]`` weighting the objective."""
    mat, blk, row, col, val = _entries(prog)
    p = len(prog.block_dims)
    mats = [np.zeros((d, d)) for d in prog.block_dims]
    lp = np.zeros(prog.nonneg_count)
    for k in range(len(val)):
        c = w[mat[k]] * val[k]
        if blk[k] == p:
            lp[row[k]] += c
        else:
            mats[blk[k]][row[k], col[k]] += c
            if row[k] != col[k]:
                mats[blk[k]][col[k], row[k]] += c
    return mats, lp


def check_optimal(prog, sol, tol_feas=1e-8, tol_gap=1e-8, slack=10.0):
    """Primal feasibility, dual feasibility and relative gap.

    ``slack`` widens the tolerances a little because the solver measures
    residuals in its own scaled norms.
    """
    X, x = sol.primal, sol.primal_nonneg
    vals = apply(prog, X, x)
    bnorm = 1.0 + np.abs(prog.b).max(initial=0.0)
    pres = np.abs(vals[1:] - prog.b).max(initial=0.0) / bnorm
    assert pres <= slack * tol_feas, f"primal residual {pres}"
    for Xb in X:
        assert np.linalg.eigvalsh(Xb).min() >= -slack * tol_feas * max(1.0, np.abs(Xb).max())
    if x.size:
        assert x.min() >= -slack * tol_feas * max(1.0, np.abs(x).max())
    sgn = -1.0 if prog.maximize else 1.0
    y = sol.dual
    # dual slack of min sgn*C.X is  sgn*C - sum_r y_r A_r
    Smats, slp = adjoint(prog, np.concatenate([[sgn], -y]))
    cmax = 1.0 + max((np.abs(M).max(initial=0.0) for M in adjoint(prog, np.eye(len(y) + 1)[0])[0]),
                     default=0.0)
    for S in Smats:
        assert np.linalg.eigvalsh(S).min() >= -slack * tol_feas * cmax * 10
    if slp.size:
        assert slp.min() >= -slack * tol_feas * cmax * 10
    pobj = sgn * vals[0]
    dobj = float(prog.b @ y)
    gap = abs(pobj - dobj) / (1.0 + abs(pobj))
    assert gap <= slack * tol_gap, f"gap {gap}"
    assert abs(sgn * sol.objective - pobj) <= slack * tol_gap * (1.0 + abs(pobj))


def check_certificate(prog, y, tol=1e-7):
    """Farkas witness: ``b.y > 0`` and ``sum y_r A_r`` negative semidefinite blockwise."""
    y = np.asarray(y, dtype=float)
    by = float(prog.b @ y)
    assert by > 0
    mats, lp = adjoint(prog, np.concatenate([[0.0], y / by]))
    for S in mats:
        assert np.linalg.eigvalsh(S).max() <= tol * max(1.0, np.abs(S).max())
    if lp.size:
        assert lp.max() <= tol


def check_solution(prog, sol, tol=1e-8):
    if sol.status == "Optimal":
        check_optimal(prog, sol, tol, tol)
    elif sol.status == "PrimalInfeasible":
        check_certificate(prog, sol.certificate)
    return sol.status
