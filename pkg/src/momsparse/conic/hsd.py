"""Homogeneous self-dual interior-point method for :class:`ConicProgram`.

The method follows the usual embedding

    A x - b tau = 0,   A^T y + s - c tau = 0,   b^T y - c^T x - kappa = 0

with Nesterov-Todd (default) or HKM search directions and a Mehrotra
predictor-corrector.  Blocks of the
same size are stacked so that factorizations, inverses and step-length
eigenvalue problems run batched in numpy.  The Schur complement is assembled
as ``V K V^T`` where ``V`` holds the constraint coefficients over the upper
triangle of each block and ``K`` is block diagonal.
"""
from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .program import (ConicProgram, ConicSolution, DUAL_INFEASIBLE, OPTIMAL,
                      PRIMAL_INFEASIBLE, UNKNOWN)

log = logging.getLogger(__name__)

_KERNEL_CHUNK = 4_000_000   # entries per kernel slab before chunking
QR_SWITCH_STEP = 1e-4       # steps shorter than this trigger the orthogonal projection
BACKTRACKS = 6              # halvings tried when a step leaves the cone


@dataclass
class SolverOptions:
    tol_gap: float = 1e-8
    tol_feas: float = 1e-8
    max_iters: int = 200
    step_fraction: float = 0.98
    infeas_ratio: float = 1e-9
    scaling: str = "nt"
    verbose: bool = False

    @classmethod
    def from_env(cls, **overrides) -> "SolverOptions":
        opts = cls()
        env = {"tol_gap": "MS_TOL_GAP", "tol_feas": "MS_TOL_FEAS", "max_iters": "MS_MAX_ITERS"}
        for name, var in env.items():
            raw = os.environ.get(var)
            if raw:
                cast = int if name == "max_iters" else float
                setattr(opts, name, cast(raw))
        for k, v in overrides.items():
            if v is not None:
                setattr(opts, k, v)
        return opts


class _Group:
    """Stack of PSD blocks sharing one dimension."""

    def __init__(self, dim: int, block_ids: List[int], offsets: np.ndarray):
        self.n = dim
        self.ids = block_ids
        self.iu = np.triu_indices(dim)
        K = len(self.iu[0])
        self.K = K
        self.pos = offsets[:, None] + np.arange(K)[None, :]        # (G, K)
        self.offdiag = self.iu[0] != self.iu[1]

    def to_mat(self, vec: np.ndarray) -> np.ndarray:
        G = len(self.ids)
        out = np.zeros((G, self.n, self.n))
        vals = vec[self.pos]
        out[:, self.iu[0], self.iu[1]] = vals
        out[:, self.iu[1], self.iu[0]] = vals
        return out

    def to_vec(self, mats: np.ndarray, vec: np.ndarray) -> None:
        vec[self.pos] = mats[:, self.iu[0], self.iu[1]]


class _Structure:
    """Index bookkeeping shared by all iterations of one solve."""

    def __init__(self, prog: ConicProgram):
        dims = prog.block_dims
        self.p = len(dims)
        sizes = [d * (d + 1) // 2 for d in dims]
        self.block_off = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.n_psd = int(self.block_off[-1])
        self.n_lp = prog.nonneg_count
        self.N = self.n_psd + self.n_lp
        self.nu = sum(dims) + self.n_lp
        by_dim: Dict[int, List[int]] = {}
        for k, d in enumerate(dims):
            by_dim.setdefault(d, []).append(k)
        self.groups = [_Group(d, ids, self.block_off[ids]) for d, ids in sorted(by_dim.items())]
        wt = np.ones(self.N)
        for g in self.groups:
            wt[g.pos[:, g.offdiag]] = 2.0
        self.wt = wt
        self.m = prog.num_constraints
        # flat column index of each coefficient
        col = np.empty(len(prog.val), dtype=np.int64)
        lp = prog.blk == self.p
        ps = ~lp
        d = np.array(dims + [1], dtype=np.int64)
        r, c, bk = prog.row[ps], prog.col[ps], prog.blk[ps]
        n_b = d[bk]
        col[ps] = self.block_off[bk] + r * n_b - r * (r - 1) // 2 + (c - r)
        col[lp] = self.n_psd + prog.row[lp]
        obj = prog.mat == 0
        self.c = np.zeros(self.N)
        np.add.at(self.c, col[obj], prog.val[obj])
        if prog.maximize:
            self.c = -self.c
        con = ~obj
        self.V = sp.csr_matrix((prog.val[con], (prog.mat[con] - 1, col[con])),
                               shape=(self.m, self.N))
        self.V.sum_duplicates()
        self._kernel_pattern()

    def _kernel_pattern(self):
        rows, cols = [], []
        for g in self.groups:
            for b in range(len(g.ids)):
                pb = g.pos[b]
                rows.append(np.repeat(pb, g.K))
                cols.append(np.tile(pb, g.K))
        if self.n_lp:
            lp = np.arange(self.n_psd, self.N)
            rows.append(lp)
            cols.append(lp)
        rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
        order = np.lexsort((cols, rows))
        self.k_order = order
        indptr = np.zeros(self.N + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        self.k_indptr = np.cumsum(indptr)
        self.k_indices = cols[order]
        self.k_nnz = len(rows)

    # vectors <-> block matrices -------------------------------------------
    def mats(self, vec):
        return [g.to_mat(vec) for g in self.groups], vec[self.n_psd:].copy()

    def vec(self, mats, lp):
        out = np.zeros(self.N)
        for g, M in zip(self.groups, mats):
            g.to_vec(M, out)
        out[self.n_psd:] = lp
        return out

    def A(self, vec):
        return self.V @ (self.wt * vec)

    def AT(self, y):
        return self.V.T @ y


def _sym(M):
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def _inner(u, v, wt):
    return float(np.dot(wt * u, v))


def _kernel_block(X, W, g: _Group) -> np.ndarray:
    """Stacked Schur kernels ``K[(pq),(rs)]`` for a group, flattened row-major."""
    P, Q = g.iu
    scale = np.where(g.offdiag, 1.0, 0.5)
    G = X.shape[0]
    out = np.empty((G, g.K, g.K))
    step = max(1, _KERNEL_CHUNK // max(1, G * g.K))
    for a in range(0, g.K, step):
        sl = slice(a, min(g.K, a + step))
        p, q = P[sl], Q[sl]
        t = (X[:, q[:, None], P[None, :]] * W[:, p[:, None], Q[None, :]]
             + X[:, q[:, None], Q[None, :]] * W[:, p[:, None], P[None, :]]
             + X[:, p[:, None], P[None, :]] * W[:, q[:, None], Q[None, :]]
             + X[:, p[:, None], Q[None, :]] * W[:, q[:, None], P[None, :]])
        out[:, sl, :] = t * scale[sl][None, :, None] * scale[None, None, :]
    return out


class _Factor:
    """Cholesky (dense) or sparse LU of the Schur complement with a small
    diagonal shift when the matrix is numerically indefinite.

    With ``strict=True`` a dense matrix that needs a shift raises
    ``LinAlgError`` instead, so the caller can switch to another method.
    """

    def __init__(self, M, strict: bool = False):
        self.sparse = sp.issparse(M)
        diag = M.diagonal()
        scale = max(float(np.max(np.abs(diag))) if len(diag) else 1.0, 1e-300)
        shift = 0.0
        for attempt in range(8):
            try:
                if self.sparse:
                    Ms = (M + sp.identity(M.shape[0]) * shift).tocsc() if shift else M.tocsc()
                    self.lu = spla.splu(Ms, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                                        options={"SymmetricMode": True})
                    if not np.all(np.isfinite(self.lu.U.diagonal())) or np.any(self.lu.U.diagonal() <= 0):
                        raise np.linalg.LinAlgError("non-positive pivot")
                else:
                    Md = M + shift * np.eye(M.shape[0]) if shift else M
                    self.cho = sla.cho_factor(Md, lower=True, check_finite=False)
                break
            except (np.linalg.LinAlgError, RuntimeError):
                if strict and not self.sparse:
                    raise np.linalg.LinAlgError("Schur complement is numerically singular")
                shift = scale * (1e-14 if shift == 0.0 else shift / scale * 100)
        else:
            raise np.linalg.LinAlgError("Schur complement factorization failed")
        self.shift = shift
        self.M = M

    def solve(self, r):
        x = self._solve(r)
        if self.shift:
            # a couple of refinement sweeps against the unshifted matrix
            for _ in range(2):
                x = x + self._solve(r - self.M @ x)
        return x

    def _solve(self, r):
        if self.sparse:
            return self.lu.solve(r)
        return sla.cho_solve(self.cho, r, check_finite=False)


class _Projector:
    """Orthogonal factorization of the NT-scaled constraint matrix.

    In the scaled space the primal step is the projection of a target onto
    an affine set, which a QR factor delivers without squaring the condition
    number the way the Schur complement does.  Scaled vectors use the
    orthonormal ``svec`` coordinates (off-diagonals times sqrt 2).
    """

    def __init__(self, st: "_Structure", VTd: np.ndarray, Gm, glp):
        self.st = st
        self.Gm = Gm
        self.glp = glp
        self.rw = np.sqrt(st.wt)
        BT = np.empty_like(VTd)
        A0 = self.rw[:, None] * VTd
        for g, G in zip(st.groups, Gm):
            BT[g.pos] = self._congruence(G, g, A0[g.pos])
        if st.n_lp:
            BT[st.n_psd:] = glp[:, None] * VTd[st.n_psd:]
        self.Q, self.R = sla.qr(BT, mode="economic", check_finite=False)
        d = np.abs(np.diag(self.R))
        if d.size and d.min() <= 1e-14 * d.max():
            raise np.linalg.LinAlgError("scaled constraints are rank deficient")

    @staticmethod
    def _congruence(G, g: _Group, V, chunk_bytes: float = 6.4e7):
        """Columns ``svec(G^T Z G)`` for the columns ``svec(Z)`` of ``V``.

        ``V`` has shape ``(blocks, K, m)`` in orthonormal ``svec`` coordinates;
        the columns are processed in chunks to bound the dense temporaries.
        """
        P, Q = g.iu
        a = np.where(g.offdiag, np.sqrt(2.0), 1.0)
        nb, K, m = V.shape
        d = g.n
        out = np.empty_like(V)
        step = max(1, int(chunk_bytes // (8 * nb * d * d)))
        Gt = np.swapaxes(G, -1, -2)[:, None]
        for c0 in range(0, m, step):
            c1 = min(m, c0 + step)
            vals = np.swapaxes(V[:, :, c0:c1], 1, 2) / a           # (nb, c, K)
            Z = np.zeros((nb, c1 - c0, d, d))
            Z[:, :, P, Q] = vals
            Z[:, :, Q, P] = vals
            W = Gt @ Z @ G[:, None]
            out[:, :, c0:c1] = np.swapaxes(W[:, :, P, Q] * a, 1, 2)
        return out

    def scale_dual(self, Fm, flp):
        """``svec(G^T F G)``."""
        mats = [np.swapaxes(G, -1, -2) @ F @ G for G, F in zip(self.Gm, Fm)]
        return self.rw * self.st.vec(mats, self.glp * flp)

    def scale_primal(self, Pm, plp):
        """``svec(G^{-1} P G^{-T})``."""
        mats = []
        for G, P in zip(self.Gm, Pm):
            Z = np.linalg.solve(G, P)
            mats.append(np.linalg.solve(G, np.swapaxes(Z, -1, -2)))
        return self.rw * self.st.vec(mats, plp / self.glp)

    def unscale_primal(self, z):
        mats, lp = self.st.mats(z / self.rw)
        return ([G @ Z @ np.swapaxes(G, -1, -2) for G, Z in zip(self.Gm, mats)],
                self.glp * lp)

    def project(self, f, r):
        """Closest point to ``f`` on ``{z : B z = r}`` and its multiplier."""
        Qf = self.Q.T @ f
        w = sla.solve_triangular(self.R, r, trans="T", check_finite=False)
        z = f - self.Q @ Qf + self.Q @ w
        y = sla.solve_triangular(self.R, w - Qf, check_finite=False)
        return z, y


def _chol_ok(mats):
    try:
        for M in mats:
            np.linalg.cholesky(M)
        return True
    except np.linalg.LinAlgError:
        return False


def _max_step(mats, dmats, lp, dlp):
    """Largest alpha with mats + alpha dmats PSD (and lp + alpha dlp >= 0)."""
    amax = np.inf
    for X, dX in zip(mats, dmats):
        L = np.linalg.cholesky(X)
        Z = np.linalg.solve(L, dX)
        Z = np.linalg.solve(L, np.swapaxes(Z, -1, -2))
        lam = np.linalg.eigvalsh(_sym(Z)).min()
        if lam < 0:
            amax = min(amax, -1.0 / lam)
    neg = dlp < 0
    if np.any(neg):
        amax = min(amax, float(np.min(-lp[neg] / dlp[neg])))
    return amax


def verify_certificate(prog: ConicProgram, y: np.ndarray, tol: float) -> bool:
    """Farkas check: ``b^T y > 0`` and ``sum_i y_i A_i`` negative semidefinite
    on every block, up to ``tol`` (``y`` is normalised so that ``b^T y = 1``)."""
    y = np.asarray(y, dtype=float)
    by = float(prog.b @ y)
    if not by > 0:
        return False
    y = y / by
    st = _Structure(prog)
    u = st.AT(y)
    mats, lp = st.mats(u)
    for M in mats:
        if M.size and np.linalg.eigvalsh(M).max() > tol:
            return False
    return not (lp.size and lp.max() > tol)


def solve(prog: ConicProgram, opts: Optional[SolverOptions] = None, **kw) -> ConicSolution:
    """Solve a :class:`ConicProgram`.

    Parameters
    ----------
    prog : ConicProgram
    opts : SolverOptions, optional
        Defaults come from :meth:`SolverOptions.from_env`; keyword arguments
        ``tol_gap``, ``tol_feas`` and ``max_iters`` override single fields.

    Returns
    -------
    ConicSolution
        ``Optimal`` only after the KKT conditions are met at the requested
        tolerances; ``PrimalInfeasible`` only with a verified Farkas
        certificate; ``Unknown`` otherwise.
    """
    opts = opts or SolverOptions.from_env(**kw)
    t0 = time.perf_counter()
    st = _Structure(prog)
    m, N = st.m, st.N

    # --- scaling ---------------------------------------------------------------
    Vw = st.V.multiply(st.wt[None, :]).tocsr()
    rn = np.sqrt(np.asarray(Vw.multiply(Vw).sum(axis=1)).ravel())
    rn[rn == 0] = 1.0
    Dr = 1.0 / rn
    b0 = prog.b.astype(float)
    c0 = st.c.copy()
    st.V = sp.diags(Dr) @ st.V
    st.V = st.V.tocsr()
    bs = Dr * b0
    sb = max(1.0, float(np.linalg.norm(bs)))
    cnorm = np.sqrt(_inner(c0, c0, st.wt)) if N else 0.0
    sc = max(1.0, cnorm)
    b = bs / sb
    c = c0 / sc
    nb0, nc0 = float(np.linalg.norm(b0)), cnorm

    # --- Schur machinery ------------------------------------------------------
    dense_schur = m <= 3000
    VT = st.V.T.tocsr()

    def schur(Xm, Wm, xlp, slp):
        data = np.empty(st.k_nnz)
        parts = [(_kernel_block(X, W, g)).ravel() for g, X, W in zip(st.groups, Xm, Wm)]
        if st.n_lp:
            parts.append(xlp / slp)
        flat = np.concatenate(parts) if parts else np.zeros(0)
        data[:] = flat[st.k_order]
        Kb = sp.csr_matrix((data, st.k_indices, st.k_indptr), shape=(N, N))
        Mx = (st.V @ Kb) @ VT
        if dense_schur or Mx.nnz > 0.15 * m * m:
            return Mx.toarray()
        return Mx.tocsc()

    def D(Vm, vlp, Lm, Wm, xlp, slp):
        return [_sym(X @ V_ @ W) for X, V_, W in zip(Lm, Vm, Wm)], xlp / slp * vlp

    # --- initial point ----------------------------------------------------------
    Xm = [np.broadcast_to(np.eye(g.n), (len(g.ids), g.n, g.n)).copy() for g in st.groups]
    Sm = [M.copy() for M in Xm]
    xlp = np.ones(st.n_lp)
    slp = np.ones(st.n_lp)
    y = np.zeros(m)
    tau, kappa = 1.0, 1.0
    cm, clp = st.mats(c)

    status = UNKNOWN
    info: Dict[str, float] = {}
    small_steps = 0
    it = 0
    qr_ok = opts.scaling == "nt" and dense_schur and N >= m
    use_qr = False
    VTd = None
    cert = None
    for it in range(opts.max_iters + 1):
        xv = st.vec(Xm, xlp)
        sv = st.vec(Sm, slp)
        Ax = st.A(xv)
        ATy = st.AT(y)
        F1 = Ax - b * tau
        F2 = ATy + sv - c * tau
        cx = _inner(c, xv, st.wt)
        by = float(b @ y)
        F3 = by - cx - kappa
        mu = (_inner(xv, sv, st.wt) + tau * kappa) / (st.nu + 1)

        # --- termination tests on the unscaled problem ---------------------
        pres = np.linalg.norm((Ax / tau - b) * sb / Dr) / (1.0 + nb0)
        dres = np.sqrt(_inner(F2 / tau, F2 / tau, st.wt)) * sc / (1.0 + nc0)
        pobj = cx / tau * sb * sc
        dobj = by / tau * sb * sc
        gap = abs(pobj - dobj) / (1.0 + abs(pobj))
        info = {"pres": float(pres), "dres": float(dres), "gap": float(gap),
                "tau": tau, "kappa": kappa, "mu": mu}
        if opts.verbose:
            log.info("it %3d pobj %.9e dobj %.9e pres %.1e dres %.1e gap %.1e tau %.1e k %.1e "
                     "|x| %.1e |y| %.1e", it, pobj, dobj, pres, dres, gap, tau, kappa,
                     np.linalg.norm(xv) / tau, np.linalg.norm(y) / tau)
        if pres <= opts.tol_feas and dres <= opts.tol_feas and gap <= opts.tol_gap:
            status = OPTIMAL
            break
        if by > 0:
            ycert = Dr * y / (sb * by)
            if tau / kappa < opts.infeas_ratio and verify_certificate(prog, ycert, opts.tol_feas):
                status, cert = PRIMAL_INFEASIBLE, ycert
                break
        if cx < 0:
            xr = xv / (-cx)
            if (np.linalg.norm(st.A(xr) * sb / Dr) <= opts.tol_feas * max(1.0, nb0)
                    and tau / kappa < opts.infeas_ratio):
                status = DUAL_INFEASIBLE
                break
        if it == opts.max_iters:
            break

        # --- Newton system ----------------------------------------------------
        try:
            if opts.scaling == "nt":
                Gm, Lam, Sinv = [], [], []
                for X, S in zip(Xm, Sm):
                    Lx = np.linalg.cholesky(X)
                    Ls = np.linalg.cholesky(S)
                    _, lam, Vt = np.linalg.svd(np.swapaxes(Ls, -1, -2) @ Lx)
                    G = Lx @ np.swapaxes(Vt, -1, -2) / np.sqrt(lam)[:, None, :]
                    Gm.append(G)
                    Lam.append(lam)
                    Sinv.append((G / lam[:, None, :]) @ np.swapaxes(G, -1, -2))
                Wm = [G @ np.swapaxes(G, -1, -2) for G in Gm]
                Lm = Wm
            else:
                Wm = []
                for S in Sm:
                    L = np.linalg.cholesky(S)
                    Li = np.linalg.inv(L)
                    Wm.append(np.swapaxes(Li, -1, -2) @ Li)
                Lm, Sinv = Xm, Wm
            proj = None
            if use_qr:
                proj = _Projector(st, VTd, Gm, np.sqrt(xlp / slp))
            else:
                Mschur = schur(Lm, Wm, xlp, slp)
                try:
                    fac = _Factor(Mschur, strict=qr_ok)
                except np.linalg.LinAlgError:
                    if not qr_ok:
                        raise
                    try:
                        VTd = st.V.T.toarray()
                        proj = _Projector(st, VTd, Gm, np.sqrt(xlp / slp))
                        log.debug("switching to the orthogonal projection at iteration %d", it)
                        use_qr = True
                    except np.linalg.LinAlgError:
                        qr_ok = False
                        fac = _Factor(Mschur)
        except np.linalg.LinAlgError:
            log.debug("numerical breakdown at iteration %d", it)
            break

        def mop(u):
            Vm, vlp = st.mats(st.AT(u))
            Dm, Dlp = D(Vm, vlp, Lm, Wm, xlp, slp)
            return st.A(st.vec(Dm, Dlp))

        def msolve(h):
            # refine against the operator itself; the formed matrix loses
            # digits once blocks become nearly singular
            u = fac.solve(h)
            hn = np.linalg.norm(h)
            for _ in range(3):
                r = h - mop(u)
                if np.linalg.norm(r) <= 1e-15 * hn:
                    break
                u = u + fac.solve(r)
            return u

        if proj is not None:
            ct = proj.scale_dual(cm, clp)
            F2m, F2lp = st.mats(F2)
            F2t = proj.scale_dual(F2m, F2lp)
            z1, y1 = proj.project(ct, -b)
            coef = -float(b @ y1) + float(ct @ z1) + kappa / tau

            def direction(Pm, Plp, eta, rtau):
                f0 = proj.scale_primal(Pm, Plp) + eta * F2t
                z0, y0 = proj.project(f0, -eta * F1)
                rhs = -eta * F3 - float(b @ y0) + float(ct @ z0) + rtau / tau
                dtau = rhs / coef
                dy = y0 - dtau * y1
                dXm, dXlp = proj.unscale_primal(z0 - dtau * z1)
                dSm, dSlp = st.mats(-eta * F2 - st.AT(dy) + c * dtau)
                dkappa = (rtau - kappa * dtau) / tau
                return dXm, dXlp, dy, dSm, dSlp, dtau, dkappa
        else:
            Dcm, Dclp = D(cm, clp, Lm, Wm, xlp, slp)
            Dc = st.vec(Dcm, Dclp)
            q = st.A(Dc)
            cDc = _inner(c, Dc, st.wt)
            v = msolve(q + b)
            F2m, F2lp = st.mats(F2)
            DF2m, DF2lp = D(F2m, F2lp, Lm, Wm, xlp, slp)
            DF2 = st.vec(DF2m, DF2lp)
            cDF2 = _inner(c, DF2, st.wt)

            def direction(Pm, Plp, eta, rtau):
                Pv = st.vec(Pm, Plp)
                h1 = -eta * F1 - st.A(Pv + eta * DF2)
                u = msolve(h1)
                coef = float((b - q) @ v) + cDc + kappa / tau
                rhs = (-eta * F3 - float(b @ u) + _inner(c, Pv, st.wt) + eta * cDF2
                       + float(q @ u) + rtau / tau)
                dtau = rhs / coef
                dy = u + dtau * v
                dSv = -eta * F2 - st.AT(dy) + c * dtau
                dSm, dSlp = st.mats(dSv)
                DdSm, DdSlp = D(dSm, dSlp, Lm, Wm, xlp, slp)
                dXm = [P - Dd for P, Dd in zip(Pm, DdSm)]
                dXlp = Plp - DdSlp
                dkappa = (rtau - kappa * dtau) / tau
                return dXm, dXlp, dy, dSm, dSlp, dtau, dkappa

        def steplen(dXm, dXlp, dSm, dSlp, dtau, dkappa):
            a = min(_max_step(Xm, dXm, xlp, dXlp), _max_step(Sm, dSm, slp, dSlp))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkappa < 0:
                a = min(a, -kappa / dkappa)
            return a

        try:
            # predictor
            Pm = [-X for X in Xm]
            aff = direction(Pm, -xlp, 1.0, -tau * kappa)
            dXa, dxa, _, dSa, dsa, dta, dka = aff
            a_aff = min(1.0, steplen(dXa, dxa, dSa, dsa, dta, dka))
            xa = st.vec([X + a_aff * d for X, d in zip(Xm, dXa)], xlp + a_aff * dxa)
            sa = st.vec([S + a_aff * d for S, d in zip(Sm, dSa)], slp + a_aff * dsa)
            mu_aff = (_inner(xa, sa, st.wt) + (tau + a_aff * dta) * (kappa + a_aff * dka)) / (st.nu + 1)
            sigma = float(np.clip((mu_aff / mu) ** 3, 0.0, 1.0))
            # corrector
            if opts.scaling == "nt":
                Pm = []
                for G, lam, Si, X, dX, dS in zip(Gm, Lam, Sinv, Xm, dXa, dSa):
                    Gt = np.swapaxes(G, -1, -2)
                    dx = np.linalg.solve(G, np.swapaxes(np.linalg.solve(G, dX), -1, -2))
                    ds = Gt @ dS @ G
                    Y = (dx @ ds + ds @ dx) / (lam[:, :, None] + lam[:, None, :])
                    Pm.append(sigma * mu * Si - X - _sym(G @ Y @ Gt))
            else:
                Pm = [sigma * mu * W - X - _sym(dX @ dS @ W)
                      for W, X, dX, dS in zip(Wm, Xm, dXa, dSa)]
            Plp = sigma * mu / slp - xlp - dxa * dsa / slp
            rt = sigma * mu - tau * kappa - dta * dka
            dXm, dXlp, dy, dSm, dSlp, dtau, dkappa = direction(Pm, Plp, 1.0 - sigma, rt)
            amax = steplen(dXm, dXlp, dSm, dSlp, dtau, dkappa)
        except np.linalg.LinAlgError:
            log.debug("numerical breakdown in direction at iteration %d", it)
            break
        alpha = min(1.0, opts.step_fraction * amax)
        if opts.verbose:
            log.info("    alpha %.3e sigma %.3e a_aff %.3e qr %s", alpha, sigma, a_aff, use_qr)
        if qr_ok and not use_qr and not (alpha >= QR_SWITCH_STEP):
            # an inaccurate Schur direction looks like a blocked step
            log.debug("step stalled; switching to the orthogonal projection at iteration %d", it)
            VTd = st.V.T.toarray()
            use_qr = True
            continue
        if not np.isfinite(alpha) or alpha < 1e-10:
            small_steps += 1
            if small_steps >= 3:
                break
            continue
        # the step-length eigenvalues carry rounding error near the boundary,
        # so shorten the step until the new iterate is strictly interior
        for _ in range(BACKTRACKS):
            Xn = [X + alpha * d for X, d in zip(Xm, dXm)]
            Sn = [S + alpha * d for S, d in zip(Sm, dSm)]
            xn, sn = xlp + alpha * dXlp, slp + alpha * dSlp
            tn, kn = tau + alpha * dtau, kappa + alpha * dkappa
            if (tn > 0 and kn > 0 and np.all(xn > 0) and np.all(sn > 0)
                    and _chol_ok(Xn) and _chol_ok(Sn)):
                break
            alpha *= 0.5
        else:
            log.debug("iterate left the cone at iteration %d", it)
            break
        Xm, Sm, xlp, slp, tau, kappa = Xn, Sn, xn, sn, tn, kn
        y = y + alpha * dy

    # --- assemble the result ------------------------------------------------
    info["time_s"] = time.perf_counter() - t0
    sol = ConicSolution(status=status, iterations=it, residuals=info)
    if status == PRIMAL_INFEASIBLE:
        sol.certificate = cert
        return sol
    if status == DUAL_INFEASIBLE:
        return sol
    xv = st.vec(Xm, xlp) * (sb / tau)
    Xb, xl = st.mats(xv)
    blocks: List[Optional[np.ndarray]] = [None] * st.p
    for g, M in zip(st.groups, Xb):
        for k, bid in enumerate(g.ids):
            blocks[bid] = M[k]
    sol.primal = blocks
    sol.primal_nonneg = xl
    sol.dual = Dr * y * (sc / tau)
    obj = _inner(c0, xv, st.wt)
    sol.objective = -obj if prog.maximize else obj
    if status == UNKNOWN and by > 0:
        ycert = Dr * y / (sb * by)
        if verify_certificate(prog, ycert, opts.tol_feas):
            sol.status, sol.certificate = PRIMAL_INFEASIBLE, ycert
    return sol
