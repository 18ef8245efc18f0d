"""SDPA sparse (``.dat-s``) writer and reader.

The exported problem is SDPA's dual form ``max <F0, Y>`` subject to
``<F_i, Y> = c_i`` and ``Y`` PSD, which is our standard form with
``F0 = -C`` for minimisation.  The nonnegative variables form one trailing
diagonal block with negative size.
"""
from __future__ import annotations

import numpy as np

from .program import ConicProgram


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export_sdpa(p: ConicProgram) -> str:
    sizes = [d for d in p.block_dims]
    if p.nonneg_count:
        sizes.append(-p.nonneg_count)
    lines = [str(p.num_constraints), str(len(sizes)),
             " ".join(str(s) for s in sizes),
             " ".join(_fmt(v) for v in p.b) if p.num_constraints else ""]
    sign = 1.0 if p.maximize else -1.0
    order = np.lexsort((p.col, p.row, p.blk, p.mat))
    for k in order:
        v = p.val[k] * (sign if p.mat[k] == 0 else 1.0)
        if v == 0:
            continue
        lines.append(f"{p.mat[k]} {p.blk[k] + 1} {p.row[k] + 1} {p.col[k] + 1} {_fmt(v)}")
    return "\n".join(lines) + "\n"


def parse_sdpa(text: str) -> ConicProgram:
    """Read ``.dat-s`` text back into a maximisation :class:`ConicProgram`.

    Comment lines (leading ``"`` or ``*``) and the usual ``{}(),`` punctuation
    are ignored.
    """
    rows = []
    for raw in text.splitlines():
        s = raw.strip()
        if not s or s[0] in '"*':
            continue
        for ch in "{}(),":
            s = s.replace(ch, " ")
        rows.append(s.split())
    if len(rows) < 3:
        raise ValueError("truncated SDPA file")
    m = int(rows[0][0])
    nblk = int(rows[1][0])
    sizes = [int(float(t)) for t in rows[2][:nblk]]
    k = 3
    if m:
        b = np.array([float(t) for t in rows[3][:m]])
        k = 4
    else:
        b = np.zeros(0)
        if len(rows) > 3 and len(rows[3]) != 5:
            k = 4
    psd = [(f"B{i + 1}", s) for i, s in enumerate(sizes) if s > 0]
    lp_size = sum(-s for s in sizes if s < 0)
    if any(s < 0 for s in sizes[:-1]):
        raise ValueError("only a single trailing diagonal block is supported")
    ent = np.array([[float(t) for t in r[:5]] for r in rows[k:]]) if len(rows) > k else np.zeros((0, 5))
    mat = ent[:, 0].astype(np.int64)
    blk = ent[:, 1].astype(np.int64) - 1
    i = ent[:, 2].astype(np.int64) - 1
    j = ent[:, 3].astype(np.int64) - 1
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    return ConicProgram(psd, lp_size, b, mat, blk, lo, hi, ent[:, 4], maximize=True)
