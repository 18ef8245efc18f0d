"""Built-in test matrices and the random sparse cp-matrix generator."""
from __future__ import annotations

import re
from dataclasses import dataclass
from math import comb
from typing import Dict, List, Tuple

import numpy as np

from . import graph as gr

EX1 = [[3, 2, 0, 0, 1],
       [2, 5, 6, 0, 0],
       [0, 6, 14, 4, 0],
       [0, 0, 4, 9, 1],
       [1, 0, 0, 1, 2]]

EX2 = [[2, 0, 0, 1, 1],
       [0, 2, 0, 1, 1],
       [0, 0, 2, 1, 1],
       [1, 1, 1, 3, 0],
       [1, 1, 1, 0, 3]]

EX3 = [[781, 0, 72, 36, 228, 320, 240, 228, 36, 96, 0],
       [0, 845, 0, 96, 36, 228, 320, 320, 228, 36, 96],
       [72, 0, 827, 0, 72, 36, 198, 320, 320, 198, 36],
       [36, 96, 0, 845, 0, 96, 36, 228, 320, 320, 228],
       [228, 36, 72, 0, 781, 0, 96, 36, 228, 240, 320],
       [320, 228, 36, 96, 0, 845, 0, 96, 36, 228, 320],
       [240, 320, 198, 36, 96, 0, 745, 0, 96, 36, 228],
       [228, 320, 320, 228, 36, 96, 0, 845, 0, 96, 36],
       [36, 228, 320, 320, 228, 36, 96, 0, 845, 0, 96],
       [96, 36, 198, 320, 240, 228, 36, 96, 0, 745, 0],
       [0, 96, 36, 228, 320, 320, 228, 36, 96, 0, 845]]

EX4 = [[91, 0, 0, 0, 19, 24, 24, 24, 19, 24, 24, 24],
       [0, 42, 0, 0, 24, 6, 6, 6, 24, 6, 6, 6],
       [0, 0, 42, 0, 24, 6, 6, 6, 24, 6, 6, 6],
       [0, 0, 0, 42, 24, 6, 6, 6, 24, 6, 6, 6],
       [19, 24, 24, 24, 91, 0, 0, 0, 19, 24, 24, 24],
       [24, 6, 6, 6, 0, 42, 0, 0, 24, 6, 6, 6],
       [24, 6, 6, 6, 0, 0, 42, 0, 24, 6, 6, 6],
       [24, 6, 6, 6, 0, 0, 0, 42, 24, 6, 6, 6],
       [19, 24, 24, 24, 19, 24, 24, 24, 91, 0, 0, 0],
       [24, 6, 6, 6, 24, 6, 6, 6, 0, 42, 0, 0],
       [24, 6, 6, 6, 24, 6, 6, 6, 0, 0, 42, 0],
       [24, 6, 6, 6, 24, 6, 6, 6, 0, 0, 0, 42]]

EX5 = [[1, 1, 0, 0, 1],
       [1, 2, 1, 0, 0],
       [0, 1, 2, 1, 0],
       [0, 0, 1, 2, 1],
       [1, 0, 0, 1, 3]]

EX6 = [[1, 1, 0, 0, 1],
       [1, 2, 1, 0, 0],
       [0, 1, 2, 1, 0],
       [0, 0, 1, 2, 1],
       [1, 0, 0, 1, 6]]

EX7 = [[7, 1, 2, 2, 1, 1],
       [1, 12, 1, 3, 3, 5],
       [2, 1, 2, 3, 0, 0],
       [2, 3, 3, 5, 0, 0],
       [1, 3, 0, 0, 2, 4],
       [1, 5, 0, 0, 4, 10]]

# rounded entries as printed
EQ_A = [[1, 0.578, 0, 0, 0.225],
        [0.578, 1, 0, 0, 0],
        [0, 0, 1, 0, 0.656],
        [0, 0, 0, 1, 0.526],
        [0.225, 0, 0.656, 0.526, 1]]

CP_NAMES = ("ex1", "ex2", "ex3", "ex4", "ex5", "ex6", "ex7", "eqA")
_FIXED = {"ex1": EX1, "ex2": EX2, "ex3": EX3, "ex4": EX4, "ex5": EX5, "ex6": EX6,
          "ex7": EX7, "eqA": EQ_A}


def sep_cp(m: int) -> np.ndarray:
    """``[[(m+1) I, J], [J, (m+1) I]]`` with ``m x m`` blocks."""
    if m < 1:
        raise ValueError("m must be positive")
    I, J = np.eye(m), np.ones((m, m))
    return np.block([[(m + 1) * I, J], [J, (m + 1) * I]])


def nested_rectangles(a: float, b: float) -> np.ndarray:
    if not (0 <= a <= 1 and 0 <= b <= 1):
        raise ValueError("a and b must lie in [0, 1]")
    return np.array([[1 - a, 1 + a, 1 - b, 1 + b],
                     [1 + a, 1 - a, 1 - b, 1 + b],
                     [1 + a, 1 - a, 1 + b, 1 - b],
                     [1 - a, 1 + a, 1 + b, 1 - b]], dtype=float)


def edm(n: int) -> np.ndarray:
    """Squared distances ``(i - j)^2`` of the points ``1..n`` on a line."""
    if n < 2:
        raise ValueError("n must be at least 2")
    i = np.arange(n)
    return ((i[:, None] - i[None, :]) ** 2).astype(float)


def identity(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be positive")
    return np.eye(n)


_PARAM = re.compile(r"^(\w+)\((.*)\)$")


def builtin(name: str) -> Tuple[str, np.ndarray]:
    """Return ``(family, matrix)`` where family is ``"cp"`` or ``"nn"``.

    Accepted names: ``ex1`` .. ``ex7``, ``eqA``, ``sep_cp(m)``, ``S(a,b)``,
    ``edm(n)`` and ``identity(n)`` (the latter two are nonnegative-rank inputs).
    """
    key = name.strip()
    if key in _FIXED:
        return "cp", np.array(_FIXED[key], dtype=float)
    m = _PARAM.match(key.replace(" ", ""))
    if m:
        fam, args = m.group(1), [a for a in m.group(2).split(",") if a]
        try:
            if fam == "sep_cp" and len(args) == 1:
                return "cp", sep_cp(int(args[0]))
            if fam == "S" and len(args) == 2:
                return "nn", nested_rectangles(float(args[0]), float(args[1]))
            if fam == "edm" and len(args) == 1:
                return "nn", edm(int(args[0]))
            if fam == "identity" and len(args) == 1:
                return "nn", identity(int(args[0]))
        except ValueError as exc:
            raise ValueError(f"bad parameters for {name!r}: {exc}") from None
    raise KeyError(f"unknown instance {name!r}")


# -- random generator -----------------------------------------------------------

@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    m: int
    seed: int = 0
    m_k: int = 2

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not (self.n - 1 <= self.m <= comb(self.n, 2)):
            raise ValueError(f"edge count must lie in [{self.n - 1}, {comb(self.n, 2)}]")
        if self.m_k < 1:
            raise ValueError("m_k must be positive")

    @property
    def nzd(self) -> float:
        return self.m / comb(self.n, 2)


@dataclass
class RandomCp:
    A: np.ndarray
    graph: gr.Graph
    cover: List[Tuple[int, ...]]
    factors: int
    config: GeneratorConfig

    def sidecar(self) -> Dict[str, object]:
        return {"n": self.config.n, "m": self.config.m, "seed": self.config.seed,
                "m_k": self.config.m_k, "nzd": self.config.nzd, "factors": self.factors}


MAX_RESAMPLES = 10_000


def gen_random_cp(cfg: GeneratorConfig) -> RandomCp:
    """Random sparse cp-matrix with a connected support of exactly ``cfg.m`` edges.

    The draw uses one PCG64 stream seeded with ``cfg.seed``; a disconnected
    support is discarded and the same stream keeps drawing.  Each clique of a
    greedy edge clique cover receives ``m_k`` uniform ``[0, 1]`` vectors
    supported on it, and the Gram sum is rescaled to unit diagonal.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    pairs = [(i, j) for i in range(cfg.n) for j in range(i + 1, cfg.n)]
    for _ in range(MAX_RESAMPLES):
        pick = rng.choice(len(pairs), size=cfg.m, replace=False)
        G = gr.Graph(cfg.n, [pairs[k] for k in pick])
        if G.is_connected():
            break
    else:
        raise RuntimeError("no connected support found within the resampling cap")
    cover = gr.greedy_edge_clique_cover(G, gr.maximal_cliques(G))
    mask = np.zeros((cfg.n, cfg.n), dtype=bool)
    for i, j in G.edges:
        mask[i, j] = mask[j, i] = True
    np.fill_diagonal(mask, True)
    for _ in range(MAX_RESAMPLES):
        S = np.zeros((cfg.n, cfg.n))
        for clique in cover:
            idx = list(clique)
            for _ in range(cfg.m_k):
                a = rng.uniform(0.0, 1.0, size=len(idx))
                S[np.ix_(idx, idx)] += np.outer(a, a)
        if np.all(S[mask] > 0):
            break
    else:
        raise RuntimeError("could not draw factors without accidental zeros")
    d = 1.0 / np.sqrt(np.diag(S))
    A = S * np.outer(d, d)
    A = 0.5 * (A + A.T)
    np.fill_diagonal(A, 1.0)
    return RandomCp(A, G, cover, cfg.m_k * len(cover), cfg)


# -- matrix text format ----------------------------------------------------

def read_matrix(text: str) -> np.ndarray:
    """Parse ``rows cols`` followed by whitespace separated rows."""
    lines = [ln for ln in (l.split("#", 1)[0].strip() for l in text.splitlines()) if ln]
    if not lines:
        raise ValueError("empty matrix file")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError("first line must be 'rows cols'")
    r, c = int(head[0]), int(head[1])
    vals = [float(tok) for ln in lines[1:] for tok in ln.split()]
    if len(vals) != r * c:
        raise ValueError(f"expected {r * c} entries, found {len(vals)}")
    return np.array(vals, dtype=float).reshape(r, c)


def write_matrix(M) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    rows = [" ".join(format(v, ".17g") for v in row) for row in M]
    return f"{M.shape[0]} {M.shape[1]}\n" + "\n".join(rows) + "\n"
