"""Synthetic atomic measures shared by the extraction tests."""
import numpy as np

from momsparse import certify as cert
from momsparse.momrelax import PseudoMoment
from momsparse.polybasis import MonomialBasis


def moments_of(points, weights, t):
    points = np.atleast_2d(np.asarray(points, float))
    n = points.shape[1]
    B = MonomialBasis(n, range(n), 2 * t)
    mu = cert.AtomicMeasure(points, np.asarray(weights, float))
    return PseudoMoment(B, mu.moments(B))


def match(found, want):
    """Max coordinate error under the best assignment (greedy is exact for separated atoms)."""
    err = 0.0
    left = list(range(len(want)))
    for p in found:
        k = min(left, key=lambda q: np.abs(want[q] - p).max())
        err = max(err, float(np.abs(want[k] - p).max()))
        left.remove(k)
    return err
