"""Clustering and predictive accuracy metrics computed from chain traces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParamError, SizeError
from .gibbs import GibbsTrace


@dataclass(frozen=True)
class CoClusterMatrix:
    """Pairwise posterior co-assignment probabilities; symmetric, unit diagonal."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "p", p)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ParamError("co-clustering matrix must be square")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ParamError("entries must lie in [0, 1]")
        if not np.allclose(p, p.T, atol=1e-12):
            raise ParamError("matrix must be symmetric")
        if not np.allclose(np.diag(p), 1.0, atol=1e-12):
            raise ParamError("diagonal must be 1")

    @property
    def n(self) -> int:
        return self.p.shape[0]


def coclustering(trace: GibbsTrace) -> CoClusterMatrix:
    """Empirical frequency with which each pair shares a dish label."""
    if trace.n_snapshots == 0:
        raise SizeError("empty trace")
    labels = trace.d_star
    n = labels.shape[1]
    acc = np.zeros((n, n))
    step = max(1, 262144 // max(n * n, 1))
    for lo in range(0, labels.shape[0], step):
        chunk = labels[lo : lo + step]
        acc += (chunk[:, :, None] == chunk[:, None, :]).sum(axis=0)
    return CoClusterMatrix(acc / labels.shape[0])


def _truth_indicator(truth) -> np.ndarray:
    t = np.asarray(truth)
    return (t[:, None] == t[None, :]).astype(float)


def cn_error(p: CoClusterMatrix, truth) -> float:
    """Mean absolute deviation between the true co-assignment indicator and p."""
    ind = _truth_indicator(truth)
    if ind.shape != p.p.shape:
        raise SizeError("truth length does not match the matrix size")
    return float(np.abs(ind - p.p).mean())


def cn_star(p: CoClusterMatrix, truth) -> float:
    """Same error after thresholding p at 1/2 (strictly greater than)."""
    ind = _truth_indicator(truth)
    if ind.shape != p.p.shape:
        raise SizeError("truth length does not match the matrix size")
    return float(np.abs(ind - (p.p > 0.5)).mean())


def predictive_score(pred, truth, grid) -> float:
    """Mean per-group L1 distance between densities, by trapezoid rule.

    ``pred`` and ``truth`` are sequences of density arrays on the common
    ``grid``; the result lies in [0, 2].
    """
    grid = np.asarray(grid, dtype=float)
    if len(pred) != len(truth) or len(pred) == 0:
        raise SizeError("need matching nonempty density collections")
    tot = 0.0
    for f, g in zip(pred, truth):
        f = np.asarray(f, dtype=float)
        g = np.asarray(g, dtype=float)
        if f.shape != grid.shape or g.shape != grid.shape:
            raise SizeError("density arrays must match the grid")
        if np.any(f < 0) or np.any(g < 0):
            raise ParamError("densities must be nonnegative")
        tot += float(np.trapezoid(np.abs(f - g), grid))
    return tot / len(pred)


def cluster_count_summary(trace: GibbsTrace) -> tuple[float, float, dict]:
    """(median, variance, histogram) of the posterior cluster count.

    The median uses the lower-median convention for even snapshot counts; the
    variance divides by the number of snapshots.
    """
    if trace.n_snapshots == 0:
        raise SizeError("empty trace")
    d = np.sort(trace.n_clusters.astype(float))
    m = d.size
    median = float(d[(m - 1) // 2])
    variance = float(d.var())
    hist = {int(k): int(v) for k, v in zip(*np.unique(trace.n_clusters, return_counts=True))}
    return median, variance, hist
