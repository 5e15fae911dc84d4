"""Synthetic benchmark datasets: grouped Gaussian mixtures with known clusters.

Two presets are shipped.  ``three_component`` has three groups drawing from
three shared unit-variance components at -5, 0, 5 with group-specific mixing
weights; ``two_component`` has ten groups sharing a component at -5, each with
its own second component at -4 + i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .gibbs import Dataset


@dataclass(frozen=True)
class SyntheticData:
    """Dataset plus the generating truth."""

    data: Dataset
    truth: np.ndarray          # flattened true cluster id per observation
    weights: tuple             # per group: component weights
    means: tuple               # per group: component means
    component_ids: tuple       # per group: global cluster id per component

    def true_density(self, i: int, grid) -> np.ndarray:
        """Generating mixture density of group i on the grid."""
        grid = np.asarray(grid, dtype=float)
        w = self.weights[i - 1]
        mu = self.means[i - 1]
        out = np.zeros(grid.size)
        for wj, mj in zip(w, mu):
            out += wj * np.exp(-0.5 * (grid - mj) ** 2) / np.sqrt(2 * np.pi)
        return out


_PRESETS = {
    "three_component": dict(
        sizes=(100, 50, 50),
        weights=((0.3, 0.3, 0.4), (0.3, 0.7), (0.8, 0.1, 0.1)),
        means=((-5.0, 0.0, 5.0), (-5.0, 0.0), (-5.0, 0.0, 5.0)),
        ids=((1, 2, 3), (1, 2), (1, 2, 3)),
    ),
    "two_component": dict(
        sizes=tuple([50] * 10),
        weights=tuple((0.7, 0.3) for _ in range(10)),
        means=tuple((-5.0, -4.0 + i) for i in range(1, 11)),
        ids=tuple((1, 1 + i) for i in range(1, 11)),
    ),
}


def preset_names() -> tuple:
    return tuple(sorted(_PRESETS))


def generate(name: str, seed: int) -> SyntheticData:
    """Draw one dataset from the named preset."""
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {preset_names()}")
    cfg = _PRESETS[name]
    rng = np.random.default_rng(seed)
    groups = []
    truth = []
    for size, w, mu, ids in zip(cfg["sizes"], cfg["weights"], cfg["means"], cfg["ids"]):
        comp = rng.choice(len(w), size=size, p=np.asarray(w))
        y = rng.normal(np.asarray(mu)[comp], 1.0)
        groups.append(y)
        truth.extend(np.asarray(ids)[comp])
    return SyntheticData(
        Dataset(tuple(groups)),
        np.asarray(truth, dtype=int),
        cfg["weights"],
        cfg["means"],
        cfg["ids"],
    )
