"""Discrete pmf over a contiguous integer range, stored in natural-log space."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import NumericalError

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class LogPmf:
    """Probability mass function on ``min_support, min_support+1, ...``.

    ``log_mass[i]`` is the log-probability of ``min_support + i``; -inf entries
    are allowed.  Unless ``normalized=False`` is passed (used for truncated
    limit laws whose tail is deliberately dropped), the total mass must be 1
    within ``NORMALIZATION_TOL`` in log space.
    """

    min_support: int
    log_mass: np.ndarray
    normalized: bool = field(default=True, compare=False)

    def __post_init__(self):
        lm = np.asarray(self.log_mass, dtype=float)
        object.__setattr__(self, "log_mass", lm)
        if lm.ndim != 1 or lm.size == 0:
            raise ValueError("log_mass must be a nonempty 1-D array")
        if np.any(np.isnan(lm)) or np.any(lm > 1e-6):
            raise NumericalError("log_mass contains NaN or log-probability > 0")
        if self.normalized:
            resid = logsumexp(lm)
            if not np.isfinite(resid) or abs(resid) > NORMALIZATION_TOL:
                raise NumericalError(
                    f"pmf normalization residual {resid:.3e} exceeds {NORMALIZATION_TOL:.0e}"
                )

    @property
    def support(self) -> np.ndarray:
        return self.min_support + np.arange(self.log_mass.size)

    @property
    def max_support(self) -> int:
        return self.min_support + self.log_mass.size - 1

    def probs(self) -> np.ndarray:
        return np.exp(self.log_mass)

    def prob(self, k: int) -> float:
        """Probability of the integer ``k`` (0.0 outside the stored range)."""
        i = k - self.min_support
        if i < 0 or i >= self.log_mass.size:
            return 0.0
        return float(np.exp(self.log_mass[i]))

    def total_mass(self) -> float:
        return float(np.exp(logsumexp(self.log_mass)))

    def moment(self, r: float) -> float:
        """E[K^r] computed from the stored masses."""
        return float(np.sum(self.support.astype(float) ** r * self.probs()))

    def mean(self) -> float:
        return self.moment(1.0)

    def variance(self) -> float:
        m1 = self.mean()
        return self.moment(2.0) - m1 * m1

    def tv_distance(self, other: "LogPmf") -> float:
        """Total-variation distance, aligning the two supports."""
        lo = min(self.min_support, other.min_support)
        hi = max(self.max_support, other.max_support)
        p = np.zeros(hi - lo + 1)
        q = np.zeros(hi - lo + 1)
        p[self.min_support - lo : self.min_support - lo + self.log_mass.size] = self.probs()
        q[other.min_support - lo : other.min_support - lo + other.log_mass.size] = other.probs()
        return 0.5 * float(np.abs(p - q).sum())

    @staticmethod
    def from_probs(min_support: int, probs, normalized: bool = True) -> "LogPmf":
        p = np.asarray(probs, dtype=float)
        if np.any(p < -1e-15):
            raise NumericalError("negative probability mass")
        with np.errstate(divide="ignore"):
            lm = np.log(np.maximum(p, 0.0))
        return LogPmf(min_support, lm, normalized=normalized)
