"""Large-sample approximations for the marginal number of clusters.

For hierarchies built from Pitman-Yor and Dirichlet levels, the group-level
cluster count grows like a deterministic sequence ``d_n`` times a limiting
diversity variable whose moments involve the tilted type-2 Mittag-Leffler
law.  For hierarchies with a Gnedin level at the bottom or at the top, the
cluster count converges in distribution to an explicit discrete law.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ParamError, SizeError, TruncationWarning
from .logpmf import LogPmf
from .partitions import (
    EppfSpec,
    gnedin_log_norm_constant,
    gnedin_rho,
)

HPYP = "hpyp"
HPYDP = "hpydp"
HDPYP = "hdpyp"
HDP = "hdp"

_LIMIT_SERIES_CAP = 200000
_LIMIT_SERIES_TOL = 1e-12


@dataclass(frozen=True)
class PyFamilyKind:
    """One of the four Pitman-Yor-type hierarchies, named top level first.

    ``sigma0, theta0`` parameterize the top (dish) level, ``sigma1, theta1``
    the bottom (table) level; a missing discount means that level is Dirichlet.
    """

    kind: str
    sigma0: Optional[float] = None
    theta0: float = 0.0
    sigma1: Optional[float] = None
    theta1: float = 0.0

    def __post_init__(self):
        if self.kind not in (HPYP, HPYDP, HDPYP, HDP):
            raise ParamError(f"unknown hierarchy kind {self.kind!r}")
        need_s0 = self.kind in (HPYP, HPYDP)
        need_s1 = self.kind in (HPYP, HDPYP)
        if need_s0 and not (self.sigma0 is not None and 0.0 < self.sigma0 < 1.0):
            raise ParamError(f"{self.kind} requires 0 < sigma0 < 1")
        if not need_s0 and self.sigma0 not in (None, 0.0):
            raise ParamError(f"{self.kind} has a Dirichlet top level (sigma0 must be absent)")
        if need_s1 and not (self.sigma1 is not None and 0.0 < self.sigma1 < 1.0):
            raise ParamError(f"{self.kind} requires 0 < sigma1 < 1")
        if not need_s1 and self.sigma1 not in (None, 0.0):
            raise ParamError(f"{self.kind} has a Dirichlet bottom level (sigma1 must be absent)")
        if self.theta0 <= -(self.sigma0 or 0.0) or self.theta1 <= -(self.sigma1 or 0.0):
            raise ParamError("concentration parameters must exceed minus the discount")

    @classmethod
    def hpyp(cls, sigma0, theta0, sigma1, theta1):
        return cls(HPYP, sigma0, theta0, sigma1, theta1)

    @classmethod
    def hpydp(cls, sigma0, theta0, theta1):
        return cls(HPYDP, sigma0, theta0, None, theta1)

    @classmethod
    def hdpyp(cls, theta0, sigma1, theta1):
        return cls(HDPYP, None, theta0, sigma1, theta1)

    @classmethod
    def hdp(cls, theta0, theta1):
        return cls(HDP, None, theta0, None, theta1)

    def to_hierarchy_specs(self) -> tuple[EppfSpec, EppfSpec]:
        top = EppfSpec.pitman_yor(self.sigma0 or 0.0, self.theta0)
        bottom = EppfSpec.pitman_yor(self.sigma1 or 0.0, self.theta1)
        return top, bottom


def ml_tilted_moment(sigma: float, theta: float, p: float) -> float:
    """p-th moment of the tilted type-2 Mittag-Leffler law.

    ``E[S^p] = Gamma(theta+1) Gamma(p + theta/sigma + 1)
    / (Gamma(theta/sigma + 1) Gamma(theta + p sigma + 1))``; the untilted case
    ``theta = 0`` reduces to ``Gamma(p+1)/Gamma(p sigma + 1)``.
    """
    if not 0.0 < sigma < 1.0:
        raise ParamError(f"requires 0 < sigma < 1, got {sigma}")
    if not theta > -sigma:
        raise ParamError(f"requires theta > -sigma, got theta={theta}")
    if not p > 0:
        raise ParamError(f"requires p > 0, got {p}")
    r = theta / sigma
    return float(np.exp(
        gammaln(theta + 1.0) + gammaln(p + r + 1.0)
        - gammaln(r + 1.0) - gammaln(theta + p * sigma + 1.0)
    ))


def diversity_scaling(f: PyFamilyKind, n: int) -> float:
    """Normalizing sequence ``d_n`` for the group-level cluster count."""
    if n < 3:
        raise SizeError(f"n must be >= 3, got {n}")
    if f.kind == HPYP:
        return float(n ** (f.sigma0 * f.sigma1))
    if f.kind == HPYDP:
        return float(np.log(n) ** f.sigma0)
    if f.kind == HDPYP:
        return float(f.sigma1 * np.log(n))
    return float(np.log(np.log(n)))


def asym_marginal_moment(f: PyFamilyKind, n: int, r: float) -> float:
    """Leading-order approximation of ``E[D^r]`` for a group of size ``n``.

    ``E[D^r] ~ d_n^r E[limit^r]`` with the limit moments expressed through
    :func:`ml_tilted_moment`; the Dirichlet-top cases have deterministic
    limits ``theta0``.
    """
    if n < 3:
        raise SizeError(f"n must be >= 3, got {n}")
    if not r > 0:
        raise ParamError(f"requires r > 0, got {r}")
    d = diversity_scaling(f, n)
    if f.kind == HPYP:
        return d ** r * ml_tilted_moment(f.sigma0, f.theta0, r) \
            * ml_tilted_moment(f.sigma1, f.theta1, r * f.sigma0)
    if f.kind == HPYDP:
        return d ** r * f.theta1 ** (r * f.sigma0) * ml_tilted_moment(f.sigma0, f.theta0, r)
    if f.kind == HDPYP:
        return d ** r * f.theta0 ** r
    return d ** r * f.theta0 ** r


def hpygp_limit_pmf(gamma1: float, zeta1: float, k_max: int) -> LogPmf:
    """Limiting cluster-count law when a Gnedin level sits above a diverging one.

    Equals the Gnedin component-count law: mass at ``m`` is
    ``c_{gamma1,zeta1} prod_{l<m}(l^2 - gamma1 l + zeta1) / (m! (m-1)!)``,
    evaluated here by the running product (cross-checkable against
    :func:`hssm.partitions.gnedin_rho`, which goes through the complex
    log-gamma ratio form).  Truncated at ``k_max``; not renormalized.
    """
    if k_max < 1:
        raise SizeError(f"k_max must be >= 1, got {k_max}")
    EppfSpec.gnedin(gamma1, zeta1)
    if gamma1 <= 0:
        raise ParamError("the limiting law requires gamma > 0")
    log_c = gnedin_log_norm_constant(gamma1, zeta1)
    log_mass = np.full(k_max, -np.inf)
    log_prod = 0.0
    alive = True
    for m in range(1, k_max + 1):
        if alive:
            log_mass[m - 1] = log_c + log_prod - gammaln(m + 1.0) - gammaln(float(m))
            fac = m * m - gamma1 * m + zeta1
            if fac <= 0:
                alive = False
            else:
                log_prod += np.log(fac)
    return LogPmf(1, log_mass, normalized=False)


def hgp_limit_pmf(gamma0: float, zeta0: float, gamma1: float, zeta1: float,
                  k_max: int) -> LogPmf:
    """Limiting law of the group-level cluster count of a double-Gnedin hierarchy.

    The bottom table count converges to the component law with parameters
    ``(gamma1, zeta1)``; composing with the top block-count law gives

    ``P{D = k} = (c_{g1,z1} / k!) prod_{i<k}(i^2 - g0 i + z0)
    * sum_{m>=k} (g0)_{m-k} / ((k-1)! (m-k)!)
    prod_{j<m}(j^2 - g1 j + z1)/(j^2 + g0 j + z0)``.

    The inner series is truncated by a ratio-tested tail bound; the returned
    masses are not renormalized (partial sums stay <= 1).
    """
    if k_max < 1:
        raise SizeError(f"k_max must be >= 1, got {k_max}")
    EppfSpec.gnedin(gamma0, zeta0)
    EppfSpec.gnedin(gamma1, zeta1)
    if gamma1 <= 0:
        raise ParamError("the limiting law requires gamma1 > 0")

    log_c = gnedin_log_norm_constant(gamma1, zeta1)

    # prefix of log prod_{j=1}^{m-1} (j^2 - g1 j + z1)/(j^2 + g0 j + z0);
    # a root of the bottom quadratic truncates the series support
    cap = _LIMIT_SERIES_CAP
    j = np.arange(1.0, cap)
    num = j * j - gamma1 * j + zeta1
    roots = np.nonzero(num <= 0)[0]
    if roots.size:
        cap = int(roots[0]) + 1
        j = j[: cap - 1]
        num = num[: cap - 1]
    log_ratio = np.concatenate(
        [[0.0], np.cumsum(np.log(num) - np.log(j * j + gamma0 * j + zeta0))])
    m = np.arange(1.0, cap + 1.0)

    def inner_sum(k: int) -> float:
        mm = m[k - 1 :]
        if gamma0 > 0:
            rising = gammaln(gamma0 + mm - k) - gammaln(gamma0)
        else:
            rising = np.where(mm == k, 0.0, -np.inf)
        terms = rising - gammaln(float(k)) - gammaln(mm - k + 1.0) + log_ratio[k - 1 :]
        total = logsumexp(terms)
        if not roots.size:
            # terms decay like m^-(gamma1+1); integral comparison tail bound
            tail = terms[-1] + np.log(cap / gamma1)
            if tail > np.log(_LIMIT_SERIES_TOL) + total:
                warnings.warn(
                    f"limit-law inner series cut at {cap} terms",
                    TruncationWarning,
                    stacklevel=3,
                )
        return float(total)

    log_mass = np.full(k_max, -np.inf)
    log_front = 0.0  # log prod_{i=1}^{k-1} (i^2 - g0 i + z0)
    front_alive = True
    for k in range(1, min(k_max, cap) + 1):
        if front_alive:
            log_mass[k - 1] = log_c + log_front - gammaln(k + 1.0) + inner_sum(k)
            fac = k * k - gamma0 * k + zeta0
            if fac <= 0:
                front_alive = False  # top quadratic root caps the cluster count
            else:
                log_front += np.log(fac)
    return LogPmf(1, log_mass, normalized=False)
