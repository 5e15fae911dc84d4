"""Exact prior laws of cluster counts for two-level hierarchies.

A hierarchy couples a bottom partition family (tables within each group) with
a top family (dishes shared across groups) and a base measure for the dish
atoms.  The number of distinct dishes in group ``i`` is the block count of the
top partition restricted to that group's tables, so its law is the composition
of the two block-count laws; the total across groups composes the convolution
of the per-group table counts with the top law.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ParamError, SizeError
from .logpmf import LogPmf
from .partitions import (
    NEG_INF,
    BlockSizes,
    EppfSpec,
    block_count_log_matrix,
    block_count_pmf,
    eppf_log,
    validate,
)

DIFFUSE = "diffuse"
SPIKE_SLAB = "spike_slab"

PEPPF_MAX_TOTAL = 12


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BaseMeasure:
    """Distribution of the dish atoms.

    ``diffuse`` draws are almost surely distinct; ``spike_slab`` mixes a point
    mass of weight ``a`` with a diffuse remainder, so distinct latent dishes
    can share the observed spike value.  ``atom_sampler(rng)`` optionally
    attaches a concrete value to each diffuse/slab draw.
    """

    kind: str = DIFFUSE
    a: float = 0.0
    atom_sampler: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in (DIFFUSE, SPIKE_SLAB):
            raise ParamError(f"unknown base measure kind {self.kind!r}")
        if self.kind == SPIKE_SLAB and not 0.0 < self.a < 1.0:
            raise ParamError(f"spike weight must lie in (0, 1), got {self.a}")

    @classmethod
    def diffuse(cls, atom_sampler: Optional[Callable] = None) -> "BaseMeasure":
        return cls(DIFFUSE, 0.0, atom_sampler)

    @classmethod
    def spike_slab(cls, a: float, atom_sampler: Optional[Callable] = None) -> "BaseMeasure":
        return cls(SPIKE_SLAB, float(a), atom_sampler)


@dataclass(frozen=True)
class GroupSizes:
    """Number of observations in each group."""

    n: tuple

    def __post_init__(self):
        n = tuple(int(x) for x in self.n)
        object.__setattr__(self, "n", n)
        if len(n) == 0:
            raise SizeError("at least one group is required")
        if any(x < 1 for x in n):
            raise SizeError("every group must contain at least one observation")

    @property
    def I(self) -> int:  # noqa: E743 - single-letter count is the domain name
        return len(self.n)

    @property
    def total(self) -> int:
        return sum(self.n)


@dataclass(frozen=True)
class HssmSpec:
    """Hierarchy: top family for dishes, bottom family for tables, base measure."""

    top: EppfSpec
    bottom: EppfSpec
    base: BaseMeasure = BaseMeasure()

    def __post_init__(self):
        validate(self.top)
        validate(self.bottom)


def hdp(theta0: float, theta1: float, base: BaseMeasure = BaseMeasure()) -> HssmSpec:
    return HssmSpec(EppfSpec.dirichlet(theta0), EppfSpec.dirichlet(theta1), base)


def hpyp(sigma0: float, theta0: float, sigma1: float, theta1: float,
         base: BaseMeasure = BaseMeasure()) -> HssmSpec:
    return HssmSpec(EppfSpec.pitman_yor(sigma0, theta0),
                    EppfSpec.pitman_yor(sigma1, theta1), base)


def hdpyp(theta0: float, sigma1: float, theta1: float,
          base: BaseMeasure = BaseMeasure()) -> HssmSpec:
    """Dirichlet top, Pitman-Yor bottom."""
    return hpyp(0.0, theta0, sigma1, theta1, base)


def hpydp(sigma0: float, theta0: float, theta1: float,
          base: BaseMeasure = BaseMeasure()) -> HssmSpec:
    """Pitman-Yor top, Dirichlet bottom."""
    return hpyp(sigma0, theta0, 0.0, theta1, base)


def hgp(gamma0: float, zeta0: float, gamma1: float, zeta1: float,
        base: BaseMeasure = BaseMeasure()) -> HssmSpec:
    return HssmSpec(EppfSpec.gnedin(gamma0, zeta0), EppfSpec.gnedin(gamma1, zeta1), base)


def hgdp(gamma0: float, zeta0: float, theta1: float,
         base: BaseMeasure = BaseMeasure()) -> HssmSpec:
    """Gnedin top, Dirichlet bottom."""
    return HssmSpec(EppfSpec.gnedin(gamma0, zeta0), EppfSpec.dirichlet(theta1), base)


def hgpyp(gamma0: float, zeta0: float, sigma1: float, theta1: float,
          base: BaseMeasure = BaseMeasure()) -> HssmSpec:
    """Gnedin top, Pitman-Yor bottom."""
    return HssmSpec(EppfSpec.gnedin(gamma0, zeta0),
                    EppfSpec.pitman_yor(sigma1, theta1), base)


# ---------------------------------------------------------------------------
# cluster-count laws
# ---------------------------------------------------------------------------

def marginal_cluster_pmf(h: HssmSpec, n_i: int) -> LogPmf:
    """Law of the number of distinct dishes in one group of ``n_i`` elements.

    Composition ``P{D = k} = sum_m P{tables = m} P{|top partition of m| = k}``.
    """
    if n_i < 1:
        raise SizeError(f"group size must be >= 1, got {n_i}")
    q_bottom = np.exp(block_count_log_matrix(h.bottom, n_i)[n_i, 1 : n_i + 1])
    Q_top = np.exp(block_count_log_matrix(h.top, n_i)[1 : n_i + 1, 1 : n_i + 1])
    return LogPmf.from_probs(1, q_bottom @ Q_top)


def total_cluster_pmf(h: HssmSpec, g: GroupSizes) -> LogPmf:
    """Law of the total number of distinct dishes across all groups.

    The per-group table counts are independent, so their sum is obtained by
    convolution (rather than the exponential-size sum over compositions), and
    the result is composed with the top block-count law.
    """
    ntot = g.total
    conv = None
    for n_i in g.n:
        q = np.exp(block_count_log_matrix(h.bottom, n_i)[n_i, 1 : n_i + 1])
        conv = q if conv is None else np.convolve(conv, q)
    # conv has support I .. ntot
    k_tot = np.zeros(ntot)  # index m-1 for m = 1..ntot
    k_tot[g.I - 1 : ntot] = conv
    Q_top = np.exp(block_count_log_matrix(h.top, ntot)[1 : ntot + 1, 1 : ntot + 1])
    return LogPmf.from_probs(1, k_tot @ Q_top)


def table_count_pmf(h: HssmSpec, g: GroupSizes) -> LogPmf:
    """Law of the total number of tables (bottom-level blocks) in the sample."""
    ntot = g.total
    conv = None
    for n_i in g.n:
        q = np.exp(block_count_log_matrix(h.bottom, n_i)[n_i, 1 : n_i + 1])
        conv = q if conv is None else np.convolve(conv, q)
    return LogPmf.from_probs(g.I, conv)


def cluster_moment(p: LogPmf, r: float) -> float:
    """r-th moment ``E[K^r]`` of a cluster-count law."""
    return p.moment(r)


# ---------------------------------------------------------------------------
# spike-and-slab corrections
# ---------------------------------------------------------------------------

def spike_slab_distinct_pmf(k: int, a: float) -> LogPmf:
    """Distribution of the number of distinct values among k iid draws from a
    spike-and-slab measure with spike weight ``a``.

    ``P{d | k} = C(k, d-1) a^{k+1-d} (1-a)^{d-1} + 1{d=k} (1-a)^d``.
    """
    if k < 1:
        raise SizeError(f"k must be >= 1, got {k}")
    if not 0.0 < a < 1.0:
        raise ParamError(f"spike weight must lie in (0, 1), got {a}")
    d = np.arange(1, k + 1, dtype=float)
    log_binom = gammaln(k + 1.0) - gammaln(d) - gammaln(k + 2.0 - d)
    log_main = log_binom + (k + 1.0 - d) * np.log(a) + (d - 1.0) * np.log1p(-a)
    mass = np.exp(log_main)
    mass[k - 1] += np.exp(k * np.log1p(-a))
    return LogPmf.from_probs(1, mass)


def spike_slab_adjust(p: LogPmf, a: float) -> LogPmf:
    """Law of the observed distinct-cluster count under a spike-and-slab base.

    Mixes the latent law ``p`` of the dish count with the coalescence kernel
    of :func:`spike_slab_distinct_pmf`:
    ``P{obs = d} = (1-a)^d p(d) + sum_{k>=d} C(k, d-1) a^{k+1-d} (1-a)^{d-1} p(k)``.
    """
    if not 0.0 < a < 1.0:
        raise ParamError(f"spike weight must lie in (0, 1), got {a}")
    if p.min_support < 1:
        raise ParamError("latent cluster-count law must be supported on k >= 1")
    kmax = p.max_support
    latent = np.zeros(kmax + 1)
    latent[p.min_support :] = p.probs()
    out = np.zeros(kmax + 1)
    d = np.arange(1, kmax + 1, dtype=float)
    for k in range(1, kmax + 1):
        if latent[k] == 0.0:
            continue
        dd = d[:k]
        log_binom = gammaln(k + 1.0) - gammaln(dd) - gammaln(k + 2.0 - dd)
        kern = np.exp(log_binom + (k + 1.0 - dd) * np.log(a) + (dd - 1.0) * np.log1p(-a))
        out[1 : k + 1] += latent[k] * kern
        out[k] += latent[k] * np.exp(k * np.log1p(-a))
    return LogPmf.from_probs(1, out[1:])


# ---------------------------------------------------------------------------
# law of the induced grouped partition (verification tool)
# ---------------------------------------------------------------------------

def _partitions_of_int(n: int):
    """Integer partitions of n as non-increasing tuples of parts."""
    if n == 0:
        yield ()
        return

    def rec(remaining, largest):
        if remaining == 0:
            yield ()
            return
        for part in range(min(remaining, largest), 0, -1):
            for rest in rec(remaining - part, part):
                yield (part,) + rest

    yield from rec(n, n)


def peppf_log(h: HssmSpec, counts) -> float:
    """Log probability of one realization of the induced grouped partition.

    ``counts[i][d]`` is the number of elements of group ``i`` in global
    cluster ``d`` (zeros allowed; every cluster must be hit by some group).
    Sums over admissible table layouts: each cell is split into tables in all
    ways, the bottom family weighs each group's table sizes, the top family
    weighs the per-cluster table totals, and a multinomial coefficient counts
    the set partitions realizing each shape.  Exponential in the total count;
    guarded at ``sum(counts) <= 12``.  Assumes a diffuse base.
    """
    counts = np.asarray(counts, dtype=int)
    if counts.ndim != 2:
        raise ParamError("counts must be an I x D matrix")
    if np.any(counts < 0):
        raise ParamError("counts must be nonnegative")
    if np.any(counts.sum(axis=0) < 1):
        raise ParamError("every cluster column needs at least one element")
    total = int(counts.sum())
    if total < 1:
        raise SizeError("at least one observation is required")
    if total > PEPPF_MAX_TOTAL:
        raise SizeError(f"guarded at total count <= {PEPPF_MAX_TOTAL}, got {total}")

    I, D = counts.shape
    # per-cell admissible table-size multisets
    cell_shapes = [[list(_partitions_of_int(int(counts[i, d]))) for d in range(D)]
                   for i in range(I)]

    log_terms = []
    for combo in itertools.product(*[itertools.product(*cell_shapes[i]) for i in range(I)]):
        # combo[i][d] is a tuple of table sizes for group i, cluster d
        log_coef = 0.0
        m_dot = np.zeros(D, dtype=int)
        group_logs = 0.0
        for i in range(I):
            sizes_i = []
            for d in range(D):
                parts = combo[i][d]
                m_dot[d] += len(parts)
                sizes_i.extend(parts)
                # number of set partitions of the cell with these part sizes:
                # n! / (prod_j lambda_j! (j!)^lambda_j)
                n_id = int(counts[i, d])
                if n_id == 0:
                    continue
                log_coef += gammaln(n_id + 1.0)
                for j in set(parts):
                    lam = parts.count(j)
                    log_coef -= gammaln(lam + 1.0) + lam * gammaln(j + 1.0)
            if sizes_i:
                group_logs += eppf_log(h.bottom, BlockSizes(tuple(sizes_i)))
        top_log = eppf_log(h.top, BlockSizes(tuple(int(x) for x in m_dot)))
        log_terms.append(log_coef + group_logs + top_log)

    if not log_terms:
        return NEG_INF
    return float(logsumexp(np.asarray(log_terms)))
