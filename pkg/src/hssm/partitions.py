"""Single-sequence exchangeable random partitions.

Three Gibbs-type families are supported, each parameterized by its standard
hyperparameters:

* Pitman-Yor ``PY(sigma, theta)`` with either ``0 <= sigma < 1, theta > -sigma``
  or ``sigma < 0, theta = |sigma| * m`` for a positive integer ``m`` (symmetric
  Dirichlet over ``m`` species);
* the Gnedin family ``GN(gamma, zeta)``, whose predictive weights are rational
  in the current counts;
* mixtures of finite mixtures ``MFM(sigma, rho)`` with ``sigma < 0`` and a
  mixing pmf ``rho`` over the number of components.

All block-size functions, predictive weights and block-count laws are computed
in natural-log space; exponentiation happens only at API boundaries.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy.special import gammaln, loggamma, logsumexp

from .errors import NumericalError, ParamError, SizeError, TruncationWarning
from .logpmf import LogPmf

NEG_INF = -np.inf

# Series truncation: relative tail tolerance and hard cap (10*n + 1000 terms).
SERIES_TOL = 1e-12
SERIES_CAP_BASE = 1000
SERIES_CAP_SLOPE = 10

ENUMERATION_MAX_N = 12

PITMAN_YOR = "pitman_yor"
GNEDIN = "gnedin"
MFM = "mfm"


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EppfSpec:
    """Parametric description of one exchangeable-partition family.

    Use the classmethod constructors; they run :func:`validate` and fill the
    derived fields (``py_m`` for the negative-discount Pitman-Yor branch,
    ``gnedin_cap`` when the Gnedin quadratic has an integer root).
    """

    family: str
    sigma: float = 0.0
    theta: float = 0.0
    gamma: float = 0.0
    zeta: float = 0.0
    rho: Optional[tuple] = None
    py_m: Optional[int] = field(default=None, compare=False)
    gnedin_cap: Optional[int] = field(default=None, compare=False)

    @classmethod
    def pitman_yor(cls, sigma: float, theta: float) -> "EppfSpec":
        return validate(cls(PITMAN_YOR, sigma=float(sigma), theta=float(theta)))

    @classmethod
    def dirichlet(cls, theta: float) -> "EppfSpec":
        """Ewens case PY(0, theta)."""
        return cls.pitman_yor(0.0, theta)

    @classmethod
    def gnedin(cls, gamma: float, zeta: float) -> "EppfSpec":
        return validate(cls(GNEDIN, gamma=float(gamma), zeta=float(zeta)))

    @classmethod
    def mfm(cls, sigma: float, rho: Sequence[float]) -> "EppfSpec":
        return validate(cls(MFM, sigma=float(sigma), rho=tuple(float(r) for r in rho)))

    def __str__(self):
        if self.family == PITMAN_YOR:
            return f"PY(sigma={self.sigma}, theta={self.theta})"
        if self.family == GNEDIN:
            return f"GN(gamma={self.gamma}, zeta={self.zeta})"
        return f"MFM(sigma={self.sigma}, len(rho)={len(self.rho or ())})"


@dataclass(frozen=True)
class BlockSizes:
    """Block sizes of a partition, coded in order of appearance."""

    sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(sizes) == 0:
            raise SizeError("a partition has at least one block")
        if any(s < 1 for s in sizes):
            raise SizeError("block sizes must be positive")

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def k(self) -> int:
        return len(self.sizes)


@dataclass(frozen=True)
class PartitionState:
    """A partition of {1..n} with order-of-appearance block labels.

    ``assignment[j]`` is the 1-based label of the block containing element
    ``j+1``; labels form a prefix 1..k and never jump.
    """

    assignment: tuple

    def __post_init__(self):
        a = tuple(int(x) for x in self.assignment)
        object.__setattr__(self, "assignment", a)
        if len(a) == 0:
            raise SizeError("empty partition")
        seen = 0
        for lab in a:
            if lab < 1 or lab > seen + 1:
                raise ValueError("labels are not in order-of-appearance coding")
            seen = max(seen, lab)

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def block_sizes(self) -> BlockSizes:
        k = max(self.assignment)
        sizes = [0] * k
        for lab in self.assignment:
            sizes[lab - 1] += 1
        return BlockSizes(tuple(sizes))


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _gnedin_quadratic(gamma: float, zeta: float, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return k * k - gamma * k + zeta


def validate(spec: EppfSpec) -> EppfSpec:
    """Check the parameter regime; return the spec with derived fields set."""
    if spec.family == PITMAN_YOR:
        s, t = spec.sigma, spec.theta
        if 0.0 <= s < 1.0:
            if not t > -s:
                raise ParamError(f"Pitman-Yor requires theta > -sigma, got theta={t}, sigma={s}")
            return spec
        if s < 0.0:
            m = t / abs(s)
            m_int = int(round(m))
            if m_int < 1 or abs(m - m_int) > 1e-9:
                raise ParamError(
                    f"Pitman-Yor with sigma<0 requires theta = |sigma|*m for integer m>=1, "
                    f"got theta/|sigma| = {m}"
                )
            object.__setattr__(spec, "py_m", m_int)
            return spec
        raise ParamError(f"Pitman-Yor requires sigma < 1, got sigma={s}")

    if spec.family == GNEDIN:
        g, z = spec.gamma, spec.zeta
        if g < 0:
            raise ParamError(f"Gnedin requires gamma >= 0, got {g}")
        # The quadratic k^2 - gamma*k + zeta must be positive at every integer
        # k >= 1, or positive up to an integer root k0 (which caps the block
        # count at k0).  Beyond k > gamma the quadratic increases, so scanning
        # to ceil(gamma)+1 settles it.
        cap = None
        for k in range(1, int(np.ceil(g)) + 2):
            v = _gnedin_quadratic(g, z, k)
            if abs(v) <= 1e-9 * max(1.0, k * k):
                cap = k
                break
            if v < 0:
                raise ParamError(
                    f"Gnedin quadratic k^2 - gamma*k + zeta is negative at k={k} "
                    f"(gamma={g}, zeta={z}) without an earlier integer root"
                )
        object.__setattr__(spec, "gnedin_cap", cap)
        return spec

    if spec.family == MFM:
        if not spec.sigma < 0:
            raise ParamError(f"MFM requires sigma < 0, got {spec.sigma}")
        if spec.rho is None or len(spec.rho) == 0:
            raise ParamError("MFM requires a mixing pmf rho over the number of components")
        r = np.asarray(spec.rho, dtype=float)
        if np.any(r < 0):
            raise ParamError("rho has negative entries")
        if abs(r.sum() - 1.0) > 1e-12:
            raise ParamError(f"rho must sum to 1 within 1e-12, got {r.sum()!r}")
        return spec

    raise ParamError(f"unknown family {spec.family!r}")


# ---------------------------------------------------------------------------
# log-space helpers
# ---------------------------------------------------------------------------

def _log_rising(x: float, j: int) -> float:
    """log of the rising factorial (x)_j = x (x+1) ... (x+j-1), for x >= 0."""
    if j == 0:
        return 0.0
    if x <= 0.0:
        return NEG_INF if x == 0.0 else np.nan
    return float(gammaln(x + j) - gammaln(x))


def _logsumexp_pair(a: float, b: float) -> float:
    return float(np.logaddexp(a, b))


# ---------------------------------------------------------------------------
# generalized Stirling table
# ---------------------------------------------------------------------------

def gen_stirling_log(sigma: float, n_max: int) -> np.ndarray:
    """Log-space triangular table of generalized Stirling numbers.

    Returns ``S`` with ``S[n, k] = log S_sigma(n, k)`` for ``1 <= k <= n <=
    n_max`` and -inf elsewhere, built from the two-term recursion
    ``S(n+1, k) = S(n, k-1) + (n - k*sigma) S(n, k)`` with ``S(1, 1) = 1``.
    All recursion terms are nonnegative for ``sigma < 1``, so no cancellation
    occurs.  For ``sigma = 0`` the entries are the logs of unsigned Stirling
    numbers of the first kind.
    """
    if sigma >= 1.0:
        raise ParamError(f"generalized Stirling table requires sigma < 1, got {sigma}")
    if n_max < 1:
        raise SizeError(f"n_max must be >= 1, got {n_max}")
    return _stirling_table_cached(float(sigma), int(n_max))


@lru_cache(maxsize=32)
def _stirling_table_cached(sigma: float, n_max: int) -> np.ndarray:
    S = np.full((n_max + 1, n_max + 2), NEG_INF)
    S[1, 1] = 0.0
    for n in range(1, n_max):
        k = np.arange(1, n + 2)
        fac = n - k * sigma  # > 0 for k <= n (and k = n+1 only hits S[n, n+1] = -inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_fac = np.where(fac > 0, np.log(np.where(fac > 0, fac, 1.0)), NEG_INF)
        S[n + 1, 1 : n + 2] = np.logaddexp(S[n, 0 : n + 1], log_fac + S[n, 1 : n + 2])
    S.setflags(write=False)
    return S


# ---------------------------------------------------------------------------
# V_{n,k} coefficients
# ---------------------------------------------------------------------------

def _py_log_front(sigma: float, theta: float, k: int) -> float:
    """log prod_{i=1}^{k-1} (theta + i*sigma); -inf once a factor hits zero."""
    if k <= 1:
        return 0.0
    i = np.arange(1, k, dtype=float)
    fac = theta + i * sigma
    if np.any(fac <= 0):
        return NEG_INF
    return float(np.log(fac).sum())


def _gnedin_log_vnk(gamma: float, zeta: float, n: int, k: int) -> float:
    """Closed-form log V_{n,k} of the Gnedin family.

    ``V_{n,k} = (gamma)_{n-k} prod_{i<k}(i^2 - gamma i + zeta)
    / prod_{m<n}(m^2 + gamma m + zeta)``.
    """
    i = np.arange(1, k, dtype=float)
    num = i * i - gamma * i + zeta
    if np.any(num <= 0):
        # an exact integer root caps the block count
        if np.any(num < -1e-9):
            raise ParamError("Gnedin parameters outside the admissible region")
        return NEG_INF
    m = np.arange(1, n, dtype=float)
    log_num = float(np.log(num).sum()) if k > 1 else 0.0
    log_den = float(np.log(m * m + gamma * m + zeta).sum()) if n > 1 else 0.0
    return _log_rising(gamma, n - k) + log_num - log_den


def _mfm_log_vnk(sigma: float, rho: Sequence[float], n: int, k: int) -> float:
    """log V_{n,k} for an MFM: |sigma|^{k-1} sum over components m >= k."""
    s = abs(sigma)
    rho = np.asarray(rho, dtype=float)
    m_all = np.arange(1, rho.size + 1, dtype=float)
    mask = (m_all >= k) & (rho > 0)
    if not np.any(mask):
        return NEG_INF
    m = m_all[mask]
    terms = (
        gammaln(m)
        + gammaln(s * m + 1.0)
        - gammaln(m - k + 1.0)
        - gammaln(s * m + n)
        + np.log(rho[mask])
    )
    return float((k - 1) * np.log(s) + logsumexp(terms))


def vnk_log(spec: EppfSpec, n: int, k: int) -> float:
    """log V_{n,k} of the Gibbs-type product form of the family.

    ``V_{1,1} = 1`` for every family; Pitman-Yor uses the closed product,
    MFM the finite/truncated mixture sum, Gnedin the closed rational form.
    """
    if n < 1:
        raise SizeError(f"n must be >= 1, got {n}")
    if not 1 <= k <= n:
        raise ParamError(f"need 1 <= k <= n, got k={k}, n={n}")
    if spec.family == PITMAN_YOR:
        front = _py_log_front(spec.sigma, spec.theta, k)
        return front - _log_rising(spec.theta + 1.0, n - 1)
    if spec.family == GNEDIN:
        return _gnedin_log_vnk(spec.gamma, spec.zeta, n, k)
    if spec.family == MFM:
        return _mfm_log_vnk(spec.sigma, spec.rho, n, k)
    raise ParamError(f"unknown family {spec.family!r}")


def vnk_log_table(spec: EppfSpec, n_max: int) -> np.ndarray:
    """Table ``V[n, k] = vnk_log(spec, n, k)`` for ``1 <= k <= n <= n_max``."""
    if n_max < 1:
        raise SizeError(f"n_max must be >= 1, got {n_max}")
    return _vnk_table_cached(spec, int(n_max))


@lru_cache(maxsize=32)
def _vnk_table_cached(spec: EppfSpec, n_max: int) -> np.ndarray:
    V = np.full((n_max + 1, n_max + 1), NEG_INF)
    if spec.family == PITMAN_YOR:
        s, t = spec.sigma, spec.theta
        ks = np.arange(1, n_max + 1, dtype=float)
        fac = t + (ks - 1) * s  # factor entering at k: theta + (k-1) sigma
        with np.errstate(divide="ignore", invalid="ignore"):
            log_fac = np.where(fac > 0, np.log(np.where(fac > 0, fac, 1.0)), NEG_INF)
        front = np.concatenate([[0.0], np.cumsum(log_fac[1:])])  # index k-1
        for n in range(1, n_max + 1):
            denom = _log_rising(t + 1.0, n - 1)
            V[n, 1 : n + 1] = front[:n] - denom
    elif spec.family == GNEDIN:
        g, z = spec.gamma, spec.zeta
        i = np.arange(1, n_max, dtype=float)
        num = i * i - g * i + z
        with np.errstate(divide="ignore", invalid="ignore"):
            log_num_terms = np.where(num > 0, np.log(np.where(num > 0, num, 1.0)), NEG_INF)
        log_num = np.concatenate([[0.0], np.cumsum(log_num_terms)])  # index k-1
        log_den = np.concatenate([[0.0], np.cumsum(np.log(i * i + g * i + z))])  # index n-1
        for n in range(1, n_max + 1):
            j = n - np.arange(1, n + 1)  # rising-factorial length per k
            if g > 0:
                rising = gammaln(g + j) - gammaln(g)
            else:
                rising = np.where(j == 0, 0.0, NEG_INF)
            V[n, 1 : n + 1] = rising + log_num[: n] - log_den[n - 1]
    else:
        for n in range(1, n_max + 1):
            for k in range(1, n + 1):
                V[n, k] = _mfm_log_vnk(spec.sigma, spec.rho, n, k)
    V.setflags(write=False)
    return V


# ---------------------------------------------------------------------------
# EPPF and predictive weights
# ---------------------------------------------------------------------------

def eppf_log(spec: EppfSpec, b: BlockSizes) -> float:
    """log probability of any fixed partition with these block sizes.

    Gibbs-type product form: ``V_{n,k} * prod_c (1 - sigma)_{n_c - 1}`` with
    the family's effective discount (sigma for PY/MFM, -1 for Gnedin).
    """
    sizes = b.sizes
    n, k = b.n, b.k
    sigma_eff = -1.0 if spec.family == GNEDIN else spec.sigma
    logv = vnk_log(spec, n, k)
    if logv == NEG_INF:
        return NEG_INF
    tail = sum(_log_rising(1.0 - sigma_eff, s - 1) for s in sizes)
    out = logv + tail
    if np.isnan(out):
        raise NumericalError(f"EPPF evaluation produced NaN for sizes {sizes}")
    return float(out)


def pred_weights(spec: EppfSpec, b: BlockSizes) -> tuple[np.ndarray, float]:
    """Predictive weights given current block sizes.

    Returns ``(omega, nu)``: ``omega[c]`` is the probability that the next
    element joins block ``c+1`` and ``nu`` the probability that it opens a new
    block; they sum to one.  Pitman-Yor and Gnedin use their closed forms, MFM
    falls back to ratios of V coefficients.
    """
    sizes = np.asarray(b.sizes, dtype=float)
    n, k = b.n, b.k
    if spec.family == PITMAN_YOR:
        omega = (sizes - spec.sigma) / (spec.theta + n)
        nu = (spec.theta + spec.sigma * k) / (spec.theta + n)
        nu = max(nu, 0.0)  # exactly zero at the species cap theta = |sigma| m, k = m
    elif spec.family == GNEDIN:
        denom = n * n + spec.gamma * n + spec.zeta
        omega = (sizes + 1.0) * (n - k + spec.gamma) / denom
        nu = max(_gnedin_quadratic(spec.gamma, spec.zeta, k).item(), 0.0) / denom
    elif spec.family == MFM:
        base = vnk_log(spec, n, k)
        if base == NEG_INF:
            raise NumericalError("V_{n,k} vanished; predictive ratios are undefined")
        log_join = vnk_log(spec, n + 1, k) - base
        log_new = vnk_log(spec, n + 1, k + 1) - base if k + 1 <= n + 1 else NEG_INF
        if np.isnan(log_join) or np.isnan(log_new):
            raise NumericalError("MFM predictive ratio underflowed irrecoverably")
        omega = np.exp(log_join) * (sizes - spec.sigma)
        nu = float(np.exp(log_new))
    else:
        raise ParamError(f"unknown family {spec.family!r}")
    return omega, float(nu)


# ---------------------------------------------------------------------------
# block-count distributions
# ---------------------------------------------------------------------------

def block_count_log_matrix(spec: EppfSpec, n_max: int) -> np.ndarray:
    """All block-count laws up to ``n_max``.

    Returns ``Q`` with ``Q[n, k] = log P{ |Pi_n| = k }`` for ``1 <= k <= n <=
    n_max`` (rows are normalized) and -inf elsewhere.
    """
    if n_max < 1:
        raise SizeError(f"n must be >= 1, got {n_max}")
    return _block_count_matrix_cached(spec, int(n_max))


@lru_cache(maxsize=32)
def _block_count_matrix_cached(spec: EppfSpec, n_max: int) -> np.ndarray:
    Q = np.full((n_max + 1, n_max + 1), NEG_INF)
    V = vnk_log_table(spec, n_max)
    if spec.family == GNEDIN:
        # explicit law: q_n(k) = binom(n-1, k-1) * n!/k! * V_{n,k}
        for n in range(1, n_max + 1):
            k = np.arange(1, n + 1, dtype=float)
            log_lah = (
                gammaln(n) - gammaln(k) - gammaln(n - k + 1)
                + gammaln(n + 1.0) - gammaln(k + 1.0)
            )
            Q[n, 1 : n + 1] = log_lah + V[n, 1 : n + 1]
    else:
        S = gen_stirling_log(spec.sigma, n_max)
        for n in range(1, n_max + 1):
            Q[n, 1 : n + 1] = V[n, 1 : n + 1] + S[n, 1 : n + 1]
    for n in range(1, n_max + 1):
        resid = logsumexp(Q[n, 1 : n + 1])
        if not np.isfinite(resid) or abs(resid) > 1e-8:
            raise NumericalError(
                f"block-count law at n={n} has normalization residual {resid:.3e}"
            )
        Q[n, 1 : n + 1] -= resid
    Q.setflags(write=False)
    return Q


def block_count_pmf(spec: EppfSpec, n: int) -> LogPmf:
    """Law of the number of blocks of a partition of n elements."""
    if n < 1:
        raise SizeError(f"n must be >= 1, got {n}")
    Q = block_count_log_matrix(spec, n)
    return LogPmf(1, Q[n, 1 : n + 1].copy())


# ---------------------------------------------------------------------------
# sampling and enumeration
# ---------------------------------------------------------------------------

def sample_partition(spec: EppfSpec, n: int, rng: np.random.Generator) -> PartitionState:
    """Draw a partition of {1..n} by sequential predictive sampling.

    Each step draws one uniform and inverts the CDF over
    ``(omega_1, ..., omega_k, nu)``.
    """
    if n < 1:
        raise SizeError(f"n must be >= 1, got {n}")
    labels = [1]
    sizes = [1]
    for _ in range(1, n):
        omega, nu = pred_weights(spec, BlockSizes(tuple(sizes)))
        u = rng.random()
        acc = 0.0
        chosen = None
        for c, w in enumerate(omega):
            acc += w
            if u < acc:
                chosen = c
                break
        if chosen is None:
            labels.append(len(sizes) + 1)
            sizes.append(1)
        else:
            labels.append(chosen + 1)
            sizes[chosen] += 1
    return PartitionState(tuple(labels))


def enumerate_partitions(n: int) -> Iterator[PartitionState]:
    """All set partitions of {1..n} in order-of-appearance coding.

    Streams ``Bell(n)`` states; guarded at ``n <= 12``.
    """
    if n < 1:
        raise SizeError(f"n must be >= 1, got {n}")
    if n > ENUMERATION_MAX_N:
        raise SizeError(f"enumeration guarded at n <= {ENUMERATION_MAX_N}, got {n}")

    labels = [0] * n

    def rec(j: int, k: int):
        if j == n:
            yield PartitionState(tuple(labels))
            return
        for lab in range(1, k + 2):
            labels[j] = lab
            yield from rec(j + 1, max(k, lab))

    yield from rec(0, 0)


# ---------------------------------------------------------------------------
# Gnedin component-count law
# ---------------------------------------------------------------------------

def gnedin_rho(gamma: float, zeta: float, m: int) -> float:
    """Mass at ``m`` of the limiting block-count law of a Gnedin partition.

    ``rho_m = Gamma(z1+1) Gamma(z2+1) / Gamma(gamma) *
    prod_{l<m}(l^2 - gamma l + zeta) / (m! (m-1)!)`` where ``z1, z2`` are the
    roots of ``x^2 + gamma x + zeta = (x + z1)(x + z2)``.  Requires
    ``gamma > 0`` (for ``gamma = 0`` the block count diverges and no proper
    limit law exists).
    """
    if m < 1:
        raise SizeError(f"m must be >= 1, got {m}")
    EppfSpec.gnedin(gamma, zeta)  # parameter admissibility
    if gamma <= 0:
        raise ParamError("the limiting block-count law requires gamma > 0")
    log_c = gnedin_log_norm_constant(gamma, zeta)
    l = np.arange(1, m, dtype=float)
    num = l * l - gamma * l + zeta
    if np.any(num <= 0):
        return 0.0
    log_prod = float(np.log(num).sum()) if m > 1 else 0.0
    return float(np.exp(log_c + log_prod - gammaln(m + 1.0) - gammaln(float(m))))


def gnedin_log_norm_constant(gamma: float, zeta: float) -> float:
    """log of Gamma(z1+1) Gamma(z2+1) / Gamma(gamma) for the root pair.

    When ``gamma^2 < 4 zeta`` the roots are a conjugate pair and the product
    of gammas is real positive; it is evaluated through the complex log-gamma.
    """
    disc = gamma * gamma - 4.0 * zeta
    if disc < 0:
        z1 = complex(gamma / 2.0, np.sqrt(-disc) / 2.0)
        lg = 2.0 * np.real(loggamma(z1 + 1.0))
    else:
        r = np.sqrt(disc)
        z1, z2 = (gamma + r) / 2.0, (gamma - r) / 2.0
        lg = float(gammaln(z1 + 1.0) + gammaln(z2 + 1.0))
    return float(lg - gammaln(gamma))


def gnedin_rho_vector(gamma: float, zeta: float, tol: float = SERIES_TOL,
                      cap: Optional[int] = None) -> np.ndarray:
    """Truncated and renormalized component-count pmf of a Gnedin partition.

    The tail decays like ``m^-(gamma+1)``; summation stops once the integral
    tail bound drops below ``tol`` relative to the partial sum, or at the hard
    cap, in which case a :class:`TruncationWarning` is raised.
    """
    if gamma <= 0:
        raise ParamError("the limiting block-count law requires gamma > 0")
    if cap is None:
        cap = 200_000
    log_c = gnedin_log_norm_constant(gamma, zeta)
    m = np.arange(1, cap + 1, dtype=float)
    fac = m * m - gamma * m + zeta
    roots = np.nonzero(fac <= 0)[0]
    if roots.size:
        cap = int(roots[0]) + 1  # integer root: the law lives on 1..cap
        m = m[:cap]
        fac = fac[:cap]
    with np.errstate(divide="ignore"):
        log_prod = np.concatenate([[0.0], np.cumsum(np.log(fac[:-1]))])
    log_rho = log_c + log_prod - gammaln(m + 1.0) - gammaln(m)
    rho = np.exp(log_rho)
    if roots.size:
        out = rho
    else:
        partial = np.cumsum(rho)
        tail_bound = rho * m / gamma  # integral comparison for the power tail
        ok = np.nonzero(tail_bound[2:] < tol * partial[2:])[0]
        if ok.size:
            out = rho[: int(ok[0]) + 3]
        else:
            warnings.warn(
                f"component-count series cut at {cap} terms before reaching "
                f"tolerance {tol:g}",
                TruncationWarning,
                stacklevel=2,
            )
            out = rho
    return out / out.sum()
