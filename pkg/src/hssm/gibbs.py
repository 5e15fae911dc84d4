"""Marginal Gibbs sampler for Gaussian mixtures with a hierarchical prior.

The kernel/base pair is fixed to Normal observations with a
Normal-Inverse-Gamma base: ``variance ~ InvGamma(a, b)`` and
``mean | variance ~ Normal(m0, s2 * variance)``, so every block marginal is
available in closed form and the atoms can stay integrated out.

Labels are collapsed to ``(c, d)``: the table of each customer and the dish of
each table.  One sweep resamples every customer's ``(c, d*)`` pair jointly
from its full conditional, then every table's dish; emptied tables and dishes
are pruned immediately with prefix renumbering.

Two engines implement the same law: a plain-Python reference
(:func:`step_customer` / :func:`step_table`) and a compiled kernel
(:mod:`hssm._kernel`) used by :func:`run_chain` for long runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from . import _kernel
from .cluster_counts import HssmSpec
from .errors import ConfigError, NumericalError, SizeError
from .partitions import GNEDIN, MFM, PITMAN_YOR, BlockSizes, EppfSpec, pred_weights, vnk_log_table


# ---------------------------------------------------------------------------
# data and hyperparameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dataset:
    """Observations arranged by group."""

    groups: tuple

    def __post_init__(self):
        gs = tuple(np.asarray(g, dtype=float) for g in self.groups)
        object.__setattr__(self, "groups", gs)
        if len(gs) == 0:
            raise SizeError("at least one group is required")
        if any(g.ndim != 1 or g.size == 0 for g in gs):
            raise SizeError("every group needs at least one observation")

    @property
    def I(self) -> int:  # noqa: E743
        return len(self.groups)

    @property
    def sizes(self) -> tuple:
        return tuple(g.size for g in self.groups)

    @property
    def total(self) -> int:
        return int(sum(self.sizes))

    def flat(self) -> tuple[np.ndarray, np.ndarray]:
        """(values, offsets) with offsets[i]..offsets[i+1] spanning group i."""
        y = np.concatenate(self.groups)
        off = np.concatenate([[0], np.cumsum(self.sizes)]).astype(np.int64)
        return y, off


@dataclass(frozen=True)
class NigHyper:
    """Normal-Inverse-Gamma base: m0 location, s2 relative variance of the
    mean, (a, b) inverse-gamma shape/scale for the variance."""

    m0: float = 0.0
    s2: float = 10.0
    a: float = 2.0
    b: float = 1.0

    def __post_init__(self):
        if self.s2 <= 0 or self.a <= 0 or self.b <= 0:
            raise ConfigError("s2, a, b must all be strictly positive")


@dataclass(frozen=True)
class BlockStats:
    """Sufficient statistics of one block of observations."""

    n: int
    total: float
    sumsq: float

    def add(self, y: float) -> "BlockStats":
        return BlockStats(self.n + 1, self.total + y, self.sumsq + y * y)

    def merge(self, o: "BlockStats") -> "BlockStats":
        return BlockStats(self.n + o.n, self.total + o.total, self.sumsq + o.sumsq)

    @staticmethod
    def of(values) -> "BlockStats":
        v = np.asarray(values, dtype=float)
        return BlockStats(int(v.size), float(v.sum()), float((v * v).sum()))


EMPTY_STATS = BlockStats(0, 0.0, 0.0)


def log_marginal_block(stats: BlockStats, hyper: NigHyper) -> float:
    """log of the block marginal ``int prod_j N(y_j | mu, v) dNIG(mu, v)``.

    Empty blocks have log-marginal 0.  The posterior scale
    ``b_n = b + (Q - shrinkage)/2`` is positive for any real data; a
    nonpositive value signals corrupted statistics.
    """
    n, s, ss = stats.n, stats.total, stats.sumsq
    if n < 0:
        raise NumericalError("negative block count")
    if n == 0:
        return 0.0
    m0, s2, a, b = hyper.m0, hyper.s2, hyper.a, hyper.b
    an = a + 0.5 * n
    q = ss - 2.0 * m0 * s + n * m0 * m0
    dev = s - n * m0
    bn = b + 0.5 * q - 0.5 * s2 * dev * dev / (1.0 + n * s2)
    if bn <= 0.0:
        raise NumericalError(f"nonpositive posterior scale {bn}")
    return float(
        -0.5 * n * np.log(2.0 * np.pi)
        - 0.5 * np.log1p(n * s2)
        + a * np.log(b) - an * np.log(bn)
        + gammaln(an) - gammaln(a)
    )


def posterior_nig(stats: BlockStats, hyper: NigHyper) -> tuple[float, float, float, float]:
    """Posterior NIG parameters (m_n, s2_n, a_n, b_n) given a block."""
    n, s, ss = stats.n, stats.total, stats.sumsq
    m0, s2, a, b = hyper.m0, hyper.s2, hyper.a, hyper.b
    s2_n = s2 / (1.0 + n * s2)
    m_n = (m0 + s2 * s) / (1.0 + n * s2)
    a_n = a + 0.5 * n
    q = ss - 2.0 * m0 * s + n * m0 * m0
    dev = s - n * m0
    b_n = b + 0.5 * q - 0.5 * s2 * dev * dev / (1.0 + n * s2)
    return m_n, s2_n, a_n, b_n


def predictive_logpdf(y, stats: BlockStats, hyper: NigHyper) -> np.ndarray:
    """One-point predictive density given a block: a location-scale Student t.

    Equals ``log_marginal_block(stats + y) - log_marginal_block(stats)``.
    """
    m_n, s2_n, a_n, b_n = posterior_nig(stats, hyper)
    df = 2.0 * a_n
    scale2 = (b_n / a_n) * (1.0 + s2_n)
    y = np.asarray(y, dtype=float)
    z2 = (y - m_n) ** 2 / (df * scale2)
    return (gammaln(0.5 * (df + 1.0)) - gammaln(0.5 * df)
            - 0.5 * np.log(df * np.pi * scale2)
            - 0.5 * (df + 1.0) * np.log1p(z2))


# ---------------------------------------------------------------------------
# reference engine state
# ---------------------------------------------------------------------------

class GibbsState:
    """Mutable chain state: labels plus incrementally maintained statistics.

    Tables are per restaurant with prefix labels 1..m_i; dishes are global
    with prefix labels 1..D.  ``flat_likelihood=True`` replaces every marginal
    ratio by 1 (prior-only chain, used to validate the label dynamics).
    """

    def __init__(self, data: Dataset, h: HssmSpec, hyper: NigHyper,
                 flat_likelihood: bool = False):
        self.data = data
        self.h = h
        self.hyper = hyper
        self.flat = flat_likelihood
        self.c: list[list[int]] = [[] for _ in range(data.I)]  # table of customer
        self.table_dish: list[list[int]] = [[] for _ in range(data.I)]
        self.table_stats: list[list[BlockStats]] = [[] for _ in range(data.I)]
        self.dish_stats: list[BlockStats] = []
        self.m_d: list[int] = []

    # -- derived -----------------------------------------------------------
    @property
    def n_dishes(self) -> int:
        return len(self.m_d)

    @property
    def m_tot(self) -> int:
        return sum(len(t) for t in self.table_dish)

    def d_star(self, i: int, j: int) -> int:
        return self.table_dish[i - 1][self.c[i - 1][j - 1] - 1]

    def dish_labels_flat(self) -> np.ndarray:
        out = []
        for i in range(1, self.data.I + 1):
            for j in range(1, len(self.c[i - 1]) + 1):
                out.append(self.d_star(i, j))
        return np.asarray(out, dtype=int)

    def _marginal_delta(self, stats: BlockStats, block: BlockStats) -> float:
        if self.flat:
            return 0.0
        return (log_marginal_block(stats.merge(block), self.hyper)
                - log_marginal_block(stats, self.hyper))

    def validate(self):
        """Check the running statistics against a recomputation from labels."""
        fresh_dish = [EMPTY_STATS for _ in range(self.n_dishes)]
        fresh_md = [0] * self.n_dishes
        for i in range(self.data.I):
            sizes = [0] * len(self.table_dish[i])
            fresh_tab = [EMPTY_STATS for _ in self.table_dish[i]]
            for j, c in enumerate(self.c[i]):
                sizes[c - 1] += 1
                fresh_tab[c - 1] = fresh_tab[c - 1].add(float(self.data.groups[i][j]))
            for c0, st in enumerate(self.table_stats[i]):
                if sizes[c0] != st.n or abs(fresh_tab[c0].total - st.total) > 1e-8 * max(1, st.n):
                    raise AssertionError(f"table stats out of sync at ({i + 1}, {c0 + 1})")
                if st.n < 1:
                    raise AssertionError("empty table retained")
                d = self.table_dish[i][c0]
                fresh_md[d - 1] += 1
                fresh_dish[d - 1] = fresh_dish[d - 1].merge(fresh_tab[c0])
        for d0 in range(self.n_dishes):
            if fresh_md[d0] != self.m_d[d0] or fresh_md[d0] < 1:
                raise AssertionError(f"dish table count out of sync at {d0 + 1}")
            st = self.dish_stats[d0]
            if fresh_dish[d0].n != st.n or abs(fresh_dish[d0].total - st.total) > 1e-8 * max(1, st.n):
                raise AssertionError(f"dish stats out of sync at {d0 + 1}")

    # -- removal with prefix renumbering ------------------------------------
    def _remove_dish_if_orphaned(self, d: int):
        if self.m_d[d - 1] > 0:
            return
        del self.m_d[d - 1]
        del self.dish_stats[d - 1]
        for i in range(self.data.I):
            self.table_dish[i] = [x - 1 if x > d else x for x in self.table_dish[i]]

    def remove_customer(self, i: int, j: int):
        ii, jj = i - 1, j - 1
        c = self.c[ii][jj]
        d = self.table_dish[ii][c - 1]
        y = float(self.data.groups[ii][jj])
        st = self.table_stats[ii][c - 1]
        self.table_stats[ii][c - 1] = BlockStats(st.n - 1, st.total - y, st.sumsq - y * y)
        ds = self.dish_stats[d - 1]
        self.dish_stats[d - 1] = BlockStats(ds.n - 1, ds.total - y, ds.sumsq - y * y)
        self.c[ii][jj] = 0
        if self.table_stats[ii][c - 1].n == 0:
            del self.table_stats[ii][c - 1]
            del self.table_dish[ii][c - 1]
            self.c[ii] = [x - 1 if x > c else x for x in self.c[ii]]
            self.m_d[d - 1] -= 1
            self._remove_dish_if_orphaned(d)

    def seat_customer(self, i: int, j: int, c: int, d: int):
        """Seat customer (i, j) at table c (dish d); c or d may be new labels."""
        ii = i - 1
        y = float(self.data.groups[ii][j - 1])
        if c == len(self.table_dish[ii]) + 1:
            if d == self.n_dishes + 1:
                self.m_d.append(0)
                self.dish_stats.append(EMPTY_STATS)
            self.table_dish[ii].append(d)
            self.table_stats[ii].append(EMPTY_STATS)
            self.m_d[d - 1] += 1
        else:
            d = self.table_dish[ii][c - 1]
        self.c[ii][j - 1] = c
        self.table_stats[ii][c - 1] = self.table_stats[ii][c - 1].add(y)
        self.dish_stats[d - 1] = self.dish_stats[d - 1].add(y)


def _sample_log_weights(wlog: list[float], rng: np.random.Generator) -> int:
    w = np.asarray(wlog, dtype=float)
    mx = w.max()
    if not np.isfinite(mx):
        raise NumericalError("all candidate weights vanished")
    p = np.exp(w - mx)
    u = rng.random() * p.sum()
    acc = 0.0
    for q, x in enumerate(p):
        acc += x
        if u < acc:
            return q
    return len(p) - 1


def _customer_options(state: GibbsState, i: int, y: float):
    """Log-weights and labels for the joint (table, dish) full conditional."""
    ii = i - 1
    dishes = state.n_dishes
    deltas = [state._marginal_delta(state.dish_stats[d], BlockStats(1, y, y * y))
              for d in range(dishes)]
    delta_new = state._marginal_delta(EMPTY_STATS, BlockStats(1, y, y * y))

    wlog: list[float] = []
    labels: list[tuple[int, int]] = []
    counts = [st.n for st in state.table_stats[ii]]
    if counts:
        omega, nu = pred_weights(state.h.bottom, BlockSizes(tuple(counts)))
        for c0, w in enumerate(omega):
            d = state.table_dish[ii][c0]
            wlog.append(_safe_log(w) + deltas[d - 1])
            labels.append((c0 + 1, d))
        log_nu = _safe_log(nu)
    else:
        log_nu = 0.0
    new_c = len(counts) + 1
    if dishes:
        omega0, nu0 = pred_weights(state.h.top, BlockSizes(tuple(state.m_d)))
        for d0, w in enumerate(omega0):
            wlog.append(log_nu + _safe_log(w) + deltas[d0])
            labels.append((new_c, d0 + 1))
        wlog.append(log_nu + _safe_log(nu0) + delta_new)
    else:
        wlog.append(log_nu + delta_new)
    labels.append((new_c, dishes + 1))
    return wlog, labels


def _safe_log(x: float) -> float:
    return float(np.log(x)) if x > 0 else -np.inf


def step_customer(state: GibbsState, i: int, j: int, rng: np.random.Generator) -> GibbsState:
    """Resample the (table, dish) pair of customer j in group i."""
    state.remove_customer(i, j)
    y = float(state.data.groups[i - 1][j - 1])
    wlog, labels = _customer_options(state, i, y)
    pick = _sample_log_weights(wlog, rng)
    c, d = labels[pick]
    state.seat_customer(i, j, c, d)
    return state


def step_table(state: GibbsState, i: int, c: int, rng: np.random.Generator) -> GibbsState:
    """Resample the dish of table c in group i given everything else."""
    ii = i - 1
    d = state.table_dish[ii][c - 1]
    block = state.table_stats[ii][c - 1]
    state.m_d[d - 1] -= 1
    ds = state.dish_stats[d - 1]
    state.dish_stats[d - 1] = BlockStats(ds.n - block.n, ds.total - block.total,
                                         ds.sumsq - block.sumsq)
    state._remove_dish_if_orphaned(d)

    wlog = []
    if state.n_dishes:
        omega0, nu0 = pred_weights(state.h.top, BlockSizes(tuple(state.m_d)))
        for d0 in range(state.n_dishes):
            wlog.append(_safe_log(omega0[d0])
                        + state._marginal_delta(state.dish_stats[d0], block))
        log_new = _safe_log(nu0)
    else:
        log_new = 0.0
    wlog.append(log_new + state._marginal_delta(EMPTY_STATS, block))
    pick = _sample_log_weights(wlog, rng)
    if pick < state.n_dishes:
        new_d = pick + 1
    else:
        state.m_d.append(0)
        state.dish_stats.append(EMPTY_STATS)
        new_d = state.n_dishes
    state.table_dish[ii][c - 1] = new_d
    state.m_d[new_d - 1] += 1
    ds = state.dish_stats[new_d - 1]
    state.dish_stats[new_d - 1] = ds.merge(block)
    return state


def sample_atoms(state: GibbsState, rng: np.random.Generator) -> list[tuple[float, float]]:
    """Draw (mean, variance) for every dish from its NIG posterior."""
    atoms = []
    for st in state.dish_stats:
        m_n, s2_n, a_n, b_n = posterior_nig(st, state.hyper)
        var = b_n / rng.gamma(a_n)
        mean = rng.normal(m_n, np.sqrt(s2_n * var))
        atoms.append((float(mean), float(var)))
    return atoms


def init_state(data: Dataset, h: HssmSpec, hyper: NigHyper,
               rng: np.random.Generator, init: str = "sequential",
               flat_likelihood: bool = False) -> GibbsState:
    """Build a starting state: sequential predictive seating or one cluster."""
    state = GibbsState(data, h, hyper, flat_likelihood)
    if init == "single":
        for i in range(1, data.I + 1):
            state.c[i - 1] = [0] * data.sizes[i - 1]
            for j in range(1, data.sizes[i - 1] + 1):
                state.seat_customer(i, j, 1, 1)
        return state
    if init != "sequential":
        raise ConfigError(f"unknown init {init!r}")
    for i in range(1, data.I + 1):
        state.c[i - 1] = [0] * data.sizes[i - 1]
        for j in range(1, data.sizes[i - 1] + 1):
            y = float(data.groups[i - 1][j - 1])
            wlog, labels = _customer_options(state, i, y)
            pick = _sample_log_weights(wlog, rng)
            c, d = labels[pick]
            state.seat_customer(i, j, c, d)
    return state


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

@dataclass
class GibbsTrace:
    """Thinned post-burn-in snapshots of the chain.

    ``d_star[m]`` is the flattened dish-label vector (groups concatenated in
    order), ``n_clusters[m]`` the number of dishes.  The table-level summary
    arrays allow posterior predictive evaluation without replaying the chain.
    """

    d_star: np.ndarray          # (M, N) int
    n_clusters: np.ndarray      # (M,) int
    group_offsets: np.ndarray   # (I+1,) int
    sweeps: int
    burn_in: int
    thin: int
    seed: int
    n_tables: Optional[np.ndarray] = None      # (M, I)
    table_sizes: Optional[np.ndarray] = None   # (M, I, maxT)
    table_dishes: Optional[np.ndarray] = None  # (M, I, maxT)

    @property
    def n_snapshots(self) -> int:
        return int(self.d_star.shape[0])

    def canonical_d_star(self) -> np.ndarray:
        """Dish labels relabelled in order of first appearance per snapshot."""
        out = np.empty_like(self.d_star)
        for m in range(self.d_star.shape[0]):
            row = self.d_star[m]
            remap: dict = {}
            for lab in row:
                if lab not in remap:
                    remap[lab] = len(remap) + 1
            out[m] = [remap[lab] for lab in row]
        return out


def _snapshot_count(sweeps: int, burn_in: int, thin: int) -> int:
    if burn_in < 0 or sweeps <= burn_in:
        raise ConfigError("need sweeps > burn_in >= 0")
    if thin < 1:
        raise ConfigError("thin must be >= 1")
    return (sweeps - burn_in) // thin


def _family_code(spec: EppfSpec, n_max: int):
    if spec.family == PITMAN_YOR:
        return _kernel.FAM_PY, spec.sigma, spec.theta, np.zeros((1, 1))
    if spec.family == GNEDIN:
        return _kernel.FAM_GN, spec.gamma, spec.zeta, np.zeros((1, 1))
    if spec.family == MFM:
        return _kernel.FAM_MFM, spec.sigma, 0.0, np.asarray(vnk_log_table(spec, n_max + 1))
    raise ConfigError(f"unknown family {spec.family!r}")


def run_chain(data: Dataset, h: HssmSpec, hyper: NigHyper, sweeps: int,
              burn_in: int, thin: int = 1, seed: int = 0,
              init: str = "sequential", engine: str = "auto",
              flat_likelihood: bool = False) -> GibbsTrace:
    """Run one chain and return its trace.

    ``engine="numba"`` (the default resolution of ``"auto"``) uses the
    compiled kernel; ``engine="python"`` runs the reference implementation.
    The two sample the same law but consume different random streams.
    """
    n_snap = _snapshot_count(sweeps, burn_in, thin)
    if init not in ("sequential", "single"):
        raise ConfigError(f"unknown init {init!r}")
    if engine == "auto":
        engine = "numba" if _kernel.HAVE_NUMBA else "python"
    if engine == "numba":
        return _run_chain_kernel(data, h, hyper, sweeps, burn_in, thin, seed,
                                 init, flat_likelihood, n_snap)
    if engine != "python":
        raise ConfigError(f"unknown engine {engine!r}")

    rng = np.random.default_rng(seed)
    state = init_state(data, h, hyper, rng, init, flat_likelihood)
    N = data.total
    I = data.I
    maxT = max(data.sizes)
    d_star = np.zeros((n_snap, N), dtype=np.int32)
    n_clusters = np.zeros(n_snap, dtype=np.int32)
    n_tables = np.zeros((n_snap, I), dtype=np.int32)
    table_sizes = np.zeros((n_snap, I, maxT), dtype=np.int32)
    table_dishes = np.zeros((n_snap, I, maxT), dtype=np.int32)
    _, off = data.flat()
    si = 0
    for sweep in range(sweeps):
        for i in range(1, I + 1):
            for j in range(1, data.sizes[i - 1] + 1):
                step_customer(state, i, j, rng)
        for i in range(1, I + 1):
            for c in range(1, len(state.table_dish[i - 1]) + 1):
                step_table(state, i, c, rng)
        state.validate()
        if sweep >= burn_in and (sweep - burn_in) % thin == thin - 1 and si < n_snap:
            d_star[si] = state.dish_labels_flat()
            n_clusters[si] = state.n_dishes
            for i in range(I):
                nt = len(state.table_dish[i])
                n_tables[si, i] = nt
                table_sizes[si, i, :nt] = [st.n for st in state.table_stats[i]]
                table_dishes[si, i, :nt] = state.table_dish[i]
            si += 1
    return GibbsTrace(d_star, n_clusters, off, sweeps, burn_in, thin, seed,
                      n_tables, table_sizes, table_dishes)


def _run_chain_kernel(data, h, hyper, sweeps, burn_in, thin, seed, init,
                      flat_likelihood, n_snap):
    y, off = data.flat()
    N = data.total
    I = data.I
    maxT = max(data.sizes)
    fam_b, pb0, pb1, Vb = _family_code(h.bottom, maxT)
    fam_t, pt0, pt1, Vt = _family_code(h.top, N)
    snap_d = np.zeros((n_snap, N), dtype=np.int64)
    snap_D = np.zeros(n_snap, dtype=np.int64)
    snap_ntab = np.zeros((n_snap, I), dtype=np.int64)
    snap_size = np.zeros((n_snap, I, maxT), dtype=np.int64)
    snap_dish = np.zeros((n_snap, I, maxT), dtype=np.int64)
    filled = _kernel.run_sweeps(
        y, off,
        fam_b, float(pb0), float(pb1), Vb,
        fam_t, float(pt0), float(pt1), Vt,
        float(hyper.m0), float(hyper.s2), float(hyper.a), float(hyper.b),
        bool(flat_likelihood),
        int(sweeps), int(burn_in), int(thin), int(seed), init == "single",
        snap_d, snap_D, snap_ntab, snap_size, snap_dish,
    )
    if filled != n_snap:
        raise NumericalError(f"kernel recorded {filled} snapshots, expected {n_snap}")
    return GibbsTrace(snap_d.astype(np.int32) + 1, snap_D.astype(np.int32), off,
                      sweeps, burn_in, thin, seed,
                      snap_ntab.astype(np.int32),
                      snap_size.astype(np.int32),
                      snap_dish.astype(np.int32) + 1)


# ---------------------------------------------------------------------------
# posterior predictive
# ---------------------------------------------------------------------------

def predictive_density(trace: GibbsTrace, data: Dataset, h: HssmSpec,
                       hyper: NigHyper, i: int, grid: Sequence[float]) -> np.ndarray:
    """Monte Carlo posterior predictive density for group ``i`` on ``grid``.

    Per snapshot, the next customer either joins a table (predicting that
    table's dish), opens a table serving an existing dish, or opens a table
    with a new dish; each case mixes the dish's Student-t one-point
    predictive with the corresponding seating probability.
    """
    if trace.n_tables is None:
        raise ConfigError("trace lacks table-level snapshots; rerun the chain")
    if not 1 <= i <= data.I:
        raise ConfigError(f"group index out of range: {i}")
    grid = np.asarray(grid, dtype=float)
    y, off = data.flat()
    M = trace.n_snapshots
    dens = np.zeros(grid.size)
    ii = i - 1
    for m in range(M):
        labels = trace.d_star[m]
        D = int(trace.n_clusters[m])
        # per-dish sufficient statistics from the flattened labels
        cnt = np.bincount(labels, minlength=D + 1)[1:]
        s = np.bincount(labels, weights=y, minlength=D + 1)[1:]
        ss = np.bincount(labels, weights=y * y, minlength=D + 1)[1:]
        nt = int(trace.n_tables[m, ii])
        sizes = trace.table_sizes[m, ii, :nt]
        dishes = trace.table_dishes[m, ii, :nt]
        m_d = np.zeros(D, dtype=int)
        for g0 in range(data.I):
            ng = int(trace.n_tables[m, g0])
            m_d += np.bincount(trace.table_dishes[m, g0, :ng] - 1, minlength=D)
        omega, nu = pred_weights(h.bottom, BlockSizes(tuple(int(x) for x in sizes)))
        omega0, nu0 = pred_weights(h.top, BlockSizes(tuple(int(x) for x in m_d)))
        dish_w = np.zeros(D + 1)
        for c0 in range(nt):
            dish_w[dishes[c0] - 1] += omega[c0]
        dish_w[:D] += nu * omega0
        dish_w[D] = nu * nu0
        snap = np.zeros(grid.size)
        for d0 in range(D):
            if dish_w[d0] <= 0:
                continue
            stats = BlockStats(int(cnt[d0]), float(s[d0]), float(ss[d0]))
            snap += dish_w[d0] * np.exp(predictive_logpdf(grid, stats, hyper))
        if dish_w[D] > 0:
            snap += dish_w[D] * np.exp(predictive_logpdf(grid, EMPTY_STATS, hyper))
        dens += snap
    return dens / M
