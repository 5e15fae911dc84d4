"""Forward generative simulator of the two-level restaurant franchise.

Customers enter restaurant by restaurant; each one either joins an existing
table (bottom-level predictive weights) or opens a new table, whose dish is
drawn from the top-level predictive over dishes shared across restaurants,
possibly creating a new dish with an atom from the base measure.

Two engines are provided: :class:`CrfState` with :func:`seat_next` /
:func:`simulate` keeps the full labelled state (tables, dishes, atoms), and
:func:`empirical_cluster_pmf` runs many replicates in vectorized lockstep for
Monte Carlo estimation of the cluster-count laws.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cluster_counts import DIFFUSE, SPIKE_SLAB, GroupSizes, HssmSpec
from .errors import SizeError
from .logpmf import LogPmf
from .partitions import (
    GNEDIN,
    MFM,
    PITMAN_YOR,
    BlockSizes,
    EppfSpec,
    pred_weights,
    vnk_log_table,
)


# ---------------------------------------------------------------------------
# atoms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AtomValue:
    """Value attached to a dish.

    Identity is by tag: every spike draw is the same atom, every slab or
    diffuse draw is distinct by construction (unique id per draw), and a
    ``value`` payload may carry a concrete sample from a configured
    atom sampler.  Float payloads never participate in equality.
    """

    kind: str  # "spike" | "slab" | "diffuse"
    uid: int
    value: Optional[float] = field(default=None, compare=False)

    def __str__(self):
        if self.kind == "spike":
            return "spike"
        if self.value is not None:
            return f"{self.kind}:{self.value:.6g}"
        return f"{self.kind}:{self.uid}"


# ---------------------------------------------------------------------------
# full-state engine
# ---------------------------------------------------------------------------

@dataclass
class SeatingRecord:
    restaurant: int
    customer: int
    table: int
    dish: int
    new_table: bool
    new_dish: bool


class CrfState:
    """Complete franchise state with incrementally maintained counts.

    Restaurants, tables and dishes are 1-based; table labels form a prefix
    per restaurant and dish labels a global prefix, both in creation order.
    """

    def __init__(self, h: HssmSpec):
        self.h = h
        self.table_of_customer: list[list[int]] = []   # [i][j] -> table c
        self.dish_of_table: list[list[int]] = []       # [i][c-1] -> dish d
        self.table_counts: list[list[int]] = []        # [i][c-1] -> n_{ic.}
        self.dish_table_count: list[int] = []          # [d-1] -> m_{.d}
        self.atoms: list[AtomValue] = []               # [d-1] -> atom
        self._uid = 0
        self._seatings = 0

    # -- counts ------------------------------------------------------------
    @property
    def n_restaurants(self) -> int:
        return len(self.table_of_customer)

    @property
    def n_dishes(self) -> int:
        return len(self.dish_table_count)

    @property
    def total_tables(self) -> int:
        return sum(len(t) for t in self.dish_of_table)

    def customers_in(self, i: int) -> int:
        return len(self.table_of_customer[i - 1])

    def dish_labels(self, i: int) -> list[int]:
        """Dish label of every customer of restaurant i, in seating order."""
        return [self.dish_of_table[i - 1][c - 1] for c in self.table_of_customer[i - 1]]

    def distinct_dishes(self, i: int) -> int:
        return len(set(self.dish_of_table[i - 1]))

    def distinct_atoms(self, i: Optional[int] = None) -> int:
        """Distinct observed values, in restaurant i or in the whole sample."""
        if i is None:
            dishes = range(1, self.n_dishes + 1)
        else:
            dishes = set(self.dish_of_table[i - 1])
        return len({self.atoms[d - 1] for d in dishes})

    def _draw_atom(self, rng: np.random.Generator) -> AtomValue:
        base = self.h.base
        if base.kind == SPIKE_SLAB:
            if rng.random() < base.a:
                return AtomValue("spike", 0)
            self._uid += 1
            val = base.atom_sampler(rng) if base.atom_sampler else None
            return AtomValue("slab", self._uid, val)
        self._uid += 1
        val = base.atom_sampler(rng) if base.atom_sampler else None
        return AtomValue("diffuse", self._uid, val)

    def validate_counts(self):
        """Recompute all counts from the labels and compare with the running ones."""
        for i0, (cust, counts) in enumerate(zip(self.table_of_customer, self.table_counts)):
            fresh = [0] * len(counts)
            for c in cust:
                fresh[c - 1] += 1
            if fresh != counts:
                raise AssertionError(f"table counts out of sync in restaurant {i0 + 1}")
        fresh_dish = [0] * self.n_dishes
        for dishes in self.dish_of_table:
            for d in dishes:
                fresh_dish[d - 1] += 1
        if fresh_dish != self.dish_table_count:
            raise AssertionError("dish table counts out of sync")
        if any(m < 1 for m in self.dish_table_count):
            raise AssertionError("dish without tables")


def new_state(h: HssmSpec) -> CrfState:
    """Empty franchise, ready for the first seating."""
    return CrfState(h)


def _categorical(weights: np.ndarray, nu: float, rng: np.random.Generator) -> int:
    """Inverse-CDF draw over (w_1, ..., w_k, nu) with one uniform.

    Returns 0-based index into the joined vector; index k means "new".
    """
    u = rng.random()
    acc = 0.0
    for c, w in enumerate(weights):
        acc += w
        if u < acc:
            return c
    return len(weights)


def seat_next(state: CrfState, i: int, rng: np.random.Generator) -> SeatingRecord:
    """Seat the next customer of restaurant ``i`` and update all counts."""
    if i < 1:
        raise SizeError(f"restaurant index must be >= 1, got {i}")
    while state.n_restaurants < i:
        state.table_of_customer.append([])
        state.dish_of_table.append([])
        state.table_counts.append([])

    ii = i - 1
    counts = state.table_counts[ii]
    new_table = False
    if not counts:
        # first customer of a restaurant always opens table 1
        table = 1
        new_table = True
    else:
        omega, _nu = pred_weights(state.h.bottom, BlockSizes(tuple(counts)))
        pick = _categorical(omega, _nu, rng)
        if pick < len(counts):
            table = pick + 1
        else:
            table = len(counts) + 1
            new_table = True

    new_dish = False
    if new_table:
        if state.n_dishes == 0:
            dish = 1
            new_dish = True
        else:
            omega0, nu0 = pred_weights(state.h.top, BlockSizes(tuple(state.dish_table_count)))
            pick0 = _categorical(omega0, nu0, rng)
            if pick0 < state.n_dishes:
                dish = pick0 + 1
            else:
                dish = state.n_dishes + 1
                new_dish = True
        if new_dish:
            state.dish_table_count.append(0)
            state.atoms.append(state._draw_atom(rng))
        state.dish_of_table[ii].append(dish)
        state.table_counts[ii].append(0)
        state.dish_table_count[dish - 1] += 1
    else:
        dish = state.dish_of_table[ii][table - 1]

    state.table_of_customer[ii].append(table)
    state.table_counts[ii][table - 1] += 1
    state._seatings += 1
    if state._seatings % 1000 == 0:
        state.validate_counts()
    return SeatingRecord(i, state.customers_in(i), table, dish, new_table, new_dish)


def simulate(h: HssmSpec, g: GroupSizes, rng: np.random.Generator) -> CrfState:
    """Complete franchise for the given group sizes, filled restaurant by restaurant."""
    state = new_state(h)
    for i in range(1, g.I + 1):
        for _ in range(g.n[i - 1]):
            seat_next(state, i, rng)
    return state


# ---------------------------------------------------------------------------
# vectorized replicate engine
# ---------------------------------------------------------------------------

class _FamilyWeights:
    """Unnormalized predictive weights of one family, vectorized over replicates.

    Join weights and the new-block weight share a common denominator within
    each replicate, so only their ratios matter to the categorical draw.
    """

    def __init__(self, spec: EppfSpec, n_max: int):
        self.spec = spec
        self.family = spec.family
        if self.family == MFM:
            self.V = vnk_log_table(spec, n_max + 1)
        else:
            self.V = None

    def join_new(self, counts: np.ndarray, k: np.ndarray, n: np.ndarray):
        """Return (w, nu_raw): w[r, c] join weights (0 beyond k[r]), nu_raw[r]."""
        spec = self.spec
        active = np.arange(counts.shape[1])[None, :] < k[:, None]
        if self.family == PITMAN_YOR:
            w = np.where(active, counts - spec.sigma, 0.0)
            nu = np.maximum(spec.theta + spec.sigma * k, 0.0)
        elif self.family == GNEDIN:
            w = np.where(active, (counts + 1.0) * (n - k + spec.gamma)[:, None], 0.0)
            nu = np.maximum(k * (k - spec.gamma) + spec.zeta, 0.0)
        else:
            base = self.V[n, k]
            join = np.exp(self.V[n + 1, k] - base)
            w = np.where(active, (counts - spec.sigma) * join[:, None], 0.0)
            nu = np.exp(self.V[n + 1, k + 1] - base)
        return w, nu


def _pick_rows(w: np.ndarray, nu: np.ndarray, u: np.ndarray):
    """Single-uniform inverse-CDF over (w[r, :], nu[r]) per row.

    Returns (new, idx): boolean "opened new block" and the joined column.
    """
    tot = w.sum(axis=1) + nu
    target = u * tot
    cum = np.cumsum(w, axis=1)
    new = target >= cum[:, -1] if w.shape[1] else np.ones(len(u), bool)
    idx = (cum < target[:, None]).sum(axis=1)
    idx = np.minimum(idx, max(w.shape[1] - 1, 0))
    return new, idx


def _simulate_counts_batch(h: HssmSpec, g: GroupSizes, reps: int,
                           rng: np.random.Generator):
    """Vectorized franchise counts for ``reps`` independent replicates.

    Returns (tables_per_group, dishes_per_group, total_dishes,
    observed_per_group, observed_total); the observed counts collapse dishes
    that share the spike atom when the base measure is spike-and-slab.
    """
    I = g.I
    ntot = g.total
    max_tab = max(g.n)
    max_dish = ntot
    bottom = _FamilyWeights(h.bottom, max_tab)
    top = _FamilyWeights(h.top, ntot)
    spike = h.base.kind == SPIKE_SLAB

    m_d = np.zeros((reps, max_dish), dtype=np.float64)   # tables per dish
    n_dish = np.zeros(reps, dtype=np.int64)
    m_tot = np.zeros(reps, dtype=np.int64)
    is_spike = np.zeros((reps, max_dish), dtype=bool)

    K_groups = np.zeros((reps, I), dtype=np.int64)
    D_groups = np.zeros((reps, I), dtype=np.int64)
    Dt_groups = np.zeros((reps, I), dtype=np.int64)

    dish_of_table = np.zeros((reps, max_tab), dtype=np.int64)
    rows = np.arange(reps)

    for i in range(I):
        counts = np.zeros((reps, max_tab), dtype=np.float64)
        k = np.zeros(reps, dtype=np.int64)
        for t in range(g.n[i]):
            if t == 0:
                opens = np.ones(reps, dtype=bool)
                join_idx = np.zeros(reps, dtype=np.int64)
            else:
                w, nu = bottom.join_new(counts, k, np.full(reps, t))
                opens, join_idx = _pick_rows(w, nu, rng.random(reps))
            # joining customers
            stay = ~opens
            counts[rows[stay], join_idx[stay]] += 1.0
            if np.any(opens):
                o = rows[opens]
                # dish choice for the new tables
                u2 = rng.random(reps)[opens]
                has = n_dish[o] > 0
                dish = np.zeros(o.size, dtype=np.int64)
                if np.any(has):
                    oh = o[has]
                    w0, nu0 = top.join_new(m_d[oh], n_dish[oh], m_tot[oh])
                    newd, di = _pick_rows(w0, nu0, u2[has])
                    dish[has] = np.where(newd, n_dish[oh], di)
                    create = np.zeros(o.size, dtype=bool)
                    create[has] = newd
                else:
                    create = np.ones(o.size, dtype=bool)
                create |= ~has
                dish[~has] = n_dish[o[~has]]
                oc = o[create]
                if spike and oc.size:
                    is_spike[oc, n_dish[oc]] = rng.random(reps)[opens][create] < h.base.a
                n_dish[o[create]] += 1
                m_d[o, dish] += 1.0
                m_tot[o] += 1
                dish_of_table[o, k[o]] = dish
                counts[o, k[o]] += 1.0
                k[o] += 1
        K_groups[:, i] = k
        # distinct dishes among this restaurant's tables
        served = np.zeros((reps, max_dish), dtype=bool)
        for c in range(max_tab):
            mask = k > c
            served[rows[mask], dish_of_table[mask, c]] = True
        D_groups[:, i] = served.sum(axis=1)
        if spike:
            slab_served = served & ~is_spike
            spike_served = (served & is_spike).any(axis=1)
            Dt_groups[:, i] = slab_served.sum(axis=1) + spike_served
        else:
            Dt_groups[:, i] = D_groups[:, i]

    if spike:
        alive = np.arange(max_dish)[None, :] < n_dish[:, None]
        n_spike = (alive & is_spike).sum(axis=1)
        obs_total = n_dish - n_spike + (n_spike >= 1)
    else:
        obs_total = n_dish.copy()
    return K_groups, D_groups, n_dish, Dt_groups, obs_total


@dataclass
class EmpiricalCounts:
    """Monte Carlo estimates of the cluster-count laws."""

    reps: int
    per_group: list[LogPmf]
    total: LogPmf
    per_group_observed: list[LogPmf]
    total_observed: LogPmf
    mean_total: float
    se_mean_total: float

    def group_mean(self, i: int) -> float:
        return self.per_group[i - 1].mean()


_BATCH_CHUNK = 32768


def _freq_pmf(counts: np.ndarray) -> LogPmf:
    return LogPmf.from_probs(1, counts / counts.sum())


def empirical_cluster_pmf(h: HssmSpec, g: GroupSizes, reps: int,
                          rng: np.random.Generator) -> EmpiricalCounts:
    """Frequency estimates of the per-group and total cluster-count laws.

    Runs ``reps`` vectorized franchise replicates (in memory-bounded chunks).
    With a spike-and-slab base the observed-count estimates collapse
    spike-sharing dishes; with a diffuse base they coincide with the latent
    dish counts.
    """
    if reps < 1:
        raise SizeError(f"reps must be >= 1, got {reps}")
    ntot = g.total
    cg = np.zeros((g.I, max(g.n) + 1))
    cg_obs = np.zeros((g.I, max(g.n) + 1))
    ct = np.zeros(ntot + 1)
    ct_obs = np.zeros(ntot + 1)
    sum_t = 0.0
    sumsq_t = 0.0
    done = 0
    while done < reps:
        chunk = min(_BATCH_CHUNK, reps - done)
        _K, Dg, Dt, Dg_obs, Dt_obs = _simulate_counts_batch(h, g, chunk, rng)
        for i in range(g.I):
            cg[i] += np.bincount(Dg[:, i], minlength=cg.shape[1])[: cg.shape[1]]
            cg_obs[i] += np.bincount(Dg_obs[:, i], minlength=cg.shape[1])[: cg.shape[1]]
        ct += np.bincount(Dt, minlength=ntot + 1)
        ct_obs += np.bincount(Dt_obs, minlength=ntot + 1)
        track = Dt_obs if h.base.kind == SPIKE_SLAB else Dt
        sum_t += track.sum()
        sumsq_t += (track.astype(float) ** 2).sum()
        done += chunk
    per_group = [_freq_pmf(cg[i, 1:]) for i in range(g.I)]
    per_group_obs = [_freq_pmf(cg_obs[i, 1:]) for i in range(g.I)]
    total = _freq_pmf(ct[1:])
    total_obs = _freq_pmf(ct_obs[1:])
    mean = sum_t / reps
    var = max(sumsq_t / reps - mean * mean, 0.0)
    se = float(np.sqrt(var / reps)) if reps > 1 else float("inf")
    return EmpiricalCounts(reps, per_group, total, per_group_obs, total_obs,
                           float(mean), se)
