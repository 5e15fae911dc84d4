import numpy as np
import pytest

from hssm.cluster_counts import GroupSizes, hdp, hgp, hpyp, total_cluster_pmf
from hssm.errors import ConfigError, NumericalError
from hssm.gibbs import (
    EMPTY_STATS,
    BlockStats,
    Dataset,
    NigHyper,
    init_state,
    log_marginal_block,
    posterior_nig,
    predictive_density,
    predictive_logpdf,
    run_chain,
    sample_atoms,
    step_customer,
    step_table,
)
from hssm.partitions import BlockSizes, eppf_log

import oracles


HYPER = NigHyper(0.0, 1.0, 2.0, 1.0)


def _eppf_fns(h):
    def bottom(sizes):
        return float(np.exp(eppf_log(h.bottom, BlockSizes(tuple(sizes)))))

    def top(sizes):
        return float(np.exp(eppf_log(h.top, BlockSizes(tuple(sizes)))))

    return bottom, top


class TestMarginalLikelihood:
    def test_empty_block(self):
        assert log_marginal_block(EMPTY_STATS, HYPER) == 0.0

    def test_single_zero_observation_closed_form(self):
        # m0=0, s2=1, a=2, b=1: the marginal at y=0 is Gamma(2.5)/sqrt(4 pi) = 3/8
        val = np.exp(log_marginal_block(BlockStats.of([0.0]), HYPER))
        assert val == pytest.approx(0.375, rel=1e-12)

    def test_against_quadrature_oracle(self):
        for ys in ([0.0], [0.5, -0.3], [1.0, 2.0, -1.0]):
            expect = oracles.nig_marginal_quad(ys, 0.0, 1.0, 2.0, 1.0)
            mine = np.exp(log_marginal_block(BlockStats.of(ys), HYPER))
            assert mine == pytest.approx(expect, rel=1e-6)

    def test_block_additivity_is_one_point_predictive(self):
        base = BlockStats.of([0.7, -0.2])
        lhs = (log_marginal_block(base.add(1.3), HYPER)
               - log_marginal_block(base, HYPER))
        rhs = float(predictive_logpdf(1.3, base, HYPER))
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_guards_nonpositive_scale(self):
        with pytest.raises(NumericalError):
            log_marginal_block(BlockStats(2, 10.0, 0.0), HYPER)  # corrupted stats

    def test_predictive_integrates_to_one(self):
        grid = np.arange(-40.0, 40.0, 0.01)
        for stats in (EMPTY_STATS, BlockStats.of([1.0, 1.5, 0.8])):
            dens = np.exp(predictive_logpdf(grid, stats, HYPER))
            assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-3)


class TestSteps:
    def test_single_customer_always_reseated_alone(self, rng):
        data = Dataset((np.array([0.4]),))
        state = init_state(data, hdp(1.0, 1.0), HYPER, rng)
        for _ in range(5):
            step_customer(state, 1, 1, rng)
            assert state.c[0] == [1]
            assert state.table_dish[0] == [1]
            state.validate()

    def test_lone_table_keeps_a_dish(self, rng):
        data = Dataset((np.array([0.4, 0.6]),))
        state = init_state(data, hdp(1.0, 1.0), HYPER, rng, init="single")
        for _ in range(5):
            step_table(state, 1, 1, rng)
            assert state.table_dish[0] == [1]
            assert state.n_dishes == 1
            state.validate()

    def test_two_observation_posterior_same_dish(self):
        # long-run frequency of the two observations sharing a dish vs the
        # exhaustive two-point posterior
        y = np.array([0.2, 0.9])
        data = Dataset((y,))
        h = hdp(1.0, 1.0)
        bottom, top = _eppf_fns(h)
        post = oracles.exhaustive_gibbs_posterior(bottom, top, y, HYPER)
        expect = sum(p for (c, d), p in post.items() if d[0] == d[1])
        rng = np.random.default_rng(4)
        state = init_state(data, h, HYPER, rng)
        hits = 0
        sweeps = 30_000
        for _ in range(sweeps):
            for j in (1, 2):
                step_customer(state, 1, j, rng)
            for c in range(1, len(state.table_dish[0]) + 1):
                step_table(state, 1, c, rng)
            hits += state.d_star(1, 1) == state.d_star(1, 2)
        assert hits / sweeps == pytest.approx(expect, abs=0.01)

    def test_suffstats_consistent_under_stress(self, rng):
        data = Dataset((np.array([0.1, 0.2, 5.0, 5.1]), np.array([-3.0, 5.05])))
        state = init_state(data, hpyp(0.3, 1.0, 0.25, 2.0), HYPER, rng)
        for _ in range(200):
            for i in (1, 2):
                for j in range(1, data.sizes[i - 1] + 1):
                    step_customer(state, i, j, rng)
                for c in range(1, len(state.table_dish[i - 1]) + 1):
                    step_table(state, i, c, rng)
            state.validate()


class TestSampleAtoms:
    def test_no_dishes_no_atoms(self, rng):
        data = Dataset((np.array([1.0]),))
        state = init_state(data, hdp(1.0, 1.0), HYPER, rng)
        state.remove_customer(1, 1)
        assert sample_atoms(state, rng) == []

    def test_posterior_concentration(self, rng):
        y = np.full(10_000, 5.0) + rng.normal(0, 0.05, 10_000)
        data = Dataset((y,))
        state = init_state(data, hdp(1.0, 1.0), HYPER, rng, init="single")
        means = [sample_atoms(state, rng)[0][0] for _ in range(50)]
        assert np.mean(means) == pytest.approx(5.0, abs=0.05)

    def test_matches_posterior_parameters(self, rng):
        stats = BlockStats.of([1.0, 2.0, 3.0])
        m_n, s2_n, a_n, b_n = posterior_nig(stats, HYPER)
        assert a_n == pytest.approx(HYPER.a + 1.5)
        assert m_n == pytest.approx((0.0 + 1.0 * 6.0) / (1 + 3 * 1.0))


class TestRunChain:
    def test_snapshot_count(self):
        data = Dataset((np.array([0.3, 1.2]),))
        tr = run_chain(data, hdp(1.0, 1.0), HYPER, sweeps=6, burn_in=5, thin=1,
                       seed=1, engine="python")
        assert tr.n_snapshots == 1
        tr = run_chain(data, hdp(1.0, 1.0), HYPER, sweeps=105, burn_in=5, thin=10,
                       seed=1, engine="numba")
        assert tr.n_snapshots == 10

    def test_bad_plans_rejected(self):
        data = Dataset((np.array([0.3]),))
        with pytest.raises(ConfigError):
            run_chain(data, hdp(1.0, 1.0), HYPER, sweeps=5, burn_in=5)
        with pytest.raises(ConfigError):
            run_chain(data, hdp(1.0, 1.0), HYPER, sweeps=6, burn_in=5, thin=0)
        with pytest.raises(ConfigError):
            run_chain(data, hdp(1.0, 1.0), HYPER, sweeps=6, burn_in=5, init="bogus")
        with pytest.raises(ConfigError):
            run_chain(data, hdp(1.0, 1.0), HYPER, sweeps=6, burn_in=5, engine="bogus")

    @pytest.mark.parametrize("h", [hdp(1.0, 1.0), hpyp(0.3, 1.0, 0.2, 1.0),
                                   hgp(4.0, 7.0, 3.0, 5.0)],
                             ids=["hdp", "hpyp", "hgp"])
    def test_three_observation_exhaustive_posterior(self, h):
        y = np.array([0.1, 0.3, -2.0])
        bottom, top = _eppf_fns(h)
        post = oracles.posterior_cluster_count(
            oracles.exhaustive_gibbs_posterior(bottom, top, y, HYPER))
        tr = run_chain(Dataset((y,)), h, HYPER, sweeps=30_500, burn_in=500,
                       seed=7, engine="numba")
        emp = {k: float(np.mean(tr.n_clusters == k)) for k in (1, 2, 3)}
        tv = 0.5 * sum(abs(emp.get(k, 0.0) - post.get(k, 0.0)) for k in (1, 2, 3))
        assert tv < 0.03

    def test_engines_agree_statistically(self):
        y = np.array([0.0, 0.4, 5.0, -0.2])
        data = Dataset((y,))
        h = hdp(1.5, 2.0)
        tr_nb = run_chain(data, h, HYPER, 20_500, 500, seed=8, engine="numba")
        tr_py = run_chain(data, h, HYPER, 8_500, 500, seed=9, engine="python")
        tv = 0.5 * sum(abs(float(np.mean(tr_nb.n_clusters == k))
                           - float(np.mean(tr_py.n_clusters == k)))
                       for k in range(1, 5))
        assert tv < 0.03

    def test_deterministic_replay(self):
        data = Dataset((np.array([0.3, 1.2, -0.5]), np.array([2.0, 1.1])))
        h = hpyp(0.2, 1.0, 0.3, 2.0)
        a = run_chain(data, h, HYPER, 200, 50, seed=42)
        b = run_chain(data, h, HYPER, 200, 50, seed=42)
        assert np.array_equal(a.d_star, b.d_star)
        assert np.array_equal(a.table_sizes, b.table_sizes)

    def test_single_init_supported(self):
        data = Dataset((np.array([0.3, 1.2, -0.5]),))
        tr = run_chain(data, hdp(1.0, 1.0), HYPER, 60, 10, seed=3, init="single")
        assert tr.n_snapshots == 50

    def test_prior_recovery_with_flat_likelihood(self):
        # likelihood disabled: the chain must sample the prior cluster count
        g = GroupSizes((4, 4))
        data = Dataset((np.zeros(4), np.zeros(4)))
        h = hdp(2.0, 1.5)
        tr = run_chain(data, h, HYPER, 40_500, 500, seed=11, engine="numba",
                       flat_likelihood=True)
        exact = total_cluster_pmf(h, g)
        emp = np.array([float(np.mean(tr.n_clusters == k)) for k in range(1, 9)])
        tv = 0.5 * np.abs(emp - exact.probs()).sum()
        assert tv < 0.03

    def test_canonical_labels_identity(self):
        data = Dataset((np.array([0.3, 1.2, -0.5]),))
        tr = run_chain(data, hdp(1.0, 1.0), HYPER, 60, 10, seed=3)
        canon = tr.canonical_d_star()
        for m in range(tr.n_snapshots):
            # same partition pattern, labels in order of first appearance
            a, b = tr.d_star[m], canon[m]
            assert (a[:, None] == a[None, :]).all() == (b[:, None] == b[None, :]).all()
            seen = []
            for lab in b:
                if lab not in seen:
                    seen.append(lab)
            assert seen == sorted(seen)


class TestPredictiveDensity:
    def test_single_snapshot_single_dish(self):
        # trace with one snapshot, everything in one dish: the predictive is a
        # mixture of the dish predictive and the prior predictive
        y = np.array([0.5, 1.5])
        data = Dataset((y,))
        h = hdp(1.0, 1.0)
        tr = run_chain(data, h, HYPER, 1, 0, seed=1, engine="python", init="single")
        # force the known single-dish configuration
        assert tr.n_snapshots == 1
        grid = np.arange(-25.0, 25.0, 0.02)
        dens = predictive_density(tr, data, h, HYPER, 1, grid)
        assert np.all(dens >= 0)
        assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-2)

    def test_manual_one_dish_mixture(self):
        # hand-build the trace: 2 customers at one table, one dish
        from hssm.gibbs import GibbsTrace
        y = np.array([0.5, 1.5])
        data = Dataset((y,))
        h = hdp(1.0, 1.0)
        tr = GibbsTrace(
            d_star=np.array([[1, 1]], dtype=np.int32),
            n_clusters=np.array([1], dtype=np.int32),
            group_offsets=np.array([0, 2]),
            sweeps=1, burn_in=0, thin=1, seed=0,
            n_tables=np.array([[1]], dtype=np.int32),
            table_sizes=np.array([[[2]]], dtype=np.int32),
            table_dishes=np.array([[[1]]], dtype=np.int32),
        )
        grid = np.linspace(-8, 8, 401)
        dens = predictive_density(tr, data, h, HYPER, 1, grid)
        stats = BlockStats.of(y)
        # weights: join the table 2/3; new table 1/3 x (old dish 1/2, new 1/2)
        w_dish = 2.0 / 3.0 + 1.0 / 3.0 * 0.5
        expect = (w_dish * np.exp(predictive_logpdf(grid, stats, HYPER))
                  + (1 - w_dish) * np.exp(predictive_logpdf(grid, EMPTY_STATS, HYPER)))
        assert dens == pytest.approx(expect, rel=1e-10)

    def test_group_permutation_equivariance(self):
        # per-group summaries are pure functions of the per-group slices
        y1, y2 = np.array([0.5, 1.5, -0.2]), np.array([4.0, 3.5])
        data = Dataset((y1, y2))
        h = hdp(1.0, 1.0)
        tr = run_chain(data, h, HYPER, 300, 100, seed=5)
        grid = np.linspace(-8, 8, 101)
        d1 = predictive_density(tr, data, h, HYPER, 1, grid)
        d2 = predictive_density(tr, data, h, HYPER, 2, grid)

        from hssm.gibbs import GibbsTrace
        perm = [1, 0]
        n1, n2 = y1.size, y2.size
        cols = np.concatenate([np.arange(n1, n1 + n2), np.arange(n1)])
        tr_p = GibbsTrace(
            d_star=tr.d_star[:, cols],
            n_clusters=tr.n_clusters,
            group_offsets=np.array([0, n2, n2 + n1]),
            sweeps=tr.sweeps, burn_in=tr.burn_in, thin=tr.thin, seed=tr.seed,
            n_tables=tr.n_tables[:, perm],
            table_sizes=tr.table_sizes[:, perm],
            table_dishes=tr.table_dishes[:, perm],
        )
        data_p = Dataset((y2, y1))
        assert predictive_density(tr_p, data_p, h, HYPER, 1, grid) == pytest.approx(d2, rel=1e-12)
        assert predictive_density(tr_p, data_p, h, HYPER, 2, grid) == pytest.approx(d1, rel=1e-12)

    def test_requires_franchise_snapshots(self):
        from hssm.gibbs import GibbsTrace
        tr = GibbsTrace(np.ones((1, 2), dtype=np.int32), np.ones(1, dtype=np.int32),
                        np.array([0, 2]), 1, 0, 1, 0)
        with pytest.raises(ConfigError):
            predictive_density(tr, Dataset((np.zeros(2),)), hdp(1.0, 1.0), HYPER,
                               1, np.linspace(-1, 1, 5))
