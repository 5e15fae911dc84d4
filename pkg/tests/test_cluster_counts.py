import itertools

import numpy as np
import pytest

from hssm.cluster_counts import (
    BaseMeasure,
    GroupSizes,
    HssmSpec,
    cluster_moment,
    hdp,
    hdpyp,
    hgdp,
    hgp,
    hgpyp,
    hpydp,
    hpyp,
    marginal_cluster_pmf,
    peppf_log,
    spike_slab_adjust,
    spike_slab_distinct_pmf,
    table_count_pmf,
    total_cluster_pmf,
)
from hssm.errors import ParamError, SizeError
from hssm.logpmf import LogPmf
from hssm.partitions import EppfSpec, block_count_pmf, eppf_log

import oracles


def tab_families():
    """The five parameter settings of the reference moment table (I=2, n=50)."""
    return {
        "hdp_43.3": hdp(43.3, 43.3),
        "hpyp_0.25_29.9": hpyp(0.25, 29.9, 0.25, 29.9),
        "hgp_15_1450": hgp(15.0, 1450.0, 15.0, 1450.0),
        "hpyp_0.67_8.53": hpyp(0.67, 8.53, 0.67, 8.53),
        "hgp_3.2_290": hgp(3.2, 290.0, 3.2, 290.0),
    }


class TestMarginal:
    def test_single_observation(self):
        p = marginal_cluster_pmf(hdp(2.0, 3.0), 1)
        assert p.probs() == pytest.approx([1.0])

    def test_hdp_against_bernoulli_oracle(self):
        # DP block counts stack as independent new-block indicators, so the
        # whole composition has an exact oracle independent of the V/Stirling
        # route: P{D = k} = sum_m Bern-conv(theta1, 50)[m] Bern-conv(theta0, m)[k]
        theta0, theta1, n = 43.3, 43.3, 50
        bottom = oracles.dp_block_count_pmf(theta1, n)
        expect = np.zeros(n)
        for m in range(1, n + 1):
            expect[: m] += bottom[m - 1] * oracles.dp_block_count_pmf(theta0, m)
        mine = marginal_cluster_pmf(hdp(theta0, theta1), n).probs()
        assert np.abs(mine - expect).max() < 1e-13

    def test_hdp_moments_exact(self):
        # Bernoulli-oracle-backed exact values; the published table rounds
        # the variance to 9.1, the exact value is 9.0226
        p = marginal_cluster_pmf(hdp(43.3, 43.3), 50)
        assert p.mean() == pytest.approx(25.000922286, abs=1e-6)
        assert p.variance() == pytest.approx(9.022561962, abs=1e-6)

    def test_reference_table_means(self):
        for name, h in tab_families().items():
            p = marginal_cluster_pmf(h, 50)
            assert p.mean() == pytest.approx(25.0, abs=0.08), name

    def test_rejects_n_zero(self):
        with pytest.raises(SizeError):
            marginal_cluster_pmf(hdp(1.0, 1.0), 0)


class TestTotal:
    def test_single_group_equals_marginal(self):
        h = hpyp(0.3, 2.0, 0.2, 1.0)
        tot = total_cluster_pmf(h, GroupSizes((12,)))
        marg = marginal_cluster_pmf(h, 12)
        assert np.abs(tot.probs() - marg.probs()).max() < 1e-15

    def test_matches_direct_double_sum(self):
        # brute-force sum over (m1, m2) against the convolution route
        for h in (hdp(2.0, 3.0), hpyp(0.4, 1.0, 0.3, 2.0), hgp(4.0, 7.0, 3.2, 290.0)):
            n1, n2 = 15, 11
            q1 = block_count_pmf(h.bottom, n1).probs()
            q2 = block_count_pmf(h.bottom, n2).probs()
            ntot = n1 + n2
            Q0 = np.exp(
                np.array([np.pad(block_count_pmf(h.top, m).log_mass, (0, ntot - m),
                                 constant_values=-np.inf)
                          for m in range(1, ntot + 1)]))
            expect = np.zeros(ntot)
            for m1 in range(1, n1 + 1):
                for m2 in range(1, n2 + 1):
                    expect += q1[m1 - 1] * q2[m2 - 1] * Q0[m1 + m2 - 1]
            mine = total_cluster_pmf(h, GroupSizes((n1, n2))).probs()
            assert np.abs(mine - expect).max() < 1e-12

    def test_dishes_never_exceed_tables(self):
        for h in tab_families().values():
            g = GroupSizes((20, 20))
            tot = total_cluster_pmf(h, g)
            tabs = table_count_pmf(h, g)
            assert tot.mean() <= tabs.mean() + 1e-12
            marg = marginal_cluster_pmf(h, 20)
            kt = block_count_pmf(h.bottom, 20)
            assert marg.mean() <= kt.mean() + 1e-12

    def test_pooling_below_independent_sum(self):
        h = hdp(43.3, 43.3)
        tot = total_cluster_pmf(h, GroupSizes((50, 50)))
        marg = marginal_cluster_pmf(h, 50)
        assert tot.mean() < 2 * marg.mean()


class TestMoments:
    def test_point_mass(self):
        p = LogPmf.from_probs(3, [1.0])
        assert cluster_moment(p, 2.0) == pytest.approx(9.0)

    def test_uniform_pair(self):
        p = LogPmf.from_probs(1, [0.5, 0.5])
        assert cluster_moment(p, 1.0) == pytest.approx(1.5)

    def test_hpyp_reference_mean(self):
        p = marginal_cluster_pmf(hpyp(0.25, 29.9, 0.25, 29.9), 50)
        assert cluster_moment(p, 1.0) == pytest.approx(25.0, abs=0.05)


class TestSpikeSlab:
    def test_single_draw(self):
        p = spike_slab_distinct_pmf(1, 0.3)
        assert p.probs() == pytest.approx([1.0])

    def test_two_draws_enumerated(self):
        # two iid draws: both spike w.p. a^2 -> 1 distinct; otherwise 2
        a = 0.5
        p = spike_slab_distinct_pmf(2, a)
        assert p.probs() == pytest.approx([a * a, 1 - a * a])

    def test_three_draws_enumerated(self):
        # d distinct among 3 draws: d=1 iff all spike; d=2 iff exactly two
        # spikes; d=3 otherwise (slabs never collide)
        a = 0.3
        p = spike_slab_distinct_pmf(3, a)
        expect = [a ** 3, 3 * a * a * (1 - a), 1 - a ** 3 - 3 * a * a * (1 - a)]
        assert p.probs() == pytest.approx(expect)

    def test_normalization_sweep(self):
        for a in (0.1, 0.5, 0.9):
            for k in range(1, 51):
                assert spike_slab_distinct_pmf(k, a).total_mass() == pytest.approx(1.0, abs=1e-12)

    def test_requires_open_interval(self):
        with pytest.raises(ParamError):
            spike_slab_distinct_pmf(3, 0.0)
        with pytest.raises(ParamError):
            spike_slab_adjust(LogPmf.from_probs(1, [1.0]), 1.0)

    def test_adjust_vanishing_spike_is_identity(self):
        p = marginal_cluster_pmf(hdp(3.0, 3.0), 12)
        adj = spike_slab_adjust(p, 1e-12)
        assert adj.tv_distance(p) < 1e-9

    def test_adjust_point_mass_at_one(self):
        p = LogPmf.from_probs(1, [1.0])
        for a in (0.1, 0.5, 0.9):
            assert spike_slab_adjust(p, a).probs() == pytest.approx([1.0])

    def test_adjust_two_cluster_enumeration(self):
        # latent D uniform on {1, 2}; observed law by direct enumeration:
        # D=1 -> 1 distinct; D=2 -> 1 distinct iff both atoms spike
        a = 0.5
        p = LogPmf.from_probs(1, [0.5, 0.5])
        adj = spike_slab_adjust(p, a)
        expect1 = 0.5 * 1.0 + 0.5 * a * a
        assert adj.probs() == pytest.approx([expect1, 1 - expect1])

    def test_mean_identity(self):
        for h in (hdp(3.0, 3.0), hpyp(0.25, 2.0, 0.25, 2.0), hgp(3.2, 290.0, 3.2, 290.0)):
            for n in (7, 20):
                p = marginal_cluster_pmf(h, n)
                for a in (0.1, 0.5, 0.9):
                    adj = spike_slab_adjust(p, a)
                    k = p.support.astype(float)
                    expect = 1 - np.sum((1 - a) ** k * p.probs()) + (1 - a) * p.mean()
                    assert adj.mean() == pytest.approx(expect, abs=1e-9)
                    assert adj.mean() <= p.mean() + 1e-12


class TestGroupedPartitionLaw:
    def test_single_observation(self):
        assert peppf_log(hdp(1.0, 1.0), [[1]]) == pytest.approx(0.0)

    def test_two_singletons_one_group(self):
        theta0, theta1 = 2.0, 3.0
        val = np.exp(peppf_log(hdp(theta0, theta1), [[1, 1]]))
        expect = (theta1 / (theta1 + 1)) * (theta0 / (theta0 + 1))
        assert val == pytest.approx(expect, rel=1e-12)

    @pytest.mark.parametrize("h", [hdp(2.0, 1.5), hpyp(0.3, 1.0, 0.25, 2.0),
                                   hgp(4.0, 7.0, 3.2, 290.0)],
                             ids=["hdp", "hpyp", "hgp"])
    @pytest.mark.parametrize("sizes", [(2, 1), (3,), (2, 2), (3, 2)])
    def test_normalizes_over_pooled_partitions(self, h, sizes):
        total = sum(np.exp(peppf_log(h, counts))
                    for _, counts in oracles.pooled_partitions_with_counts(sizes))
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_matches_direct_enumeration(self):
        h = hpyp(0.3, 1.0, 0.25, 2.0)

        def bottom(sizes):
            from hssm.partitions import BlockSizes
            return np.exp(eppf_log(h.bottom, BlockSizes(sizes)))

        def top(sizes):
            from hssm.partitions import BlockSizes
            return np.exp(eppf_log(h.top, BlockSizes(sizes)))

        for sizes in [(2, 2), (3, 1), (2, 2, 1)]:
            for _, counts in oracles.pooled_partitions_with_counts(sizes):
                direct = oracles.grouped_partition_prob_direct(bottom, top, sizes, counts)
                assert np.exp(peppf_log(h, counts)) == pytest.approx(direct, rel=1e-10)

    def test_guard(self):
        with pytest.raises(SizeError):
            peppf_log(hdp(1.0, 1.0), [[13]])
        with pytest.raises(ParamError):
            peppf_log(hdp(1.0, 1.0), [[1, 0], [1, 0]])


class TestFactories:
    def test_mixed_families_wire_correct_levels(self):
        h = hdpyp(3.3, 0.23, 2.0)
        assert h.top.sigma == 0.0 and h.bottom.sigma == 0.23
        h = hpydp(0.22, 2.0, 3.85)
        assert h.top.sigma == 0.22 and h.bottom.sigma == 0.0
        h = hgdp(14.4, 135.0, 3.3)
        assert h.top.family == "gnedin" and h.bottom.family == "pitman_yor"
        h = hgpyp(14.71, 130.0, 0.23, 2.0)
        assert h.top.family == "gnedin" and h.bottom.sigma == 0.23

    def test_base_measure_validation(self):
        with pytest.raises(ParamError):
            BaseMeasure.spike_slab(0.0)
        with pytest.raises(ParamError):
            BaseMeasure("bogus")

    def test_group_sizes_validation(self):
        with pytest.raises(SizeError):
            GroupSizes(())
        with pytest.raises(SizeError):
            GroupSizes((3, 0))
        g = GroupSizes((3, 4))
        assert g.I == 2 and g.total == 7

    def test_invalid_spec_rejected_at_construction(self):
        with pytest.raises(ParamError):
            HssmSpec(EppfSpec("pitman_yor", sigma=0.5, theta=-0.7),
                     EppfSpec.dirichlet(1.0))
