import numpy as np
import pytest
from scipy.special import gammaln

from hssm.asymptotics import (
    PyFamilyKind,
    asym_marginal_moment,
    diversity_scaling,
    hgp_limit_pmf,
    hpygp_limit_pmf,
    ml_tilted_moment,
)
from hssm.cluster_counts import hpyp, marginal_cluster_pmf
from hssm.errors import ParamError, SizeError
from hssm.partitions import EppfSpec, block_count_pmf, gnedin_rho, gnedin_rho_vector

import oracles


class TestMlTiltedMoment:
    def test_untilted_closed_form(self):
        for sigma in (0.25, 0.5, 0.8):
            for p in (0.5, 1.0, 3.0):
                expect = np.exp(gammaln(p + 1) - gammaln(p * sigma + 1))
                assert ml_tilted_moment(sigma, 0.0, p) == pytest.approx(expect, rel=1e-12)

    def test_half_stable_first_moment(self):
        assert ml_tilted_moment(0.5, 0.0, 1.0) == pytest.approx(2 / np.sqrt(np.pi), rel=1e-12)

    def test_against_quadrature_oracle_untilted(self):
        # moment of the density itself, via the integral representation
        for sigma, p in [(0.5, 1.0), (0.5, 2.0), (0.25, 1.0), (0.7, 1.5)]:
            quad_val = oracles.ml_moment_quad(sigma, p)
            assert ml_tilted_moment(sigma, 0.0, p) == pytest.approx(quad_val, rel=1e-6)

    def test_against_quadrature_oracle_tilted(self):
        # tilting by s^(theta/sigma) turns the moment into a higher untilted one
        sigma, theta, p = 0.25, 29.9, 1.0
        q = p + theta / sigma
        logc = gammaln(theta + 1) - gammaln(theta / sigma + 1)
        quad_val = np.exp(logc) * oracles.ml_moment_quad(sigma, q)
        assert ml_tilted_moment(sigma, theta, p) == pytest.approx(quad_val, rel=1e-4)

    def test_density_series_vs_integral_representation(self):
        for s in (0.5, 2.0, 5.0):
            assert oracles.ml_density(s, 0.25) == pytest.approx(
                oracles.ml_series_mpmath(s, 0.25), rel=1e-9)

    def test_parameter_regime(self):
        with pytest.raises(ParamError):
            ml_tilted_moment(0.0, 1.0, 1.0)
        with pytest.raises(ParamError):
            ml_tilted_moment(0.5, -0.6, 1.0)
        with pytest.raises(ParamError):
            ml_tilted_moment(0.5, 1.0, 0.0)


class TestAsymMoment:
    def test_hdp_direct_value(self):
        f = PyFamilyKind.hdp(43.3, 43.3)
        assert asym_marginal_moment(f, 50, 1.0) == pytest.approx(
            43.3 * np.log(np.log(50.0)), rel=1e-12)

    def test_hdpyp_direct_value(self):
        f = PyFamilyKind.hdpyp(30.0, 0.25, 30.0)
        assert asym_marginal_moment(f, 100, 1.0) == pytest.approx(
            0.25 * 30.0 * np.log(100.0), rel=1e-12)

    def test_hpyp_is_scaled_product_of_moments(self):
        f = PyFamilyKind.hpyp(0.25, 29.9, 0.25, 29.9)
        expect = (50.0 ** 0.0625 * ml_tilted_moment(0.25, 29.9, 1.0)
                  * ml_tilted_moment(0.25, 29.9, 0.25))
        assert asym_marginal_moment(f, 50, 1.0) == pytest.approx(expect, rel=1e-12)

    def test_hpydp_formula(self):
        f = PyFamilyKind.hpydp(0.3, 2.0, 5.0)
        r = 2.0
        expect = (np.log(200.0) ** (r * 0.3)) * 5.0 ** (r * 0.3) \
            * ml_tilted_moment(0.3, 2.0, r)
        assert asym_marginal_moment(f, 200, r) == pytest.approx(expect, rel=1e-12)

    def test_small_n_guard(self):
        with pytest.raises(SizeError):
            asym_marginal_moment(PyFamilyKind.hdp(1.0, 1.0), 2, 1.0)

    def test_ratio_to_exact_shrinks(self):
        h = hpyp(0.25, 29.9, 0.25, 29.9)
        f = PyFamilyKind.hpyp(0.25, 29.9, 0.25, 29.9)
        gaps = []
        for n in (50, 200, 500):
            exact = marginal_cluster_pmf(h, n).mean()
            gaps.append(abs(exact / asym_marginal_moment(f, n, 1.0) - 1.0))
        assert gaps[0] > gaps[1] > gaps[2]


class TestDiversityScaling:
    def test_values(self):
        assert diversity_scaling(PyFamilyKind.hpyp(0.5, 1.0, 0.5, 1.0), 16) == pytest.approx(2.0)
        n_ee = int(round(np.exp(np.e)))
        assert diversity_scaling(PyFamilyKind.hdp(1.0, 1.0), n_ee) == pytest.approx(
            np.log(np.log(n_ee)))
        assert diversity_scaling(PyFamilyKind.hdpyp(1.0, 0.5, 1.0), int(np.exp(2.0) + 0.5)) \
            == pytest.approx(0.5 * np.log(round(np.exp(2.0))), rel=1e-6)
        assert diversity_scaling(PyFamilyKind.hpydp(0.5, 1.0, 1.0), 20) == pytest.approx(
            np.log(20.0) ** 0.5)

    def test_kind_validation(self):
        with pytest.raises(ParamError):
            PyFamilyKind.hpyp(0.0, 1.0, 0.5, 1.0)
        with pytest.raises(ParamError):
            PyFamilyKind("bogus")


class TestGnedinLimits:
    def test_matches_component_law(self):
        p = hpygp_limit_pmf(3.2, 290.0, 50)
        for m in range(1, 51):
            assert np.exp(p.log_mass[m - 1]) == pytest.approx(
                gnedin_rho(3.2, 290.0, m), abs=1e-10)

    def test_first_mass_is_norm_constant(self):
        from hssm.partitions import gnedin_log_norm_constant
        p = hpygp_limit_pmf(15.0, 1450.0, 5)
        assert p.log_mass[0] == pytest.approx(gnedin_log_norm_constant(15.0, 1450.0))

    def test_partial_sums(self):
        # the tail of the (15, 1450) law crosses 1e-6 only around m ~ 520
        p200 = hpygp_limit_pmf(15.0, 1450.0, 200)
        assert p200.total_mass() == pytest.approx(0.99282, abs=1e-4)
        p1000 = hpygp_limit_pmf(15.0, 1450.0, 1000)
        assert p1000.total_mass() >= 1 - 1e-6
        assert p1000.total_mass() <= 1 + 1e-9

    def test_hgp_composition_identity(self):
        # independent route: mix the bottom component law with the top
        # block-count law at each component count
        g0, z0, g1, z1 = 15.0, 1450.0, 15.0, 1450.0
        p = hgp_limit_pmf(g0, z0, g1, z1, 60)
        rho = gnedin_rho_vector(g1, z1)
        top = EppfSpec.gnedin(g0, z0)
        m_max = min(rho.size, 1500)
        from hssm.partitions import block_count_log_matrix
        Q = np.exp(block_count_log_matrix(top, m_max)[1:, 1:])
        compose = rho[:m_max] @ Q
        mine = np.exp(p.log_mass)
        assert np.abs(mine / compose[:60] - 1.0).max() < 1e-9

    def test_hgp_asymmetric_parameters(self):
        # independent route: mix the bottom component law (complex-gamma form)
        # with the top block-count law evaluated directly per component count
        g0, z0 = 13.5, 140.0
        p = hgp_limit_pmf(g0, z0, 3.2, 290.0, 40)
        rho = gnedin_rho_vector(3.2, 290.0)
        m = np.arange(1.0, rho.size + 1.0)
        i = np.arange(1.0, rho.size)
        lognum = np.concatenate([[0.0], np.cumsum(np.log(i * i - g0 * i + z0))])
        logden = np.concatenate([[0.0], np.cumsum(np.log(i * i + g0 * i + z0))])
        mine = np.exp(p.log_mass)
        for k in range(1, 41):
            mm = m[k - 1 :]
            log_q = (gammaln(mm) - gammaln(float(k)) - gammaln(mm - k + 1)
                     + gammaln(mm + 1) - gammaln(k + 1.0)
                     + gammaln(g0 + mm - k) - gammaln(g0)
                     + lognum[k - 1] - logden[(mm - 1).astype(int)])
            compose_k = float(np.sum(rho[k - 1 :] * np.exp(log_q)))
            assert mine[k - 1] == pytest.approx(compose_k, rel=1e-8)

    def test_top_root_forces_single_cluster(self):
        # top quadratic root at k0 = 1: 1 - gamma0 + zeta0 = 0
        p = hgp_limit_pmf(4.0, 3.0, 15.0, 1450.0, 10)
        probs = np.exp(p.log_mass)
        assert probs[0] == pytest.approx(1.0, abs=1e-9)
        assert probs[1:].max() == 0.0

    def test_partial_sums_monotone_and_bounded(self):
        p = hgp_limit_pmf(15.0, 1450.0, 15.0, 1450.0, 120)
        probs = np.exp(p.log_mass)
        assert np.all(probs >= 0)
        partial = np.cumsum(probs)
        assert np.all(np.diff(partial) >= 0)
        assert partial[-1] <= 1 + 1e-9

    def test_rejects_bad_sizes(self):
        with pytest.raises(SizeError):
            hpygp_limit_pmf(3.2, 290.0, 0)
