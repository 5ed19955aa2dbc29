"""Distribution models: parameter substitution, densities, moment matching."""

import math

import numpy as np
import pytest

from bsrelay import mc
from bsrelay.specfun import QuadratureSpec, composite_quadrature
from bsrelay.statmodels import (GammaModel, NcChiSqModel, cdf,
                                build_af_models, build_df_dest_models,
                                build_df_relay_models, log_pdf, sf)
from bsrelay.sysmodel import ChannelRealization, SystemParams, substream
from oracles import ncx2_density_cf

UNIT = ChannelRealization(h_sr=1.0 + 0.0j, h_rd=1.0 + 0.0j)


def unit_all_params(**kw):
    """Unit channels, unit-friendly loss-free relay for closed-form checks."""
    defaults = dict(power_budget_dbm=30.0, power_slot1_dbm=20.0,
                    switching_loss_db=0.0, structural_mode=0.5 + 0.0j,
                    gamma0=0.5 + 0.0j, gamma1=-0.5 + 0.0j)
    defaults.update(kw)
    return SystemParams(**defaults)


class TestRelayModels:
    def test_gaussian_pair_substitution(self):
        # sigma^2 = 1, 25 samples: floor model is (mean 1, variance 0.04)
        pair = build_df_relay_models(
            SystemParams(interference_relay_dbm=30.0, noise_relay_dbm=-3000.0,
                         power_budget_dbm=40.0, power_slot1_dbm=30.0),
            ChannelRealization(h_sr=1e-12, h_rd=1.0))
        assert pair.gauss0.mean == pytest.approx(1.0, rel=1e-10)
        assert pair.gauss0.variance == pytest.approx(0.04, rel=1e-10)

    def test_zero_signal_collapses_to_floor_model(self):
        params = SystemParams(power_budget_dbm=20.0, power_slot1_dbm=10.0)
        pair = build_df_relay_models(params, ChannelRealization(h_sr=0.0, h_rd=1.0))
        assert isinstance(pair.exact1, GammaModel)
        assert pair.exact1 == pair.exact0

    def test_floor_mean_is_linearized_sum(self):
        # -70 dBm interference plus -110 dBm noise, linearized and summed
        params = SystemParams(power_budget_dbm=20.0, power_slot1_dbm=10.0)
        pair = build_df_relay_models(params, UNIT)
        assert pair.mu0 == pytest.approx(1.0001e-10, rel=1e-6)

    def test_models_match_frame_moments(self):
        params = SystemParams(power_budget_dbm=20.0, power_slot1_dbm=13.0)
        channel = ChannelRealization.unit_gains(params)
        pair = build_df_relay_models(params, channel)
        kernel = mc.df_relay_kernel(params, channel, params.power_slot1_watts)
        psi = mc.psi_samples(kernel, 1, 60_000, params.samples_per_symbol,
                             substream(31, 1))
        assert np.mean(psi) == pytest.approx(pair.exact1.mean, rel=0.005)
        assert np.var(psi) == pytest.approx(pair.exact1.variance, rel=0.03)


class TestDestModels:
    def test_zero_amplitude_bit_is_gamma(self):
        params = SystemParams(power_budget_dbm=20.0, power_slot1_dbm=10.0)
        pair = build_df_dest_models(params, UNIT)
        n = params.samples_per_symbol
        floor = params.interference_dest_watts + params.noise_dest_watts
        assert isinstance(pair.exact0, GammaModel)
        assert pair.exact0.shape == n
        assert pair.exact0.scale == pytest.approx(floor / n, rel=1e-12)
        assert isinstance(pair.exact1, NcChiSqModel)

    def test_unit_substitution_mean(self):
        # eta 1, unit channels, high-bit amplitude 1: the statistic mean is
        # the slot-2 power plus every independent power term
        params = unit_all_params()
        pair = build_df_dest_models(params, UNIT)
        p2 = params.power_budget_watts - params.power_slot1_watts
        want = (p2 + params.interference_relay_watts
                + params.interference_dest_watts + params.noise_dest_watts)
        assert pair.mu1 == pytest.approx(want, rel=1e-12)

    def test_models_match_frame_moments(self):
        params = SystemParams(power_budget_dbm=20.0, power_slot1_dbm=10.0)
        channel = ChannelRealization.unit_gains(params)
        pair = build_df_dest_models(params, channel)
        p2 = params.power_budget_watts - params.power_slot1_watts
        kernel = mc.df_dest_kernel(params, channel, p2)
        psi = mc.psi_samples(kernel, 1, 60_000, params.samples_per_symbol,
                             substream(31, 2))
        assert np.mean(psi) == pytest.approx(pair.exact1.mean, rel=0.005)
        assert np.var(psi) == pytest.approx(pair.exact1.variance, rel=0.03)


class TestAfModels:
    def test_no_relay_interference_floor(self):
        params = SystemParams(power_budget_dbm=20.0, interference_relay_dbm=-3000.0)
        pair = build_af_models(params, UNIT)
        floor = params.interference_dest_watts + params.noise_dest_watts
        assert pair.sigma0_sq == pytest.approx(floor, rel=1e-12)

    def test_signal_power_substitution(self):
        # |B| = 1.5 with unit gains: the mean separation is 2.25x the budget
        params = unit_all_params(structural_mode=0.75 + 0.0j,
                                 gamma0=0.75 + 0.0j, gamma1=-0.75 + 0.0j)
        pair = build_af_models(params, UNIT)
        ps = params.power_budget_watts
        assert (pair.mu1 - pair.mu0) == pytest.approx(2.25 * ps, rel=1e-12)

    def test_models_match_frame_moments(self):
        params = SystemParams(power_budget_dbm=20.0)
        channel = ChannelRealization.unit_gains(params)
        pair = build_af_models(params, channel)
        kernel = mc.af_kernel(params, channel)
        psi = mc.psi_samples(kernel, 1, 60_000, params.samples_per_symbol,
                             substream(31, 3))
        assert np.mean(psi) == pytest.approx(pair.exact1.mean, rel=0.005)
        assert np.var(psi) == pytest.approx(pair.exact1.variance, rel=0.03)


class TestLogPdf:
    def test_exponential_special_case(self):
        assert log_pdf(GammaModel(1.0, 1.0), 0.5) == pytest.approx(-0.5, rel=1e-12)

    def test_central_reduction_matches_gamma(self):
        n = 25
        sigma_sq = 2.7e-10
        gamma = GammaModel(shape=float(n), scale=sigma_sq / n)
        central = NcChiSqModel(dof=2 * n, noncentrality=0.0,
                               scale=sigma_sq / (2 * n))
        for x in np.linspace(0.2, 3.0, 9) * sigma_sq:
            assert log_pdf(central, float(x)) == pytest.approx(
                log_pdf(gamma, float(x)), abs=1e-10)

    def test_against_cf_inversion_at_scale(self):
        # density at the high-bit mean for an operating-point model,
        # cross-checked by characteristic-function inversion
        params = SystemParams(power_budget_dbm=20.0, power_slot1_dbm=10.0)
        channel = ChannelRealization.unit_gains(params)
        pair = build_df_dest_models(params, channel)
        model = pair.exact1
        x = pair.mu1
        u = x / model.scale
        want = ncx2_density_cf(u, model.dof, model.noncentrality) / model.scale
        got = math.exp(log_pdf(model, x))
        assert got == pytest.approx(want, rel=1e-8)

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            log_pdf(GammaModel(2.0, 1.0), -0.1)

    def test_density_normalization(self):
        # each density integrates to one over mean +- 20 posterior widths
        params = SystemParams(power_budget_dbm=22.0, power_slot1_dbm=12.0)
        channel = ChannelRealization.unit_gains(params)
        cases = [build_df_relay_models(params, channel),
                 build_df_dest_models(params, channel),
                 build_af_models(params, channel)]
        spec = QuadratureSpec(node_count=20_000, kind="gauss8")
        for pair in cases:
            for model, gauss in ((pair.exact0, pair.gauss0),
                                 (pair.exact1, pair.gauss1)):
                lo = max(0.0, gauss.mean - 20.0 * math.sqrt(gauss.variance))
                hi = gauss.mean + 20.0 * math.sqrt(gauss.variance)

                def density(x):
                    return np.array([math.exp(log_pdf(model, float(v)))
                                     if v > 0 else 0.0 for v in x])

                total = composite_quadrature(density, lo, hi, spec)
                assert total == pytest.approx(1.0, abs=1e-6)


class TestMomentConsistency:
    def test_exact_and_gaussian_moments_agree(self):
        params = SystemParams(power_budget_dbm=24.0, power_slot1_dbm=11.0)
        channel = ChannelRealization.unit_gains(params)
        for pair in (build_df_relay_models(params, channel),
                     build_df_dest_models(params, channel),
                     build_af_models(params, channel)):
            for exact, gauss in ((pair.exact0, pair.gauss0),
                                 (pair.exact1, pair.gauss1)):
                assert exact.mean == pytest.approx(gauss.mean, rel=1e-10)
                assert exact.variance == pytest.approx(gauss.variance, rel=1e-10)

    def test_clt_regime_pointwise_agreement(self):
        # with many samples per symbol the exact and Gaussian densities agree
        # within 1% one posterior width around the mean
        params = SystemParams(power_budget_dbm=20.0, power_slot1_dbm=10.0,
                              samples_per_symbol=4000)
        channel = ChannelRealization.unit_gains(params)
        pair = build_df_relay_models(params, channel)
        model, gauss = pair.exact1, pair.gauss1
        sd = math.sqrt(gauss.variance)
        for x in (gauss.mean - sd, gauss.mean, gauss.mean + sd):
            exact_val = math.exp(log_pdf(model, x))
            gauss_val = (math.exp(-0.5 * (x - gauss.mean) ** 2 / gauss.variance)
                         / math.sqrt(2 * math.pi * gauss.variance))
            assert exact_val == pytest.approx(gauss_val, rel=0.01)


class TestDistributionFunctions:
    def test_cdf_sf_complement(self):
        params = SystemParams(power_budget_dbm=20.0, power_slot1_dbm=10.0)
        channel = ChannelRealization.unit_gains(params)
        pair = build_df_dest_models(params, channel)
        for model in (pair.exact0, pair.exact1):
            for frac in (0.5, 1.0, 1.5):
                x = model.mean * frac
                assert cdf(model, x) + sf(model, x) == pytest.approx(1.0, abs=1e-9)

    def test_cdf_matches_empirical(self):
        params = SystemParams(power_budget_dbm=20.0, power_slot1_dbm=13.0)
        channel = ChannelRealization.unit_gains(params)
        pair = build_df_relay_models(params, channel)
        kernel = mc.df_relay_kernel(params, channel, params.power_slot1_watts)
        psi = mc.psi_samples(kernel, 1, 40_000, params.samples_per_symbol,
                             substream(13, 5))
        x = float(np.quantile(psi, 0.3))
        want = float(np.mean(psi <= x))
        assert cdf(pair.exact1, x) == pytest.approx(want, abs=0.01)
