"""Frame synthesis: deterministic limits, moment oracles, dump format."""

import math

import numpy as np
import pytest

from bsrelay import mc, txsim
from bsrelay.statmodels import build_af_models, build_df_dest_models, build_df_relay_models
from bsrelay.sysmodel import ChannelRealization, SystemParams, substream
from oracles import ks_critical, ks_statistic

QUIET = dict(interference_relay_dbm=-300.0, interference_dest_dbm=-300.0,
             noise_relay_dbm=-300.0, noise_dest_dbm=-300.0)


def params_with(p1_dbm=13.0, **kw):
    return SystemParams(power_budget_dbm=20.0, power_slot1_dbm=p1_dbm, **kw)


class TestReflectionState:
    def test_from_default_params(self):
        params = SystemParams()
        refl = txsim.ReflectionState.from_params(params)
        assert refl.b0 == 0.0
        a = params.structural_mode
        assert refl.b1 == pytest.approx(a + abs(a) / a, rel=1e-12)
        assert refl.b_af == refl.b1

    def test_af_picks_larger_magnitude(self):
        params = SystemParams(gamma0=1.0 + 0j, gamma1=-1.0 + 0j)
        refl = txsim.ReflectionState.from_params(params)
        assert abs(refl.b_af) == max(abs(refl.b0), abs(refl.b1))
        assert refl.b_af == refl.b1

    def test_invariants(self):
        with pytest.raises(ValueError):
            txsim.ReflectionState(b0=1.0, b1=0.5, b_af=0.5, eta=0.9)
        with pytest.raises(ValueError):
            txsim.ReflectionState(b0=0.0, b1=1.0, b_af=1.0, eta=0.0)


class TestDeterministicLimits:
    def test_relay_rx_pure_signal(self):
        # no interference and no noise: every sample equals sqrt(P1) h_sr
        params = params_with(p1_dbm=0.0, **QUIET)
        channel = ChannelRealization(h_sr=1.0 + 0.0j, h_rd=1.0 + 0.0j)
        frame = txsim.synth_df_relay_rx(params, channel, 1, substream(0, 1))
        want = math.sqrt(params.power_slot1_watts)
        np.testing.assert_allclose(frame.samples, want, rtol=1e-12)
        frame0 = txsim.synth_df_relay_rx(params, channel, 0, substream(0, 1))
        np.testing.assert_allclose(frame0.samples, 0.0, atol=1e-15)

    def test_dest_rx_pure_carrier(self):
        params = params_with(p1_dbm=10.0, switching_loss_db=0.0,
                             gamma0=0.0 + 0j, gamma1=-0.3 + 0.4j,
                             structural_mode=0.7 + 0.0j, **QUIET)
        channel = ChannelRealization(h_sr=1.0 + 0.0j, h_rd=1.0 + 0.0j)
        frame = txsim.synth_df_dest_rx(params, channel, 1, substream(0, 2))
        p2 = params.power_budget_watts - params.power_slot1_watts
        b1 = params.structural_mode - params.gamma1_value
        np.testing.assert_allclose(frame.samples, math.sqrt(p2) * b1, rtol=1e-12)

    def test_dest_rx_zero_amplitude_bit(self):
        # matched low-bit load reflects nothing: only the local floor remains
        params = params_with()
        channel = ChannelRealization.unit_gains(params)
        rng = substream(4, 0)
        acc = []
        for _ in range(2000):
            frame = txsim.synth_df_dest_rx(params, channel, 0, rng)
            acc.append(np.mean(np.abs(frame.samples) ** 2))
        floor = params.interference_dest_watts + params.noise_dest_watts
        assert np.mean(acc) == pytest.approx(floor, rel=0.01)

    def test_af_deterministic(self):
        params = SystemParams(power_budget_dbm=20.0, switching_loss_db=0.0, **QUIET)
        channel = ChannelRealization(h_sr=1.0 + 0.0j, h_rd=1.0 + 0.0j)
        frame = txsim.synth_af_dest_rx(params, channel, 1, substream(0, 3))
        refl = txsim.ReflectionState.from_params(params)
        want = math.sqrt(params.power_budget_watts) * refl.b_af
        np.testing.assert_allclose(frame.samples, want, rtol=1e-12)
        frame0 = txsim.synth_af_dest_rx(params, channel, 0, substream(0, 3))
        np.testing.assert_allclose(frame0.samples, 0.0, atol=1e-15)


class TestMomentOracles:
    """Empirical mean power against the variance-sum oracles."""

    N_FRAMES = 40_000

    def _mean_power(self, synth, *args):
        # enough frames for ~1e6 samples, matching the stated oracle volume
        rng = substream(99, sum(synth.__name__.encode()))
        total = 0.0
        for _ in range(self.N_FRAMES):
            frame = synth(*args, rng)
            total += float(np.mean(np.abs(frame.samples) ** 2))
        return total / self.N_FRAMES

    def test_relay_bit0_floor(self):
        params = params_with()
        channel = ChannelRealization.unit_gains(params)
        got = self._mean_power(txsim.synth_df_relay_rx, params, channel, 0)
        want = params.interference_relay_watts + params.noise_relay_watts
        assert got == pytest.approx(want, rel=0.01)

    def test_relay_bit1_adds_signal(self):
        params = params_with()
        channel = ChannelRealization.unit_gains(params)
        got = self._mean_power(txsim.synth_df_relay_rx, params, channel, 1)
        want = (params.power_slot1_watts * abs(channel.h_sr) ** 2
                + params.interference_relay_watts + params.noise_relay_watts)
        assert got == pytest.approx(want, rel=0.01)

    def test_dest_bit1_matches_model_mean(self):
        params = params_with()
        channel = ChannelRealization.unit_gains(params)
        got = self._mean_power(txsim.synth_df_dest_rx, params, channel, 1)
        pair = build_df_dest_models(params, channel)
        assert got == pytest.approx(pair.mu1, rel=0.01)

    def test_af_bit1_matches_model_mean(self):
        params = SystemParams(power_budget_dbm=20.0)
        channel = ChannelRealization.unit_gains(params)
        got = self._mean_power(txsim.synth_af_dest_rx, params, channel, 1)
        pair = build_af_models(params, channel)
        assert got == pytest.approx(pair.mu1, rel=0.01)


class TestTestStatistic:
    def test_constant_frame(self):
        frame = txsim.SymbolFrame(samples=np.ones(25, dtype=complex),
                                  scheme="DF_slot1", true_bit=1)
        stat = txsim.test_statistic(frame)
        assert stat.value == 1.0
        assert stat.receiver == "relay"

    def test_two_sample_frame(self):
        frame = txsim.SymbolFrame(samples=np.array([0.0 + 0j, 2.0 + 0j]),
                                  scheme="AF", true_bit=0)
        assert txsim.test_statistic(frame).value == 2.0
        assert txsim.test_statistic(frame).receiver == "destination"

    def test_matches_brute_force(self):
        rng = np.random.default_rng(1)
        samples = rng.standard_normal(31) + 1j * rng.standard_normal(31)
        frame = txsim.SymbolFrame(samples=samples, scheme="DF_slot2", true_bit=1)
        want = sum(abs(s) ** 2 for s in samples) / 31
        assert txsim.test_statistic(frame).value == pytest.approx(want, rel=1e-12)

    def test_empty_frame_rejected(self):
        frame = txsim.SymbolFrame(samples=np.empty(0, dtype=complex),
                                  scheme="AF", true_bit=0)
        with pytest.raises(ValueError):
            txsim.test_statistic(frame)


class TestDistributionShape:
    """Statistic histograms against the per-bit distribution models."""

    N_FRAMES = 100_000

    def _psi(self, kernel, bit, n, seed):
        return mc.psi_samples(kernel, bit, self.N_FRAMES, n, substream(555, seed))

    def test_relay_bit0_gamma_shape(self):
        params = params_with()
        channel = ChannelRealization.unit_gains(params)
        pair = build_df_relay_models(params, channel)
        kernel = mc.df_relay_kernel(params, channel, params.power_slot1_watts)
        psi = self._psi(kernel, 0, params.samples_per_symbol, 1)
        model = pair.exact0
        assert np.mean(psi) == pytest.approx(model.mean, rel=0.005)
        assert np.var(psi) == pytest.approx(model.variance, rel=0.02)
        from bsrelay.statmodels import cdf
        stat = ks_statistic(psi, lambda v: cdf(model, v))
        assert stat < ks_critical(self.N_FRAMES, alpha=0.01)

    def test_relay_bit1_noncentral_shape(self):
        params = params_with()
        channel = ChannelRealization.unit_gains(params)
        pair = build_df_relay_models(params, channel)
        kernel = mc.df_relay_kernel(params, channel, params.power_slot1_watts)
        psi = self._psi(kernel, 1, params.samples_per_symbol, 2)
        model = pair.exact1
        assert np.mean(psi) == pytest.approx(model.mean, rel=0.005)
        assert np.var(psi) == pytest.approx(model.variance, rel=0.02)

    def test_af_bit0_statistically_identical_to_quiet_dest(self):
        # with no relay interference the reflect-only bit-0 frames match the
        # two-slot destination frames with a zero-amplitude load
        params = SystemParams(power_budget_dbm=20.0, power_slot1_dbm=13.0,
                              interference_relay_dbm=-300.0)
        channel = ChannelRealization.unit_gains(params)
        af = mc.af_kernel(params, channel)
        df = mc.df_dest_kernel(params, channel,
                               params.power_budget_watts - params.power_slot1_watts)
        n = params.samples_per_symbol
        psi_af = mc.psi_samples(af, 0, 50_000, n, substream(7, 1))
        psi_df = mc.psi_samples(df, 0, 50_000, n, substream(7, 2))
        # two-sample KS with the asymptotic critical value
        pooled = np.sort(np.concatenate([psi_af, psi_df]))
        cdf_a = np.searchsorted(np.sort(psi_af), pooled, side="right") / len(psi_af)
        cdf_b = np.searchsorted(np.sort(psi_df), pooled, side="right") / len(psi_df)
        stat = np.max(np.abs(cdf_a - cdf_b))
        crit = 1.6276 * math.sqrt(2.0 / 50_000)
        assert stat < crit


class TestFrameDump:
    def test_roundtrip(self, tmp_path):
        params = params_with()
        channel = ChannelRealization.unit_gains(params)
        rng = substream(1, 1)
        frames = [txsim.synth_df_relay_rx(params, channel, b, rng)
                  for b in (0, 1, 1, 0)]
        path = tmp_path / "frames.bin"
        txsim.dump_frames(path, frames, seed=77)
        loaded, seed = txsim.load_frames(path)
        assert seed == 77
        assert len(loaded) == 4
        for orig, back in zip(frames, loaded):
            assert back.scheme == orig.scheme
            assert back.true_bit == orig.true_bit
            np.testing.assert_array_equal(back.samples, orig.samples)

    def test_rejects_mixed_schemes(self, tmp_path):
        params = params_with()
        channel = ChannelRealization.unit_gains(params)
        rng = substream(1, 2)
        frames = [txsim.synth_df_relay_rx(params, channel, 0, rng),
                  txsim.synth_af_dest_rx(params, channel, 0, rng)]
        with pytest.raises(ValueError):
            txsim.dump_frames(tmp_path / "x.bin", frames)

    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ValueError):
            txsim.load_frames(path)
