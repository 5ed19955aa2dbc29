"""Bulk Monte Carlo link simulation on top of the frame-power kernel.

Each receiver is reduced to a kernel description: a per-bit deterministic
sample value plus per-bit complex weights of the independent unit-variance
noise streams. One kernel call then produces the test statistic of many
symbol frames at once, on either the compiled or the numpy backend.

Random draw order is fixed and documented per function: a given seed
consumes identical random streams on both backends, and reruns within one
backend are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .sysmodel import ChannelRealization, SystemParams
from .thresholds import ThresholdSet
from .txsim import ReflectionState

__all__ = [
    "LinkKernel",
    "df_relay_kernel",
    "df_dest_kernel",
    "af_kernel",
    "psi_samples",
    "link_frame_powers",
    "simulate_df_errors",
    "simulate_af_errors",
    "THRESHOLD_KINDS",
]

THRESHOLD_KINDS = ("optimal", "gaussian", "simple")

_SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class LinkKernel:
    """Kernel-ready description of one receiver's per-sample statistics."""

    bases: np.ndarray  # complex (2,)
    coefs: np.ndarray  # complex (2, n_streams)

    @property
    def n_streams(self) -> int:
        return self.coefs.shape[1]


def df_relay_kernel(params: SystemParams, channel: ChannelRealization,
                    p1_watts: float) -> LinkKernel:
    # streams: relay interference, relay noise
    bases = np.array([0.0, math.sqrt(p1_watts) * channel.h_sr], dtype=complex)
    row = np.array([_SQRT_HALF * math.sqrt(params.interference_relay_watts),
                    _SQRT_HALF * math.sqrt(params.noise_relay_watts)], dtype=complex)
    return LinkKernel(bases=bases, coefs=np.vstack([row, row]))


def df_dest_kernel(params: SystemParams, channel: ChannelRealization,
                   p2_watts: float) -> LinkKernel:
    # streams: backscattered relay interference, destination interference,
    # destination noise; the first weight depends on the backscattered bit
    refl = ReflectionState.from_params(params)
    chain = refl.eta * channel.h_sr * channel.h_rd
    interf = refl.eta * math.sqrt(params.interference_relay_watts) * channel.h_rd
    bases = np.array([math.sqrt(p2_watts) * chain * refl.b0,
                      math.sqrt(p2_watts) * chain * refl.b1], dtype=complex)
    shared = [_SQRT_HALF * math.sqrt(params.interference_dest_watts),
              _SQRT_HALF * math.sqrt(params.noise_dest_watts)]
    coefs = np.array([[_SQRT_HALF * interf * refl.b0, *shared],
                      [_SQRT_HALF * interf * refl.b1, *shared]], dtype=complex)
    return LinkKernel(bases=bases, coefs=coefs)


def af_kernel(params: SystemParams, channel: ChannelRealization) -> LinkKernel:
    # streams: reflected relay interference, destination interference,
    # destination noise; the reflection amplitude is bit-independent
    refl = ReflectionState.from_params(params)
    gain = refl.eta * channel.h_rd * refl.b_af
    alpha = gain * math.sqrt(params.power_budget_watts) * channel.h_sr
    bases = np.array([0.0, alpha], dtype=complex)
    row = np.array([_SQRT_HALF * gain * math.sqrt(params.interference_relay_watts),
                    _SQRT_HALF * math.sqrt(params.interference_dest_watts),
                    _SQRT_HALF * math.sqrt(params.noise_dest_watts)], dtype=complex)
    return LinkKernel(bases=bases, coefs=np.vstack([row, row]))


def link_frame_powers(kernel: LinkKernel, bits: np.ndarray,
                      normals: np.ndarray) -> np.ndarray:
    """Per-frame test statistic on the active kernel backend."""
    return _kernels.frame_powers(kernel.bases, bits, kernel.coefs, normals)


_frame_powers = link_frame_powers


def psi_samples(kernel: LinkKernel, bit: int, n_frames: int, n_samples: int,
                rng: np.random.Generator) -> np.ndarray:
    """Test-statistic samples of `n_frames` frames carrying a fixed bit."""
    bits = np.full(n_frames, bit, dtype=np.uint8)
    normals = rng.standard_normal((n_frames, n_samples, 2 * kernel.n_streams))
    return _frame_powers(kernel, bits, normals)


def _decide(psi: np.ndarray, threshold: float, high_bit: int) -> np.ndarray:
    high = psi >= threshold
    if high_bit == 1:
        return high.astype(np.uint8)
    return (~high).astype(np.uint8)


def simulate_df_errors(params: SystemParams, channel: ChannelRealization,
                       p1_watts: float, relay_thresholds: ThresholdSet,
                       dest_thresholds: ThresholdSet, n_iterations: int,
                       n_symbols: int, rng: np.random.Generator,
                       kinds: tuple[str, ...] = THRESHOLD_KINDS,
                       ) -> tuple[dict[str, int], int]:
    """End-to-end two-timeslot error counts per threshold kind.

    Per iteration the draw order is: source bits, relay-receiver normals,
    destination-receiver normals. The destination statistic is formed for
    both possible backscattered bits on the same noise realization, then
    selected by each detector's relay decision, so all threshold kinds see
    identical physical randomness.
    """
    n = params.samples_per_symbol
    p2 = params.power_budget_watts - p1_watts
    relay = df_relay_kernel(params, channel, p1_watts)
    dest = df_dest_kernel(params, channel, p2)
    zeros = np.zeros(n_symbols, dtype=np.uint8)
    ones = np.ones(n_symbols, dtype=np.uint8)
    errors = {kind: 0 for kind in kinds}
    for _ in range(n_iterations):
        bits = rng.integers(0, 2, n_symbols, dtype=np.uint8)
        z_relay = rng.standard_normal((n_symbols, n, 2 * relay.n_streams))
        z_dest = rng.standard_normal((n_symbols, n, 2 * dest.n_streams))
        psi_r = _frame_powers(relay, bits, z_relay)
        psi_d0 = _frame_powers(dest, zeros, z_dest)
        psi_d1 = _frame_powers(dest, ones, z_dest)
        for kind in kinds:
            relay_hat = _decide(psi_r, relay_thresholds.get(kind),
                                relay_thresholds.bit_of_high_energy)
            psi_d = np.where(relay_hat == 1, psi_d1, psi_d0)
            dest_hat = _decide(psi_d, dest_thresholds.get(kind),
                               dest_thresholds.bit_of_high_energy)
            errors[kind] += int(np.count_nonzero(dest_hat != bits))
    return errors, n_iterations * n_symbols


def simulate_af_errors(params: SystemParams, channel: ChannelRealization,
                       thresholds: ThresholdSet, n_iterations: int,
                       n_symbols: int, rng: np.random.Generator,
                       kinds: tuple[str, ...] = THRESHOLD_KINDS,
                       ) -> tuple[dict[str, int], int]:
    """Single-timeslot error counts per threshold kind.

    Draw order per iteration: source bits, then destination-receiver
    normals.
    """
    n = params.samples_per_symbol
    kernel = af_kernel(params, channel)
    errors = {kind: 0 for kind in kinds}
    for _ in range(n_iterations):
        bits = rng.integers(0, 2, n_symbols, dtype=np.uint8)
        normals = rng.standard_normal((n_symbols, n, 2 * kernel.n_streams))
        psi = _frame_powers(kernel, bits, normals)
        for kind in kinds:
            hat = _decide(psi, thresholds.get(kind), thresholds.bit_of_high_energy)
            errors[kind] += int(np.count_nonzero(hat != bits))
    return errors, n_iterations * n_symbols
