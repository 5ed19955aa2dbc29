"""Baseband sample synthesis and the energy-detection test statistic.

Frames are generated one data symbol at a time: interference and noise are
regenerated i.i.d. for every sample of every frame, with no temporal
correlation. These synthesized frames are the physical ground truth against
which every analytical distribution in the package is validated.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sysmodel import ChannelRealization, SystemParams

__all__ = [
    "ReflectionState",
    "SymbolFrame",
    "TestStatistic",
    "synth_df_relay_rx",
    "synth_df_dest_rx",
    "synth_af_dest_rx",
    "test_statistic",
    "dump_frames",
    "load_frames",
]

SCHEMES = ("DF_slot1", "DF_slot2", "AF")


@dataclass(frozen=True)
class ReflectionState:
    """Reflected baseband amplitudes derived from the load coefficients.

    b0/b1 are the per-bit amplitudes (structural mode minus reflection
    coefficient); b_af is the single amplitude used by the non-decoding
    scheme, which always selects the larger-magnitude choice.
    """

    b0: complex
    b1: complex
    b_af: complex
    eta: float

    @classmethod
    def from_params(cls, params: SystemParams) -> "ReflectionState":
        a = params.structural_mode
        b0 = a - params.gamma0_value
        b1 = a - params.gamma1_value
        b_af = b0 if abs(b0) > abs(b1) else b1
        return cls(b0=b0, b1=b1, b_af=b_af, eta=params.eta)

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must be in (0, 1]")
        if not math.isclose(abs(self.b_af), max(abs(self.b0), abs(self.b1)),
                            rel_tol=1e-12, abs_tol=0.0):
            raise ValueError("b_af must have the larger magnitude of b0/b1")


@dataclass(frozen=True)
class SymbolFrame:
    """Received samples of one receiver over one data symbol."""

    samples: np.ndarray  # complex128, length N
    scheme: str
    true_bit: int

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.true_bit not in (0, 1):
            raise ValueError("true_bit must be 0 or 1")


@dataclass(frozen=True)
class TestStatistic:
    """Average received power over the samples of one frame."""

    value: float
    receiver: str  # 'relay' or 'destination'

    def __post_init__(self):
        if self.value < 0.0:
            raise ValueError("test statistic cannot be negative")


def _cn_samples(rng: np.random.Generator, n: int, power: float) -> np.ndarray:
    """n i.i.d. circular complex Gaussian samples of total variance `power`."""
    z = rng.standard_normal((n, 2))
    return math.sqrt(0.5 * power) * (z[:, 0] + 1j * z[:, 1])


def synth_df_relay_rx(params: SystemParams, channel: ChannelRealization,
                      bit: int, rng: np.random.Generator) -> SymbolFrame:
    """First-timeslot frame at the relay: data signal plus interference and noise."""
    p1 = params.power_slot1_watts
    if p1 is None:
        raise ValueError("power_slot1_dbm must be set to synthesize the first timeslot")
    n = params.samples_per_symbol
    signal = math.sqrt(p1) * channel.h_sr * bit
    y = (signal
         + _cn_samples(rng, n, params.interference_relay_watts)
         + _cn_samples(rng, n, params.noise_relay_watts))
    return SymbolFrame(samples=y, scheme="DF_slot1", true_bit=bit)


def synth_df_dest_rx(params: SystemParams, channel: ChannelRealization,
                     relay_bit: int, rng: np.random.Generator) -> SymbolFrame:
    """Second-timeslot frame at the destination, backscattered by the relay.

    The relay reflects the carrier plus its own received interference with
    the amplitude selected by `relay_bit`; destination interference and
    noise are drawn from streams uncorrelated with the relay's.
    """
    p1 = params.power_slot1_watts
    if p1 is None:
        raise ValueError("power_slot1_dbm must be set to split the power budget")
    p2 = params.power_budget_watts - p1
    n = params.samples_per_symbol
    refl = ReflectionState.from_params(params)
    b = refl.b1 if relay_bit else refl.b0
    carrier = math.sqrt(p2) * channel.h_sr
    relay_interf = _cn_samples(rng, n, params.interference_relay_watts)
    y = (refl.eta * channel.h_rd * (carrier + relay_interf) * b
         + _cn_samples(rng, n, params.interference_dest_watts)
         + _cn_samples(rng, n, params.noise_dest_watts))
    return SymbolFrame(samples=y, scheme="DF_slot2", true_bit=relay_bit)


def synth_af_dest_rx(params: SystemParams, channel: ChannelRealization,
                     bit: int, rng: np.random.Generator) -> SymbolFrame:
    """Single-timeslot frame at the destination under immediate reflection.

    The relay contributes no thermal noise of its own: the received signal
    and interference are reflected as-is with the constant larger-magnitude
    amplitude.
    """
    ps = params.power_budget_watts
    n = params.samples_per_symbol
    refl = ReflectionState.from_params(params)
    gain = refl.eta * channel.h_rd * refl.b_af
    signal = gain * math.sqrt(ps) * channel.h_sr * bit
    y = (signal
         + gain * _cn_samples(rng, n, params.interference_relay_watts)
         + _cn_samples(rng, n, params.interference_dest_watts)
         + _cn_samples(rng, n, params.noise_dest_watts))
    return SymbolFrame(samples=y, scheme="AF", true_bit=bit)


def test_statistic(frame: SymbolFrame) -> TestStatistic:
    """Average power over the frame's samples."""
    if len(frame.samples) == 0:
        raise ValueError("cannot form a test statistic from an empty frame")
    value = float(np.mean(np.abs(frame.samples) ** 2))
    receiver = "relay" if frame.scheme == "DF_slot1" else "destination"
    return TestStatistic(value=value, receiver=receiver)


# ---------------------------------------------------------------------------
# debug frame dump (little-endian interleaved re/im doubles)
# ---------------------------------------------------------------------------

_MAGIC = b"BSFD"
_VERSION = 1
_SCHEME_TAGS = {name: i for i, name in enumerate(SCHEMES)}
_HEADER = struct.Struct("<4sHHIq")  # magic, version, scheme tag, N, seed


def dump_frames(path, frames: Sequence[SymbolFrame], seed: int = 0) -> None:
    """Write frames of a single scheme/length to a versioned binary file."""
    if not frames:
        raise ValueError("no frames to dump")
    scheme = frames[0].scheme
    n = len(frames[0].samples)
    if any(f.scheme != scheme or len(f.samples) != n for f in frames):
        raise ValueError("all dumped frames must share one scheme and length")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, _SCHEME_TAGS[scheme], n, seed))
        for frame in frames:
            fh.write(struct.pack("<B", frame.true_bit))
            fh.write(np.asarray(frame.samples, dtype="<c16").tobytes())


def load_frames(path) -> tuple[list[SymbolFrame], int]:
    """Read a frame dump; returns (frames, seed)."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        magic, version, scheme_tag, n, seed = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise ValueError(f"not a frame dump file (magic {magic!r})")
        if version != _VERSION:
            raise ValueError(f"unsupported frame dump version {version}")
        scheme = SCHEMES[scheme_tag]
        frames = []
        rec_size = 1 + 16 * n
        while True:
            rec = fh.read(rec_size)
            if not rec:
                break
            if len(rec) != rec_size:
                raise ValueError("truncated frame record")
            bit = rec[0]
            samples = np.frombuffer(rec[1:], dtype="<c16").copy()
            frames.append(SymbolFrame(samples=samples, scheme=scheme, true_bit=bit))
    return frames, seed
