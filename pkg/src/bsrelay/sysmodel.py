"""System parameters, path loss, and the Rician channel generator.

Powers enter through the configuration boundary in dBm and are converted
once to linear watts; antenna gains and the switching loss are configured
in dB. Everything downstream of this module works in linear units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

__all__ = [
    "SystemParams",
    "ChannelRealization",
    "ConfigError",
    "dbm_to_watts",
    "watts_to_dbm",
    "db_to_linear",
    "linear_to_db",
    "path_loss",
    "draw_channel",
    "substream",
    "params_from_mapping",
    "params_to_mapping",
    "parse_config_text",
    "render_config_text",
    "REFLECTION_PRESETS",
]


class ConfigError(ValueError):
    """Raised for malformed or unknown configuration input."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0.0:
        raise ValueError(f"power must be positive, got {watts} W")
    return 10.0 * math.log10(watts) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    if value <= 0.0:
        raise ValueError(f"value must be positive, got {value}")
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class SystemParams:
    """All physical and protocol constants of one link-budget scenario.

    The defaults reproduce the baseline operating point used throughout the
    bundled experiments. `gamma0`/`gamma1` default to the matched-OOK pair:
    gamma0 equal to the structural mode (zero reflected amplitude for the
    low bit) and gamma1 the antipodal unit-magnitude coefficient.
    """

    carrier_frequency_hz: float = 915e6
    dist_sr_m: float = 15.0
    dist_rd_m: float = 15.0
    pathloss_exponent: float = 2.5
    rician_k: float = 4.0
    gain_tx_db: float = 6.0
    gain_relay_db: float = 1.5
    gain_dest_db: float = 0.0
    noise_relay_dbm: float = -110.0
    noise_dest_dbm: float = -110.0
    interference_relay_dbm: float = -70.0
    interference_dest_dbm: float = -90.0
    structural_mode: complex = 0.6047 + 0.5042j
    gamma0: complex | None = None
    gamma1: complex | None = None
    switching_loss_db: float = -1.1
    samples_per_symbol: int = 25
    power_budget_dbm: float = 20.0
    power_slot1_dbm: float | None = None
    relay_aperture_scale: float = 1.0

    def __post_init__(self):
        if self.carrier_frequency_hz <= 0:
            raise ValueError("carrier frequency must be positive")
        if self.dist_sr_m <= 0 or self.dist_rd_m <= 0:
            raise ValueError("distances must be positive")
        if self.rician_k < 0:
            raise ValueError("Rician K must be >= 0")
        if self.samples_per_symbol < 1:
            raise ValueError("samples_per_symbol must be >= 1")
        if self.relay_aperture_scale <= 0:
            raise ValueError("relay_aperture_scale must be positive")
        if abs(self.structural_mode) > 1.0 + 1e-12:
            raise ValueError("|structural_mode| must be <= 1")
        for name, g in (("gamma0", self.gamma0_value), ("gamma1", self.gamma1_value)):
            if abs(g) > 1.0 + 1e-12:
                raise ValueError(f"|{name}| must be <= 1, got {abs(g):.6g}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("switching loss must convert to a coefficient in (0, 1]")
        if self.power_slot1_dbm is not None:
            p1 = dbm_to_watts(self.power_slot1_dbm)
            if not 0.0 < p1 < self.power_budget_watts:
                raise ValueError("slot-1 power must satisfy 0 < P1 < budget")

    # --- derived linear-unit values -------------------------------------

    @property
    def gamma0_value(self) -> complex:
        return self.structural_mode if self.gamma0 is None else self.gamma0

    @property
    def gamma1_value(self) -> complex:
        if self.gamma1 is None:
            a = self.structural_mode
            return -abs(a) / a
        return self.gamma1

    @property
    def eta(self) -> float:
        """Backscatter switching loss as a linear coefficient."""
        return db_to_linear(self.switching_loss_db)

    @property
    def noise_relay_watts(self) -> float:
        return dbm_to_watts(self.noise_relay_dbm)

    @property
    def noise_dest_watts(self) -> float:
        return dbm_to_watts(self.noise_dest_dbm)

    @property
    def interference_relay_watts(self) -> float:
        return dbm_to_watts(self.interference_relay_dbm)

    @property
    def interference_dest_watts(self) -> float:
        return dbm_to_watts(self.interference_dest_dbm)

    @property
    def power_budget_watts(self) -> float:
        return dbm_to_watts(self.power_budget_dbm)

    @property
    def power_slot1_watts(self) -> float | None:
        if self.power_slot1_dbm is None:
            return None
        return dbm_to_watts(self.power_slot1_dbm)

    def with_slot1_watts(self, p1_watts: float) -> "SystemParams":
        return replace(self, power_slot1_dbm=watts_to_dbm(p1_watts))


@dataclass(frozen=True)
class ChannelRealization:
    """One coherence-period draw of the two channel coefficients."""

    h_sr: complex
    h_rd: complex
    seed_tag: int = 0

    @classmethod
    def unit_gains(cls, params: SystemParams) -> "ChannelRealization":
        """Deterministic channel with unit small-scale gain on both links."""
        return cls(h_sr=math.sqrt(path_loss(params, "SR")),
                   h_rd=math.sqrt(path_loss(params, "RD")))


def path_loss(params: SystemParams, which_link: str) -> float:
    """Linear power gain of one link, antenna gains included.

    The configured transmit and relay gains enter each hop of the
    backscatter chain; the destination gain (0 dB unless configured)
    additionally multiplies the RD hop, and the relay aperture scale
    multiplies the energy collected on the SR hop.
    """
    endpoint_gains = db_to_linear(params.gain_tx_db) * db_to_linear(params.gain_relay_db)
    if which_link == "SR":
        d = params.dist_sr_m
        gains = endpoint_gains * params.relay_aperture_scale
    elif which_link == "RD":
        d = params.dist_rd_m
        gains = endpoint_gains * db_to_linear(params.gain_dest_db)
    else:
        raise ValueError(f"which_link must be 'SR' or 'RD', got {which_link!r}")
    if d <= 0:
        raise ValueError("distance must be positive")
    wavelength = SPEED_OF_LIGHT / params.carrier_frequency_hz
    return gains * wavelength**2 / (d**params.pathloss_exponent * (4.0 * math.pi) ** 2)


def draw_channel(params: SystemParams, rng: np.random.Generator,
                 seed_tag: int = 0) -> ChannelRealization:
    """Draw one Rician coherence-period realization of both links.

    The small-scale component has real mean sqrt(K/(K+1)) and complex
    Gaussian scatter of total variance 1/(K+1); draws for the two links are
    independent and consumed in a fixed order (SR re, SR im, RD re, RD im).
    """
    k = params.rician_k
    mean = math.sqrt(k / (k + 1.0))
    scale = math.sqrt(0.5 / (k + 1.0))
    z = rng.standard_normal(4)
    hp_sr = mean + scale * (z[0] + 1j * z[1])
    hp_rd = mean + scale * (z[2] + 1j * z[3])
    return ChannelRealization(
        h_sr=math.sqrt(path_loss(params, "SR")) * hp_sr,
        h_rd=math.sqrt(path_loss(params, "RD")) * hp_rd,
        seed_tag=seed_tag,
    )


def substream(master_seed: int, *tags: int) -> np.random.Generator:
    """Independent generator stream derived from a master seed and tag path.

    Streams with distinct tag paths are statistically independent, so
    parallel workers can each own one without coordination.
    """
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, tags)]))


# ---------------------------------------------------------------------------
# configuration file schema
# ---------------------------------------------------------------------------

REFLECTION_PRESETS = {
    # matched load for the low bit (zero reflected amplitude), antipodal
    # unit-magnitude coefficient for the high bit
    "matched_ook": (None, None),
    # open / short circuit loads
    "open_short": (1.0 + 0.0j, -1.0 + 0.0j),
}

_FLOAT_KEYS = (
    "carrier_frequency_hz", "dist_sr_m", "dist_rd_m", "pathloss_exponent",
    "rician_k", "gain_tx_db", "gain_relay_db", "gain_dest_db",
    "noise_relay_dbm", "noise_dest_dbm", "interference_relay_dbm",
    "interference_dest_dbm", "switching_loss_db", "power_budget_dbm",
    "relay_aperture_scale",
)
_OPT_FLOAT_KEYS = ("power_slot1_dbm",)
_COMPLEX_KEYS = ("structural_mode",)
_OPT_COMPLEX_KEYS = ("gamma0", "gamma1")
_INT_KEYS = ("samples_per_symbol",)

PARAM_KEYS = frozenset(_FLOAT_KEYS + _OPT_FLOAT_KEYS + _COMPLEX_KEYS
                       + _OPT_COMPLEX_KEYS + _INT_KEYS + ("reflection_preset",))


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex value {text!r}") from exc


def params_from_mapping(mapping: Mapping[str, str]) -> SystemParams:
    """Build SystemParams from string key/value pairs; unknown keys are fatal."""
    unknown = set(mapping) - PARAM_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    kwargs = {}
    try:
        for key in _FLOAT_KEYS:
            if key in mapping:
                kwargs[key] = float(mapping[key])
        for key in _OPT_FLOAT_KEYS:
            if key in mapping:
                kwargs[key] = float(mapping[key])
        for key in _INT_KEYS:
            if key in mapping:
                kwargs[key] = int(mapping[key])
        for key in _COMPLEX_KEYS + _OPT_COMPLEX_KEYS:
            if key in mapping:
                kwargs[key] = _parse_complex(mapping[key])
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    if "reflection_preset" in mapping:
        preset = mapping["reflection_preset"]
        if preset not in REFLECTION_PRESETS:
            raise ConfigError(f"unknown reflection_preset {preset!r}; "
                              f"choose from {sorted(REFLECTION_PRESETS)}")
        g0, g1 = REFLECTION_PRESETS[preset]
        kwargs["gamma0"] = g0
        kwargs["gamma1"] = g1
    try:
        return SystemParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _format_value(value) -> str:
    if isinstance(value, complex):
        return repr(value).strip("()")
    return repr(value)


def params_to_mapping(params: SystemParams) -> dict[str, str]:
    """Serialize SystemParams to the flat key/value form used in config files."""
    out: dict[str, str] = {}
    for key in _FLOAT_KEYS:
        out[key] = _format_value(getattr(params, key))
    for key in _INT_KEYS:
        out[key] = _format_value(getattr(params, key))
    for key in _COMPLEX_KEYS:
        out[key] = _format_value(getattr(params, key))
    for key in _OPT_FLOAT_KEYS + _OPT_COMPLEX_KEYS:
        value = getattr(params, key)
        if value is not None:
            out[key] = _format_value(value)
    return out


def parse_config_text(text: str) -> dict[str, str]:
    """Parse `key = value` lines; '#' starts a comment; blank lines ignored."""
    result: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in result:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        result[key] = value
    return result


def render_config_text(mapping: Mapping[str, str]) -> str:
    return "".join(f"{key} = {value}\n" for key, value in sorted(mapping.items()))
