"""Exact and Gaussian-approximated distribution models of the test statistic.

Each receiver/bit combination yields either a gamma model (no deterministic
signal component) or a scaled noncentral chi-squared model. The noncentral
variate is stored in canonical form (degrees of freedom, noncentrality)
together with an explicit scale mapping it to the physical test statistic,
so the change of variable is applied in exactly one place.

Naming note: several second-order symbols are overloaded in the standard
derivations. Here `sigma0_sq`/`sigma1_sq` always denote the per-bit power
parameter of the exact models (interference plus noise, plus any reflected
interference), while the Gaussian models carry their own `variance` field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .specfun import log_bessel_i, marcum_q, reg_gamma_lower
from .sysmodel import ChannelRealization, SystemParams
from .txsim import ReflectionState

__all__ = [
    "GammaModel",
    "NcChiSqModel",
    "GaussianModel",
    "LinkStatPair",
    "build_df_relay_models",
    "build_df_dest_models",
    "build_af_models",
    "log_pdf",
    "cdf",
    "sf",
]

# below this signal-to-noise floor the noncentral pdf is numerically
# indistinguishable from the central one and divides by ~zero; use gamma
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class GammaModel:
    shape: float
    scale: float

    def __post_init__(self):
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError("gamma shape and scale must be positive")

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def variance(self) -> float:
        return self.shape * self.scale**2


@dataclass(frozen=True)
class NcChiSqModel:
    """Scaled noncentral chi-squared: statistic = scale * X, X ~ NC(dof, nc)."""

    dof: int
    noncentrality: float
    scale: float

    def __post_init__(self):
        if self.dof < 2 or self.dof % 2:
            raise ValueError("dof must be a positive even integer")
        if self.noncentrality < 0:
            raise ValueError("noncentrality must be >= 0")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @property
    def mean(self) -> float:
        return self.scale * (self.dof + self.noncentrality)

    @property
    def variance(self) -> float:
        return self.scale**2 * (2.0 * self.dof + 4.0 * self.noncentrality)


@dataclass(frozen=True)
class GaussianModel:
    mean: float
    variance: float

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError("variance must be positive")


ExactModel = Union[GammaModel, NcChiSqModel]


@dataclass(frozen=True)
class LinkStatPair:
    """Bit-0/bit-1 statistic models for one receiver under one scheme."""

    exact0: ExactModel
    exact1: ExactModel
    gauss0: GaussianModel
    gauss1: GaussianModel
    alpha0: complex
    alpha1: complex
    beta0: complex
    beta1: complex
    sigma0_sq: float
    sigma1_sq: float
    n_samples: int

    @property
    def mu0(self) -> float:
        return self.gauss0.mean

    @property
    def mu1(self) -> float:
        return self.gauss1.mean

    @property
    def bit_of_high_energy(self) -> int:
        return 1 if self.mu1 >= self.mu0 else 0


def _exact_model(alpha_sq: float, sigma_sq: float, n: int) -> ExactModel:
    if alpha_sq < DEGENERACY_TOL * sigma_sq:
        return GammaModel(shape=float(n), scale=sigma_sq / n)
    return NcChiSqModel(dof=2 * n,
                        noncentrality=2.0 * n * alpha_sq / sigma_sq,
                        scale=sigma_sq / (2.0 * n))


def _gauss_pair(alpha0_sq: float, alpha1_sq: float, sigma0_sq: float,
                sigma1_sq: float, n: int) -> tuple[GaussianModel, GaussianModel]:
    g0 = GaussianModel(mean=alpha0_sq + sigma0_sq,
                       variance=(sigma0_sq**2 + 2.0 * alpha0_sq * sigma0_sq) / n)
    g1 = GaussianModel(mean=alpha1_sq + sigma1_sq,
                       variance=(sigma1_sq**2 + 2.0 * alpha1_sq * sigma1_sq) / n)
    return g0, g1


def build_df_relay_models(params: SystemParams, channel: ChannelRealization,
                          p_slot1_watts: float | None = None) -> LinkStatPair:
    """Statistic models at the relay during the first timeslot.

    Bit 0 sees interference plus noise only; bit 1 adds the deterministic
    data signal, yielding the noncentral model.
    """
    p1 = params.power_slot1_watts if p_slot1_watts is None else p_slot1_watts
    if p1 is None:
        raise ValueError("slot-1 power is required for the first-timeslot models")
    n = params.samples_per_symbol
    sigma_sq = params.interference_relay_watts + params.noise_relay_watts
    alpha1 = math.sqrt(p1) * channel.h_sr
    a1_sq = abs(alpha1) ** 2
    g0, g1 = _gauss_pair(0.0, a1_sq, sigma_sq, sigma_sq, n)
    return LinkStatPair(
        exact0=_exact_model(0.0, sigma_sq, n),
        exact1=_exact_model(a1_sq, sigma_sq, n),
        gauss0=g0, gauss1=g1,
        alpha0=0.0 + 0.0j, alpha1=alpha1, beta0=0.0 + 0.0j, beta1=0.0 + 0.0j,
        sigma0_sq=sigma_sq, sigma1_sq=sigma_sq, n_samples=n,
    )


def build_df_dest_models(params: SystemParams, channel: ChannelRealization,
                         p_slot2_watts: float | None = None) -> LinkStatPair:
    """Statistic models at the destination during the backscatter timeslot."""
    if p_slot2_watts is None:
        p1 = params.power_slot1_watts
        if p1 is None:
            raise ValueError("slot powers are required for the second-timeslot models")
        p_slot2_watts = params.power_budget_watts - p1
    refl = ReflectionState.from_params(params)
    n = params.samples_per_symbol
    floor = params.interference_dest_watts + params.noise_dest_watts
    chain = refl.eta * channel.h_sr * channel.h_rd
    interf = refl.eta * math.sqrt(params.interference_relay_watts) * channel.h_rd
    alphas = [math.sqrt(p_slot2_watts) * chain * b for b in (refl.b0, refl.b1)]
    betas = [interf * b for b in (refl.b0, refl.b1)]
    sigmas = [abs(b) ** 2 + floor for b in betas]
    a_sq = [abs(a) ** 2 for a in alphas]
    g0, g1 = _gauss_pair(a_sq[0], a_sq[1], sigmas[0], sigmas[1], n)
    return LinkStatPair(
        exact0=_exact_model(a_sq[0], sigmas[0], n),
        exact1=_exact_model(a_sq[1], sigmas[1], n),
        gauss0=g0, gauss1=g1,
        alpha0=alphas[0], alpha1=alphas[1], beta0=betas[0], beta1=betas[1],
        sigma0_sq=sigmas[0], sigma1_sq=sigmas[1], n_samples=n,
    )


def build_af_models(params: SystemParams, channel: ChannelRealization) -> LinkStatPair:
    """Statistic models at the destination under the reflect-only scheme.

    The relay amplitude is constant, so the interference-plus-noise power
    parameter is common to both bits; only the deterministic component
    distinguishes them.
    """
    refl = ReflectionState.from_params(params)
    n = params.samples_per_symbol
    alpha = (refl.eta * math.sqrt(params.power_budget_watts)
             * channel.h_sr * channel.h_rd * refl.b_af)
    beta = refl.eta * math.sqrt(params.interference_relay_watts) * channel.h_rd * refl.b_af
    sigma_sq = (abs(beta) ** 2 + params.interference_dest_watts
                + params.noise_dest_watts)
    a_sq = abs(alpha) ** 2
    g0, g1 = _gauss_pair(0.0, a_sq, sigma_sq, sigma_sq, n)
    return LinkStatPair(
        exact0=_exact_model(0.0, sigma_sq, n),
        exact1=_exact_model(a_sq, sigma_sq, n),
        gauss0=g0, gauss1=g1,
        alpha0=0.0 + 0.0j, alpha1=alpha, beta0=beta, beta1=beta,
        sigma0_sq=sigma_sq, sigma1_sq=sigma_sq, n_samples=n,
    )


# ---------------------------------------------------------------------------
# densities and distribution functions
# ---------------------------------------------------------------------------

def log_pdf(model: ExactModel, x: float) -> float:
    """Natural log of the model density at x (log-domain throughout)."""
    x = float(x)
    if x < 0.0 or math.isnan(x):
        raise ValueError(f"x must be >= 0, got {x}")
    if isinstance(model, GammaModel):
        return _gamma_log_pdf(model.shape, model.scale, x)
    if model.noncentrality == 0.0:
        # central reduction: chi-squared(dof) is gamma(dof/2, 2 scale)
        return _gamma_log_pdf(model.dof / 2.0, 2.0 * model.scale, x)
    u = x / model.scale
    lam = model.noncentrality
    nu = model.dof // 2 - 1
    if u == 0.0:
        return -math.inf if model.dof > 2 else math.log(0.5) - 0.5 * lam - math.log(model.scale)
    log_fx = (-math.log(2.0) - 0.5 * (u + lam)
              + 0.5 * nu * (math.log(u) - math.log(lam))
              + log_bessel_i(nu, math.sqrt(lam * u)))
    return log_fx - math.log(model.scale)


def _gamma_log_pdf(shape: float, scale: float, x: float) -> float:
    if x == 0.0:
        if shape > 1.0:
            return -math.inf
        if shape == 1.0:
            return -math.log(scale)
        return math.inf
    return ((shape - 1.0) * math.log(x) - x / scale
            - math.lgamma(shape) - shape * math.log(scale))


def cdf(model: ExactModel, x: float) -> float:
    """P(statistic <= x) from the exact model."""
    x = float(x)
    if x <= 0.0:
        return 0.0
    if isinstance(model, GammaModel):
        return reg_gamma_lower(model.shape, x / model.scale)
    if model.noncentrality == 0.0:
        return reg_gamma_lower(model.dof / 2.0, 0.5 * x / model.scale)
    return 1.0 - sf(model, x)


def sf(model: ExactModel, x: float) -> float:
    """P(statistic > x) from the exact model."""
    x = float(x)
    if x <= 0.0:
        return 1.0
    if isinstance(model, GammaModel):
        return 1.0 - reg_gamma_lower(model.shape, x / model.scale)
    order = model.dof // 2
    return marcum_q(order, math.sqrt(model.noncentrality),
                    math.sqrt(x / model.scale))
