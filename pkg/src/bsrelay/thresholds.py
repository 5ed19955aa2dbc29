"""Detection thresholds and the decision rule.

Three thresholds are supported, in decreasing order of required statistical
knowledge: the likelihood-crossing threshold solved on the exact log
densities, the closed-form threshold from the Gaussian approximation, and
the simple mid-mean threshold. The likelihood crossing is solved directly
on the log-pdf difference; the rearranged integral forms of the equality
are prone to overflow and add nothing over root finding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .statmodels import LinkStatPair, log_pdf

__all__ = [
    "ThresholdSet",
    "NoCrossing",
    "BracketFailure",
    "optimal_threshold",
    "gaussian_threshold",
    "simple_threshold",
    "detect",
]

RESIDUAL_TOL = 1e-10
MAX_EXPANSIONS = 60


class NoCrossing(RuntimeError):
    """The two densities are identical and never cross."""


class BracketFailure(RuntimeError):
    """No sign change found for the density crossing within the search range."""


@dataclass(frozen=True)
class ThresholdSet:
    """The three detection thresholds plus the energy-to-bit mapping."""

    t_optimal: float
    t_gaussian: float
    t_simple: float
    bit_of_high_energy: int

    def __post_init__(self):
        for name in ("t_optimal", "t_gaussian", "t_simple"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.bit_of_high_energy not in (0, 1):
            raise ValueError("bit_of_high_energy must be 0 or 1")

    def get(self, kind: str) -> float:
        try:
            return {"optimal": self.t_optimal, "gaussian": self.t_gaussian,
                    "simple": self.t_simple}[kind]
        except KeyError:
            raise ValueError(f"unknown threshold kind {kind!r}") from None

    @classmethod
    def from_pair(cls, pair: LinkStatPair) -> "ThresholdSet":
        return cls(
            t_optimal=optimal_threshold(pair),
            t_gaussian=gaussian_threshold(pair),
            t_simple=simple_threshold(pair),
            bit_of_high_energy=pair.bit_of_high_energy,
        )


def optimal_threshold(pair: LinkStatPair) -> float:
    """Crossing point of the two exact densities, by bracketed root finding.

    Bracketing starts on [min(mu0, mu1), max(mu0, mu1)] and expands
    geometrically while the endpoint signs agree. The root is refined by
    bisection with secant acceleration until the log-density residual is
    below 1e-10 or the bracket collapses to a few ulps.
    """
    if pair.exact0 == pair.exact1:
        raise NoCrossing("bit-0 and bit-1 models are identical")

    def diff(x: float) -> float:
        return log_pdf(pair.exact0, x) - log_pdf(pair.exact1, x)

    lo = min(pair.mu0, pair.mu1)
    hi = max(pair.mu0, pair.mu1)
    f_lo = diff(lo)
    f_hi = diff(hi)
    for _ in range(MAX_EXPANSIONS):
        if math.isfinite(f_lo) and math.isfinite(f_hi) and f_lo * f_hi < 0.0:
            break
        lo /= 1.7
        hi *= 1.7
        f_lo = diff(lo)
        f_hi = diff(hi)
    else:
        raise BracketFailure("no sign change after geometric bracket expansion")

    xtol = 1e-15 * max(pair.mu0, pair.mu1)
    x_prev, f_prev = lo, f_lo
    x_cur, f_cur = hi, f_hi
    for _ in range(200):
        # secant proposal, fall back to bisection when outside the bracket
        denom = f_cur - f_prev
        if denom != 0.0:
            x_new = x_cur - f_cur * (x_cur - x_prev) / denom
        else:
            x_new = 0.5 * (lo + hi)
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        f_new = diff(x_new)
        if abs(f_new) < RESIDUAL_TOL:
            return x_new
        if f_lo * f_new < 0.0:
            hi = x_new
        else:
            lo, f_lo = x_new, f_new
        x_prev, f_prev = x_cur, f_cur
        x_cur, f_cur = x_new, f_new
        if hi - lo < xtol:
            return 0.5 * (lo + hi)
    raise BracketFailure("root refinement did not converge")


def gaussian_threshold(pair: LinkStatPair) -> float:
    """Closed-form crossing of the two Gaussian approximations.

    Two candidate roots exist when the variances differ; the one on the
    high-mean side of the quadratic vertex separates the likelihoods the
    way a detector needs, so the sign is chosen by which mean is larger.
    Equal variances reduce to the mid-mean threshold.
    """
    mu0, mu1 = pair.mu0, pair.mu1
    v0 = pair.gauss0.variance
    v1 = pair.gauss1.variance
    dv = v0 - v1
    if abs(dv) < 1e-14 * v0:
        return 0.5 * (mu0 + mu1)
    vertex = (v0 * mu1 - v1 * mu0) / dv
    radicand = v0 * v1 * ((mu0 - mu1) ** 2 + dv * math.log(v0 / v1))
    root = math.sqrt(max(radicand, 0.0)) / abs(dv)
    return vertex + root if mu1 > mu0 else vertex - root


def gaussian_threshold_candidates(pair: LinkStatPair) -> tuple[float, float]:
    """Both quadratic roots (plus-sign, minus-sign) of the Gaussian crossing."""
    mu0, mu1 = pair.mu0, pair.mu1
    v0 = pair.gauss0.variance
    v1 = pair.gauss1.variance
    dv = v0 - v1
    if dv == 0.0:
        mid = 0.5 * (mu0 + mu1)
        return mid, mid
    vertex = (v0 * mu1 - v1 * mu0) / dv
    radicand = v0 * v1 * ((mu0 - mu1) ** 2 + dv * math.log(v0 / v1))
    root = math.sqrt(max(radicand, 0.0)) / abs(dv)
    return vertex + root, vertex - root


def simple_threshold(pair: LinkStatPair) -> float:
    """Average of the two statistic means; needs no variance knowledge."""
    return (pair.mu0 + pair.mu1) / 2.0


def detect(psi, threshold: float, bit_of_high_energy: int) -> int:
    """Energy detection decision; ties resolve to the high-energy bit."""
    if threshold <= 0.0:
        raise ValueError("threshold must be positive")
    value = getattr(psi, "value", psi)
    if value >= threshold:
        return bit_of_high_energy
    return 1 - bit_of_high_energy
