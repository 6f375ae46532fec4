"""Geometric-average growth-rate analysis.

Products of per-step rates are accumulated as sums of logarithms: the
raw products over- or underflow doubles within a few dozen steps for the
built-in parity families.  The profile stores partial log-sums
L_n = sum_{j<=n} ln p_j and the averaged rates s_n = exp(L_n / n).

Classification distinguishes

* averages converging to a limit below one (stable, contracting regime),
* averages converging to a limit above one (stable, expanding regime),
* (pre)periodic scaled products with at least two distinct values below
  one (unstable regime), and
* everything else, reported as undetermined rather than guessed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .systems import MapSystem


@dataclass(frozen=True)
class GrowthProfile:
    """Partial log-products and averaged rates of a rate sequence."""

    log_partial: np.ndarray  # L_n = sum_{j=1..n} ln p_j, n = 1..horizon
    avg: np.ndarray  # s_n = exp(L_n / n)
    horizon: int

    def log_sum(self, n: int) -> float:
        """L_n, with L_0 = 0."""
        return 0.0 if n == 0 else float(self.log_partial[n - 1])


def build_profile(rates: Sequence[float]) -> GrowthProfile:
    """Accumulate a rate sequence into a :class:`GrowthProfile`."""
    arr = np.asarray(rates, dtype=float)
    if arr.size == 0:
        raise ValueError("rate sequence must be nonempty")
    if np.any(arr <= 0.0):
        raise ValueError("growth rate must be positive")
    log_partial = np.cumsum(np.log(arr))
    n = np.arange(1, arr.size + 1, dtype=float)
    avg = np.exp(log_partial / n)
    return GrowthProfile(log_partial=log_partial, avg=avg, horizon=arr.size)


def profile_of(sys: MapSystem, horizon: int) -> GrowthProfile:
    """Profile of a system's growth rates up to ``horizon``."""
    return build_profile(sys.rates(horizon))


class ClassificationKind(str, Enum):
    CONVERGENT_BELOW_ONE = "convergent_below_one"
    CONVERGENT_ABOVE_ONE = "convergent_above_one"
    PERIODIC_BELOW_ONE = "periodic_below_one"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class PeriodicFit:
    """Per-residue-class affine decomposition of the log-products.

    Along each residue class l of the period m (after discarding a
    prefix of length ``prefix``), the partial products factor as
    C_l * (1/K_l)^(n - prefix); equivalently the log-products are affine
    in n with slope -ln K_l and the class constant C_l read off the
    intercept.  ``values`` are the per-class averaged rates 1/K_l.
    """

    m: int
    prefix: int
    rate_factors: tuple  # K_l, l = 1..m
    constants: tuple  # C_l, l = 1..m
    max_residual: float

    @property
    def values(self) -> tuple:
        return tuple(1.0 / k for k in self.rate_factors)


@dataclass(frozen=True)
class AnalysisOptions:
    window: int = 32
    tol: float = 1e-4
    max_period: int = 8


@dataclass(frozen=True)
class Classification:
    kind: ClassificationKind
    K: Optional[float] = None
    periodic: Optional[PeriodicFit] = None


def detect_periodic_scaled(
    profile: GrowthProfile, max_period: int, tol: float
) -> Optional[PeriodicFit]:
    """Search for a (pre)periodic scaled-product structure.

    For each candidate period m (smallest first) and prefix length N
    (0 <= N <= horizon/4, smallest first), the log-products along every
    residue class n = km + l are fitted affinely in n.  A candidate is
    accepted when the worst per-class residual is below ``tol`` and at
    least two classes have genuinely different affine laws (slope or
    intercept differing by more than ``tol``); otherwise the sequence is
    a single geometric law and there is nothing periodic to report.
    """
    if max_period < 2:
        return None
    horizon = profile.horizon
    for m in range(2, max_period + 1):
        if horizon < 4 * m:
            break
        for prefix in range(0, horizon // 4 + 1):
            fit = _fit_period(profile, m, prefix, tol)
            if fit is not None:
                return fit
    return None


def _fit_period(
    profile: GrowthProfile, m: int, prefix: int, tol: float
) -> Optional[PeriodicFit]:
    horizon = profile.horizon
    L = profile.log_partial
    L_prefix = profile.log_sum(prefix)
    slopes = np.empty(m)
    intercepts = np.empty(m)
    max_residual = 0.0
    for l in range(1, m + 1):
        # absolute residue class: n = km + l, n > prefix
        start = l
        while start <= prefix:
            start += m
        ns = np.arange(start, horizon + 1, m, dtype=float)
        if ns.size < 2:
            return None
        ys = L[ns.astype(int) - 1]
        slope, intercept = np.polyfit(ns, ys, 1)
        resid = float(np.max(np.abs(ys - (slope * ns + intercept))))
        max_residual = max(max_residual, resid)
        if resid >= tol:
            return None
        slopes[l - 1] = slope
        intercepts[l - 1] = intercept
    # all classes collapsing onto one affine law is a plain geometric
    # sequence, not a periodic structure
    distinct = (np.ptp(slopes) > tol) or (np.ptp(intercepts) > tol)
    if not distinct:
        return None
    rate_factors = tuple(math.exp(-s) for s in slopes)
    # L_n = L_prefix + ln C_l - (n - prefix) ln K_l along class l
    constants = tuple(
        math.exp(intercepts[l] - L_prefix + prefix * slopes[l]) for l in range(m)
    )
    return PeriodicFit(
        m=m,
        prefix=prefix,
        rate_factors=rate_factors,
        constants=constants,
        max_residual=max_residual,
    )


def classify(
    profile: GrowthProfile,
    sys: Optional[MapSystem] = None,
    opts: AnalysisOptions = AnalysisOptions(),
) -> Classification:
    """Decide which stability regime a growth profile belongs to.

    ``sys`` is accepted for interface symmetry with the shadowing
    constructions; the decision is driven by the profile alone.

    An averaged rate within ``opts.tol`` of one is reported
    :attr:`ClassificationKind.UNDETERMINED`: no stability statement is
    available at exponential growth rate one.
    """
    if profile.horizon < 4 * opts.window:
        raise ValueError(
            f"profile horizon {profile.horizon} is shorter than "
            f"4*window = {4 * opts.window}"
        )
    tol = opts.tol
    fit = detect_periodic_scaled(profile, opts.max_period, tol)
    if fit is not None:
        ks = fit.rate_factors
        spread = (max(ks) - min(ks)) / min(ks)
        if spread > tol:
            if all(v < 1.0 - tol for v in fit.values):
                return Classification(
                    kind=ClassificationKind.PERIODIC_BELOW_ONE, periodic=fit
                )
            # distinct periodic values not all below one: outside every
            # covered regime
            return Classification(kind=ClassificationKind.UNDETERMINED, periodic=fit)
        # equal rate factors: a single geometric law in disguise
        lam = 1.0 / (sum(ks) / len(ks))
        return _from_limit(lam, tol)
    lam = _tail_limit(profile, opts)
    if lam is None:
        return Classification(kind=ClassificationKind.UNDETERMINED)
    return _from_limit(lam, tol)


def _from_limit(lam: float, tol: float) -> Classification:
    if lam < 1.0 - tol:
        return Classification(kind=ClassificationKind.CONVERGENT_BELOW_ONE, K=1.0 / lam)
    if lam > 1.0 + tol:
        return Classification(kind=ClassificationKind.CONVERGENT_ABOVE_ONE, K=lam)
    return Classification(kind=ClassificationKind.UNDETERMINED)


def _tail_limit(profile: GrowthProfile, opts: AnalysisOptions) -> Optional[float]:
    """Estimate lim s_n from the tail slope of the log-products.

    The slope is taken over a span of even length so that parity
    oscillations (ubiquitous in alternating systems) cancel exactly.
    Two consecutive spans must agree within ``opts.tol``; otherwise the
    tail has not stabilized.
    """
    horizon = profile.horizon
    w = 2 * opts.window
    w = min(w, (horizon - 1) // 2)
    w -= w % 2
    if w < 2:
        return None
    s1 = (profile.log_sum(horizon) - profile.log_sum(horizon - w)) / w
    s2 = (profile.log_sum(horizon - w) - profile.log_sum(horizon - 2 * w)) / w
    if abs(s1 - s2) > opts.tol:
        return None
    return math.exp(s1)


# -- ratio characterization ----------------------------------------------


def ratio_check(t: Sequence[float], K: float, n: int) -> float:
    """t_n K^n / sum_{j<n} t_j K^j, evaluated with K^n factored out.

    For positive t with t_n^(1/n) -> 1 and K > 1 this ratio tends to
    K - 1; the check is purely numerical, no limit is assumed.
    """
    if n < 2:
        raise ValueError(f"ratio_check needs n >= 2, got {n}")
    if len(t) < n:
        raise ValueError(f"need t_1..t_{n}, got {len(t)} values")
    if any(x <= 0 for x in t[:n]):
        raise ValueError("t must be positive")
    denom = 0.0
    for j in range(1, n):
        denom += t[j - 1] * K ** (j - n)
    return t[n - 1] / denom


# -- double-factorial envelope -------------------------------------------


def double_factorial_envelope(k: int) -> tuple[float, float, float]:
    """(1/sqrt(4k+1), (2k-1)!!/(2k)!!, 1/sqrt(3k+1)).

    The middle ratio is computed by direct product; the outer values
    bracket it for every k >= 1.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    value = 1.0
    for j in range(1, k + 1):
        value *= (2 * j - 1) / (2 * j)
    return (1.0 / math.sqrt(4 * k + 1), value, 1.0 / math.sqrt(3 * k + 1))


def double_factorial_envelope_holds(k_max: int) -> bool:
    """Exact integer check of the envelope for every k <= k_max.

    Maintains the ratio as an integer pair and compares squares by
    cross-multiplication, so the verdict carries no rounding at all.
    """
    num, den = 1, 1
    for k in range(1, k_max + 1):
        num *= 2 * k - 1
        den *= 2 * k
        num_sq = num * num
        den_sq = den * den
        if den_sq > num_sq * (4 * k + 1):  # value < 1/sqrt(4k+1)
            return False
        if num_sq * (3 * k + 1) > den_sq:  # value > 1/sqrt(3k+1)
            return False
    return True
