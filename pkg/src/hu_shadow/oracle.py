"""Independent ground truth: exact rational orbits and brute-force search.

These routines deliberately avoid the analytic constructions they are
used to validate.  ``exact_propagate`` and ``exact_difference`` run the
recurrences in :class:`fractions.Fraction` arithmetic, so their output
carries no rounding at all; ``best_b1_search`` finds a near-optimal
shadowing start point by refined grid evaluation, an upper bound on the
true optimum by construction.

Exact arithmetic is restricted to the linear families with rational
parameters and real rational data; the sinusoid family is transcendental
and has no rational orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import UnsupportedFamily
from .systems import MapSystem, PolicyKind, PseudoOrbit, ResidualPolicy


@dataclass(frozen=True)
class RationalOrbit:
    """Exact pseudo-orbit data: values, rate products and partial sums.

    ``a[i]`` is a_{i+1}; ``coefficient_products[i]`` is prod_{j<=i+1} c_j;
    ``partial_sums[i]`` is S_{i+1} = sum_{j<=i+1} prod_{j<i'<=i+1} p_i'.
    """

    a: tuple
    coefficient_products: tuple
    partial_sums: tuple

    def value(self, n: int) -> Fraction:
        return self.a[n - 1]

    def product(self, n: int) -> Fraction:
        return self.coefficient_products[n - 1]

    def partial_sum(self, n: int) -> Fraction:
        return self.partial_sums[n - 1]


def _rational_coefficients(sys: MapSystem, horizon: int) -> list[Fraction]:
    if not sys.is_linear:
        raise UnsupportedFamily(
            "exact arithmetic is only available for linear families"
        )
    return [sys.rational_coefficient(n) for n in range(1, horizon + 1)]


def exact_propagate(
    sys: MapSystem,
    a1: Fraction,
    eps: Fraction,
    horizon: int,
    policy: Optional[ResidualPolicy] = None,
) -> RationalOrbit:
    """Exact pseudo-orbit a_{n+1} = c_n a_n + r_n with constant residuals.

    Supported policies are constant-real and zero; others have no exact
    rational form.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if policy is None:
        policy = ResidualPolicy(kind=PolicyKind.CONSTANT_REAL)
    coeffs = _rational_coefficients(sys, horizon)
    a = [Fraction(a1)]
    products = []
    sums = []
    prod = Fraction(1)
    S = Fraction(0)
    for n in range(1, horizon + 1):
        c = coeffs[n - 1]
        prod *= c
        p = abs(c)
        S = S * p + 1
        products.append(prod)
        sums.append(S)
        if n < horizon:
            a.append(c * a[-1] + policy.rational_residual(n, Fraction(eps)))
    return RationalOrbit(
        a=tuple(a), coefficient_products=tuple(products), partial_sums=tuple(sums)
    )


def exact_difference(
    sys: MapSystem,
    a1: Fraction,
    b1: Fraction,
    residuals: Sequence[Fraction],
    horizon: int,
) -> list[Fraction]:
    """d_n = b_n - a_n by exact direct propagation of both orbits."""
    coeffs = _rational_coefficients(sys, horizon)
    a = Fraction(a1)
    b = Fraction(b1)
    out = [b - a]
    for n in range(1, horizon):
        a = coeffs[n - 1] * a + Fraction(residuals[n - 1])
        b = coeffs[n - 1] * b
        out.append(b - a)
    return out


def exact_telescope(
    sys: MapSystem,
    a1: Fraction,
    b1: Fraction,
    residuals: Sequence[Fraction],
    n: int,
) -> Fraction:
    """The telescoped form of d_n, exactly.

    (prod_{j<n} c_j)(b_1 - a_1) - sum_{j<n} r_j prod_{j<i<n} c_i; for a
    linear family the quotients are the coefficients themselves.
    """
    coeffs = _rational_coefficients(sys, n)
    prod = Fraction(1)
    acc = Fraction(0)
    for j in range(1, n):
        c = coeffs[j - 1]
        prod *= c
        acc = acc * c + Fraction(residuals[j - 1])
    return prod * (Fraction(b1) - Fraction(a1)) - acc


# -- brute-force start-point search ---------------------------------------


@dataclass(frozen=True)
class SearchRegion:
    center: complex
    radius: float


def sup_error_for_start(
    sys: MapSystem, pseudo: PseudoOrbit, b1: complex, horizon: int
) -> float:
    """sup_{n<=horizon} |b_n - a_n| for the true orbit started at b1."""
    b = complex(b1)
    worst = abs(b - pseudo.value(1))
    for n in range(1, min(horizon, pseudo.horizon)):
        b = sys.eval_map(n, b)
        worst = max(worst, abs(b - pseudo.value(n + 1)))
    return worst


def best_b1_search(
    sys: MapSystem,
    pseudo: PseudoOrbit,
    horizon: int,
    region: SearchRegion,
    grid: int = 64,
    refinements: int = 6,
) -> tuple[complex, float]:
    """Grid search for the start point minimizing the sup shadowing error.

    A ``grid`` x ``grid`` evaluation over the square enclosing the disk,
    followed by ``refinements`` rounds of 4x zoom around the incumbent.
    The incumbent is carried between rounds, so the reported sup error
    never increases; the result is an upper bound on the true optimum.
    """
    if grid < 2 or refinements < 0:
        raise ValueError("need grid >= 2 and refinements >= 0")
    center = complex(region.center)
    radius = float(region.radius)
    best_b1 = center
    best_err = sup_error_for_start(sys, pseudo, center, horizon)
    for _ in range(refinements + 1):
        res = np.linspace(center.real - radius, center.real + radius, grid)
        ims = np.linspace(center.imag - radius, center.imag + radius, grid)
        for re in res:
            for im in ims:
                cand = complex(re, im)
                err = sup_error_for_start(sys, pseudo, cand, horizon)
                if err < best_err:
                    best_err = err
                    best_b1 = cand
        center = best_b1
        radius /= 4.0
    return best_b1, best_err


def refined_cell_size(region: SearchRegion, grid: int, refinements: int) -> float:
    """Grid spacing of the final refinement round."""
    return (2.0 * region.radius / (grid - 1)) / 4.0**refinements
