"""Constructive witnesses of stability failure for periodic averaged rates.

When the scaled rate products are (pre)periodic with at least two
distinct values, all below one, no uniform shadowing bound exists: along
the resonant subsequence n = k*m + p (p the residue class realizing the
largest value) the accumulated perturbation sum S_n grows like
(K_q/K_p)^(k*m), so the distance between the constant-residual
pseudo-orbit and *any* true orbit is unbounded.

The witness generates that pseudo-orbit (r_n = epsilon for every n),
propagates the true orbit from b_1 = a_1, and records at every resonant
index the analytic lower bound, the partial sum S_n, and the distance
observed immediately after the resonant step is applied (the expanding
step at n is what makes |b_{n+1} - a_{n+1}| large).  Values beyond the
floating-point range are carried in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import HypothesisViolation
from .growth import Classification, ClassificationKind, PeriodicFit
from .systems import MapSystem, PolicyKind, PseudoOrbit, ResidualPolicy, generate_pseudo_orbit

#: Magnitudes past this are tracked in the log domain only.
LOG_DOMAIN_LIMIT = 1e300


def _log10_add(x: float, y: float) -> float:
    """log10(10^x + 10^y) without leaving the log domain."""
    if x == -math.inf:
        return y
    if y == -math.inf:
        return x
    hi, lo = (x, y) if x >= y else (y, x)
    return hi + math.log10(1.0 + 10.0 ** (lo - hi))


def divergence_lower_bound(
    K_p: float,
    K_q: float,
    p_idx: int,
    q_idx: int,
    m: int,
    C_p: float,
    k: int,
) -> float:
    """(K_q/K_p)^(k*m) * K_q^q / (C_p * K_p^(p+m)).

    Lower bound for the partial sum S_n at n = k*m + p.  Evaluated in
    the log domain; may return ``inf`` when the value exceeds the
    floating range (use :func:`divergence_lower_bound_log10` then).
    """
    return 10.0 ** divergence_lower_bound_log10(K_p, K_q, p_idx, q_idx, m, C_p, k)


def divergence_lower_bound_log10(
    K_p: float,
    K_q: float,
    p_idx: int,
    q_idx: int,
    m: int,
    C_p: float,
    k: int,
) -> float:
    if not K_q > K_p >= 1.0:
        raise HypothesisViolation(
            f"no divergence witness: need K_q > K_p >= 1, got K_p={K_p}, K_q={K_q}"
        )
    if m < 2 or k < 0 or C_p <= 0:
        raise ValueError("need m >= 2, k >= 0, C_p > 0")
    ln = (
        k * m * (math.log(K_q) - math.log(K_p))
        + q_idx * math.log(K_q)
        - math.log(C_p)
        - (p_idx + m) * math.log(K_p)
    )
    return ln / math.log(10.0)


@dataclass(frozen=True)
class WitnessSample:
    k: int
    n: int  # resonant index k*m + p
    lower_bound: float  # analytic lower bound for S_n (may be inf)
    S_n: float  # accumulated perturbation sum (may be inf)
    observed_error: float  # |b_{n+1} - a_{n+1}| after the resonant step
    log10_lower_bound: float
    log10_S_n: float
    log10_observed_error: float
    log_domain: bool  # observed value exceeded the float range


@dataclass(frozen=True)
class DivergenceWitness:
    m: int
    prefix: int
    p_idx: int
    q_idx: int
    K_p: float
    K_q: float
    C_p: float
    epsilon: float
    horizon: int
    samples: tuple
    pseudo: PseudoOrbit


def default_witness_horizon(
    K_p: float, K_q: float, p_idx: int, q_idx: int, m: int, C_p: float
) -> int:
    """Largest resonant index whose lower bound stays below 10^300."""
    k = 0
    while (
        divergence_lower_bound_log10(K_p, K_q, p_idx, q_idx, m, C_p, k + 1) < 300.0
    ):
        k += 1
    return k * m + p_idx + 1


def witness_divergence(
    sys: MapSystem,
    eps: float,
    horizon: Optional[int],
    cls: Classification,
) -> DivergenceWitness:
    """Build the constant-residual divergence witness for ``sys``.

    ``cls`` must be a periodic-below-one classification with at least
    two distinct rate factors.  Among the residue classes, the witness
    pairs the class of the largest value (smallest K_l) with the class
    maximizing K_q/K_p, which gives the fastest-growing lower bound.
    """
    if cls.kind is not ClassificationKind.PERIODIC_BELOW_ONE or cls.periodic is None:
        raise HypothesisViolation(
            f"classification is {cls.kind.value}, no witness"
        )
    fit: PeriodicFit = cls.periodic
    ks = fit.rate_factors
    p_pos = min(range(len(ks)), key=lambda i: ks[i])
    q_pos = max(range(len(ks)), key=lambda i: ks[i])
    K_p, K_q = ks[p_pos], ks[q_pos]
    if not K_q > K_p:
        raise HypothesisViolation("rate factors are all equal; no witness")
    p_idx, q_idx = p_pos + 1, q_pos + 1
    C_p = fit.constants[p_pos]
    m = fit.m
    if horizon is None:
        horizon = default_witness_horizon(K_p, K_q, p_idx, q_idx, m, C_p)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")

    policy = ResidualPolicy(kind=PolicyKind.CONSTANT_REAL)
    pseudo = generate_pseudo_orbit(sys, 1.0, eps, policy, horizon + 1)

    samples = []
    # propagate d_{n+1} = q_n d_n - r_n (b_1 = a_1) and the partial sum
    # T_n = T_{n-1} p_n + 1.  Once a value would exceed the float range
    # it is carried as its log10; the recurrences become log-domain adds
    # (the +1 and +eps terms stay significant after contracting steps,
    # so they cannot be dropped).  The log-domain distance update is
    # exact for positive real coefficients with constant-real residuals,
    # the case every built-in periodic-below-one family falls into.
    log10_eps = math.log10(eps) if eps > 0 else -math.inf
    d = 0j
    log10_d = -math.inf
    d_overflowed = False
    T = 0.0
    log10_T = -math.inf
    T_overflowed = False
    log10_limit = math.log10(LOG_DOMAIN_LIMIT)
    for n in range(1, horizon + 1):
        p_n = sys.growth_rate(n)
        lp10 = sys.log_growth_rate(n) / math.log(10.0)
        if not T_overflowed and T > 0.0 and (
            not math.isfinite(p_n) or math.log10(T) + lp10 > log10_limit
        ):
            T_overflowed = True
            log10_T = math.log10(T)
        if T_overflowed:
            log10_T = _log10_add(log10_T + lp10, 0.0)
        else:
            T = T * p_n + 1.0
        ad = abs(d)
        if not d_overflowed and ad > 0.0 and (
            not math.isfinite(p_n)
            or n > pseudo.horizon - 1
            or math.log10(ad) + lp10 > log10_limit
        ):
            d_overflowed = True
            log10_d = math.log10(ad)
        if d_overflowed:
            log10_d = _log10_add(log10_d + lp10, log10_eps)
        elif n <= pseudo.horizon - 1:
            q = sys.eval_q(n, pseudo.value(n) + d, pseudo.value(n))
            d = q * d - pseudo.residual(n)
        if n % m == p_idx % m and n > fit.prefix:
            k = (n - p_idx) // m
            if k < 1:
                continue
            lb_log10 = divergence_lower_bound_log10(K_p, K_q, p_idx, q_idx, m, C_p, k)
            obs_log10 = log10_d if d_overflowed else (
                math.log10(abs(d)) if abs(d) > 0 else -math.inf
            )
            samples.append(
                WitnessSample(
                    k=k,
                    n=n,
                    lower_bound=10.0**lb_log10 if lb_log10 < 300 else math.inf,
                    S_n=T if not T_overflowed else math.inf,
                    observed_error=abs(d) if not d_overflowed else math.inf,
                    log10_lower_bound=lb_log10,
                    log10_S_n=math.log10(T) if not T_overflowed else log10_T,
                    log10_observed_error=obs_log10,
                    log_domain=d_overflowed,
                )
            )
    return DivergenceWitness(
        m=m,
        prefix=fit.prefix,
        p_idx=p_idx,
        q_idx=q_idx,
        K_p=K_p,
        K_q=K_q,
        C_p=C_p,
        epsilon=eps,
        horizon=horizon,
        samples=tuple(samples),
        pseudo=pseudo,
    )
