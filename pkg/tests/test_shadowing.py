"""Shadowing constructions, closed-form bounds and the telescoping identity."""

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hu_shadow import (
    HypothesisViolation,
    PolicyKind,
    ResidualPolicy,
    ShadowMethod,
    ShadowOptions,
    accumulated_rate_bound,
    affine_sinusoid,
    bounded_factor_expanding_bound,
    early_index_bound,
    exact_propagate,
    generate_pseudo_orbit,
    index_scaled_linear,
    periodic_linear,
    perturbation_partial_sum,
    power_two_parity,
    shadow_contracting,
    shadow_expanding,
    telescope_difference,
    uniform_contraction_bound,
)

SQRT_3_2 = math.sqrt(1.5)


class TestClosedFormBounds:
    def test_uniform_bound_values(self):
        # p = 1/2, gap 0: the bound is eps * (2 - 2^(2-n))
        assert uniform_contraction_bound(0.5, 1, 1e-3, 0.0) == 0.0
        assert uniform_contraction_bound(0.5, 3, 1e-3, 0.0) == pytest.approx(1.5e-3)
        assert uniform_contraction_bound(0.5, 2, 0.0, 1.0) == pytest.approx(0.5)

    def test_uniform_bound_rejects_expansion(self):
        with pytest.raises(HypothesisViolation):
            uniform_contraction_bound(1.5, 5, 1e-3, 0.0)

    def test_accumulated_bound_matches_exact_partial_sum(self):
        # frozen from the exact rational oracle: S_4 = 20/9 for rates
        # (2, 1/3, 2, 1/3, ...)
        sys = periodic_linear()
        rates = sys.rates(10)
        assert accumulated_rate_bound(rates, 5, 1e-3, 0.0) == pytest.approx(
            float(Fraction(20, 9)) * 1e-3, rel=1e-12
        )
        orbit = exact_propagate(sys, Fraction(1), Fraction(1, 1000), 10)
        for n in range(2, 11):
            expected = float(orbit.partial_sum(n - 1)) * 1e-3
            assert accumulated_rate_bound(rates, n, 1e-3, 0.0) == pytest.approx(
                expected, rel=1e-12
            )

    def test_partial_sum_recurrence(self):
        rates = [2.0, 0.5, 3.0]
        assert perturbation_partial_sum(rates, 1) == 1.0
        assert perturbation_partial_sum(rates, 2) == 1.5
        assert perturbation_partial_sum(rates, 3) == 5.5

    @given(
        rates=st.lists(st.floats(0.1, 3.0), min_size=4, max_size=40),
        eps=st.floats(0, 1e-2),
        gap=st.floats(0, 1e-2),
    )
    def test_accumulated_bound_monotone_in_inputs(self, rates, eps, gap):
        n = len(rates)
        base = accumulated_rate_bound(rates, n, eps, gap)
        assert base >= 0
        assert accumulated_rate_bound(rates, n, eps * 2, gap) >= base
        assert accumulated_rate_bound(rates, n, eps, gap * 2) >= base

    def test_bounded_factor_bound(self):
        assert bounded_factor_expanding_bound(1.0, 2.0, 3.0, 1e-3) == pytest.approx(1e-3)
        with pytest.raises(HypothesisViolation):
            bounded_factor_expanding_bound(1.0, 2.0, 0.9, 1e-3)

    def test_early_index_bound_positive_and_validated(self):
        rates = index_scaled_linear().rates(30)
        val = early_index_bound(rates, 3, 20, SQRT_3_2, 1e-3)
        assert val > 0
        with pytest.raises(ValueError):
            early_index_bound(rates, 20, 3, SQRT_3_2, 1e-3)


class TestTelescopeIdentity:
    @settings(max_examples=40, deadline=None)
    @given(
        b1=st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
        seed=st.integers(0, 2**31),
    )
    def test_matches_direct_propagation(self, b1, seed):
        rng = random.Random(seed)
        sys = periodic_linear()
        pseudo = generate_pseudo_orbit(
            sys,
            complex(rng.uniform(-2, 2), rng.uniform(-2, 2)),
            1e-3,
            ResidualPolicy(kind=PolicyKind.LOW_DISCREPANCY_PHASE),
            40,
        )
        b = complex(b1)
        for n in range(1, 41):
            direct = b - pseudo.value(n)
            tele = telescope_difference(sys, pseudo, b1, n)
            assert abs(tele - direct) <= 1e-10 * max(1.0, abs(direct))
            if n < 40:
                b = sys.eval_map(n, b)

    def test_nonlinear_identity(self):
        sys = affine_sinusoid()
        pseudo = generate_pseudo_orbit(sys, 1.0, 1e-3, ResidualPolicy(), 15)
        b1 = 1.001
        b = complex(b1)
        for n in range(1, 15):
            b = sys.eval_map(n, b)
        direct = b - pseudo.value(15)
        tele = telescope_difference(sys, pseudo, b1, 15)
        assert abs(tele - direct) <= 1e-9 * max(1.0, abs(direct))


class TestContracting:
    def test_frozen_sup_difference(self):
        # the alternating partial sums reach 9, so the sup error is 9*eps
        sys = periodic_linear()
        pseudo = generate_pseudo_orbit(sys, 1.0, 1e-3, ResidualPolicy(), 200)
        result = shadow_contracting(sys, pseudo, SQRT_3_2)
        assert result.method is ShadowMethod.CONTRACTING_DIRECT
        assert result.sup_diff == pytest.approx(9e-3, rel=1e-9)
        assert result.meta.sound_bound == pytest.approx(9e-3, rel=1e-9)
        assert result.bound == pytest.approx(SQRT_3_2 / (SQRT_3_2 - 1) * 1e-3)

    def test_b_is_true_orbit(self):
        sys = periodic_linear()
        pseudo = generate_pseudo_orbit(sys, 1.0, 1e-3, ResidualPolicy(), 100)
        result = shadow_contracting(sys, pseudo, SQRT_3_2)
        assert result.meta.residual_sup == 0.0
        assert result.b[0] == pseudo.value(1)

    def test_sup_within_sound_bound(self):
        sys = periodic_linear()
        for theta in (0.0, 1.0, 2.5):
            policy = ResidualPolicy(kind=PolicyKind.CONSTANT_PHASE, theta=theta)
            pseudo = generate_pseudo_orbit(sys, 1.0, 1e-3, policy, 150)
            result = shadow_contracting(sys, pseudo, SQRT_3_2)
            assert result.sup_diff <= result.meta.sound_bound * 1.05 + 1e-15

    def test_zero_epsilon_is_exact(self):
        sys = periodic_linear()
        pseudo = generate_pseudo_orbit(
            sys, 1.0, 0.0, ResidualPolicy(kind=PolicyKind.ZERO), 100
        )
        result = shadow_contracting(sys, pseudo, SQRT_3_2)
        assert result.sup_diff == 0.0

    def test_requires_K_above_one(self):
        sys = periodic_linear()
        pseudo = generate_pseudo_orbit(sys, 1.0, 1e-3, ResidualPolicy(), 100)
        with pytest.raises(HypothesisViolation):
            shadow_contracting(sys, pseudo, 0.9)


class TestExpanding:
    def test_alternating_linear_true_orbit(self):
        sys = index_scaled_linear()
        pseudo = generate_pseudo_orbit(sys, 1.0, 1e-3, ResidualPolicy(), 60)
        result = shadow_expanding(sys, pseudo, SQRT_3_2)
        assert result.method is ShadowMethod.EXPANDING_TAIL_SERIES
        assert result.meta.residual_sup <= 1e-9
        assert result.meta.iterations == 1
        assert result.meta.truncation >= 60

    def test_nonlinear_fixed_point(self):
        sys = affine_sinusoid()
        pseudo = generate_pseudo_orbit(sys, 1.0, 1e-3, ResidualPolicy(), 100)
        result = shadow_expanding(sys, pseudo, 3.0)
        assert result.meta.iterations <= 20
        assert result.meta.residual_sup <= 1e-9
        assert result.sup_diff <= 2e-3 / math.log(3.0) * (1 + 1e-3)
        assert result.bound_ok

    def test_zero_epsilon_gives_pseudo_orbit_back(self):
        sys = affine_sinusoid()
        pseudo = generate_pseudo_orbit(
            sys, 1.0, 0.0, ResidualPolicy(kind=PolicyKind.ZERO), 50
        )
        result = shadow_expanding(sys, pseudo, 3.0)
        assert result.sup_diff == 0.0
        assert result.b == pseudo.a

    def test_truncation_tracks_tail_fraction(self):
        sys = index_scaled_linear()
        pseudo = generate_pseudo_orbit(sys, 1.0, 1e-3, ResidualPolicy(), 40)
        coarse = shadow_expanding(
            sys, pseudo, SQRT_3_2, ShadowOptions(tail_fraction=1e-1)
        )
        fine = shadow_expanding(
            sys, pseudo, SQRT_3_2, ShadowOptions(tail_fraction=1e-6)
        )
        assert fine.meta.truncation >= coarse.meta.truncation

    def test_differences_stable_under_truncation_refinement(self):
        sys = index_scaled_linear()
        pseudo = generate_pseudo_orbit(sys, 1.0, 1e-3, ResidualPolicy(), 40)
        a = shadow_expanding(sys, pseudo, SQRT_3_2, ShadowOptions(tail_fraction=1e-3))
        b = shadow_expanding(sys, pseudo, SQRT_3_2, ShadowOptions(tail_fraction=1e-8))
        diff = max(abs(x - y) for x, y in zip(a.d, b.d))
        assert diff <= 1e-3 * a.bound

    def test_requires_K_above_one(self):
        sys = index_scaled_linear()
        pseudo = generate_pseudo_orbit(sys, 1.0, 1e-3, ResidualPolicy(), 40)
        with pytest.raises(HypothesisViolation):
            shadow_expanding(sys, pseudo, 1.0)

    @settings(max_examples=15, deadline=None)
    @given(theta=st.floats(0, 2 * math.pi), eps=st.floats(1e-6, 1e-3))
    def test_expanding_orbit_residual_property(self, theta, eps):
        sys = index_scaled_linear()
        policy = ResidualPolicy(kind=PolicyKind.CONSTANT_PHASE, theta=theta)
        pseudo = generate_pseudo_orbit(sys, 1.0, eps, policy, 40)
        result = shadow_expanding(sys, pseudo, SQRT_3_2)
        assert result.meta.residual_sup <= 1e-9


class TestOverflowDiscipline:
    def test_telescope_overflow_raises(self):
        # quotient products of 1e150 per step leave the float range by
        # n = 4; the zero pseudo-orbit itself stays representable
        sys = periodic_linear((1e150,))
        pseudo = generate_pseudo_orbit(
            sys, 0.0, 0.0, ResidualPolicy(kind=PolicyKind.ZERO), 10
        )
        with pytest.raises(OverflowError):
            telescope_difference(sys, pseudo, 1.0, 5)
