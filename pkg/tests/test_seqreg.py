import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedyspaces.seqreg import (
    PositiveSequence,
    Weight,
    doubling_ratio,
    dual_sequence,
    essentially_increasing_ratio,
    lrp_witness,
    parse_positive_sequence,
    parse_weight,
    power_sequence,
    primitive,
    running_max_monotone,
    urp_condition_c,
    urp_witness,
)

positive_floats = st.floats(
    min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False
)


class TestTypes:
    def test_positive_sequence_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            PositiveSequence([1.0, 0.0])
        with pytest.raises(ValueError):
            PositiveSequence([])

    def test_weight_allows_interior_zeros_but_not_w1(self):
        w = Weight.from_weights([1.0, 0.0, 0.0])
        assert w.primitive_values.tolist() == [1.0, 1.0, 1.0]
        with pytest.raises(ValueError):
            Weight.from_weights([0.0, 1.0])
        with pytest.raises(ValueError):
            Weight.from_weights([1.0, -0.5])

    def test_primitive_weight_consistency_is_exact(self):
        rng = np.random.default_rng(3)
        w = Weight.from_weights(rng.uniform(0.0, 5.0, size=400))
        for m in range(2, len(w) + 1):
            assert (
                w.primitive_exact[m - 1] - w.primitive_exact[m - 2]
                == w.w_exact[m - 1]
            )

    def test_from_primitive_rejects_decreasing(self):
        with pytest.raises(ValueError):
            Weight.from_primitive([1.0, 0.5])


class TestPrimitive:
    def test_unit(self):
        assert primitive(parse_weight("unit", 8), 5) == 5.0

    def test_degenerate(self):
        assert primitive(Weight.from_weights([1, 0, 0]), 3) == 1.0

    def test_power_half_telescoping(self):
        assert primitive(parse_weight("power:0.5", 8), 4) == 2.0

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            primitive(parse_weight("unit", 4), 5)


class TestDoubling:
    def test_linear(self):
        assert doubling_ratio(PositiveSequence(range(1, 9))) == 2.0

    def test_constant(self):
        assert doubling_ratio(PositiveSequence([1.0] * 6)) == 1.0

    def test_geometric(self):
        sigma = PositiveSequence([2.0**m for m in range(1, 11)])
        assert doubling_ratio(sigma) == 32.0

    def test_rejects_nonmonotone(self):
        with pytest.raises(ValueError):
            doubling_ratio(PositiveSequence([2.0, 1.0]))


class TestWitnesses:
    def test_urp_power_half(self):
        assert urp_witness(parse_positive_sequence("power:0.5", 64), 8) == 4

    def test_urp_linear_has_none(self):
        assert urp_witness(parse_positive_sequence("power:1", 64), 8) is None

    def test_urp_constant(self):
        assert urp_witness(parse_positive_sequence("unit", 64), 8) == 2

    def test_lrp_linear(self):
        assert lrp_witness(parse_positive_sequence("power:1", 64), 4) == 2

    def test_lrp_constant_has_none(self):
        assert lrp_witness(parse_positive_sequence("unit", 64), 8) is None

    def test_lrp_power_half(self):
        assert lrp_witness(parse_positive_sequence("power:0.5", 64), 8) == 4

    def test_bmax_validation(self):
        with pytest.raises(ValueError):
            urp_witness(parse_positive_sequence("unit", 8), 1)

    def test_urp_witness_survives_truncation(self):
        tau = parse_positive_sequence("power:0.5", 512)
        b = urp_witness(tau, 8)
        for n in (64, 100, 511):
            short = PositiveSequence(tau.exact[:n])
            assert urp_witness(short, 8) <= b


class TestEssentiallyIncreasing:
    def test_nondecreasing_is_one(self):
        assert essentially_increasing_ratio(PositiveSequence([1, 2, 2, 5])) == 1.0

    def test_spec_triple(self):
        assert essentially_increasing_ratio(PositiveSequence([2, 1, 4])) == 2.0

    def test_ones(self):
        assert essentially_increasing_ratio(PositiveSequence([1.0] * 9)) == 1.0


class TestDualSequence:
    def test_linear_to_ones(self):
        d = dual_sequence(parse_positive_sequence("power:1", 16))
        assert np.array_equal(d.values, np.ones(16))

    def test_sqrt_self_dual(self):
        tau = parse_positive_sequence("power:0.5", 16)
        d = dual_sequence(tau)
        assert np.allclose(d.values, tau.values, rtol=1e-15)

    def test_constant_to_index(self):
        d = dual_sequence(parse_positive_sequence("unit", 5))
        assert d.values.tolist() == [1.0, 2.0, 3.0, 4.0, 5.0]

    @settings(max_examples=150, deadline=None)
    @given(st.lists(positive_floats, min_size=1, max_size=40))
    def test_involution_is_exact(self, values):
        tau = PositiveSequence(values)
        assert dual_sequence(dual_sequence(tau)) == tau
        assert np.array_equal(dual_sequence(dual_sequence(tau)).values, tau.values)


class TestUrpConditionC:
    def test_ones(self):
        assert urp_condition_c(parse_positive_sequence("unit", 32)) == 1.0

    def test_power_half(self):
        # frozen from the enumeration oracle: max_m sqrt(m) * mean(1/sqrt(n));
        # the value climbs toward 2 as the horizon grows
        c100 = urp_condition_c(parse_positive_sequence("power:0.5", 100))
        assert abs(c100 - 1.858960382478415) < 1e-12
        c1000 = urp_condition_c(parse_positive_sequence("power:0.5", 1000))
        assert 1.9 <= c1000 <= 2.1

    def test_linear_negative_control_tracks_harmonic(self):
        n = 1000
        c = urp_condition_c(parse_positive_sequence("power:1", n))
        harmonic = sum(1.0 / k for k in range(1, n + 1))
        assert abs(c - harmonic) < 1e-9


class TestPowerSequence:
    def test_identity(self):
        tau = parse_positive_sequence("power:0.5", 16)
        assert power_sequence(tau, 1.0) is tau

    def test_square_of_sqrt(self):
        sq = power_sequence(parse_positive_sequence("power:0.5", 32), 2.0)
        assert np.allclose(sq.values, np.arange(1.0, 33.0), rtol=1e-14)

    def test_cube_of_twos(self):
        cubed = power_sequence(PositiveSequence([2.0] * 5), 3.0)
        assert cubed.values.tolist() == [8.0] * 5

    def test_rejects_nonpositive_exponent(self):
        with pytest.raises(ValueError):
            power_sequence(PositiveSequence([1.0]), 0.0)

    def test_urp_carries_to_small_powers(self):
        # t_n = n^0.5 keeps upper regularity under p-th powers; the minimal
        # witness for exponent a is about 2^(1/(1-a)), so b_max = 64 covers
        # powered exponents up to 5/6 (p up to 5/3 here)
        tau = parse_positive_sequence("power:0.5", 4096)
        for p in (1.2, 1.5, 1.55):
            b = urp_witness(power_sequence(tau, p), 64)
            assert b is not None
            assert b >= urp_witness(tau, 64)


def _dual_lrp_equivalence_holds(tau: PositiveSequence, b_max: int) -> bool:
    """For every b and index: 2 t*_m <= t*_{bm}  iff  t_{bm} <= (b/2) t_m."""
    dual = dual_sequence(tau)
    t = tau.exact
    d = dual.exact
    n_len = len(t)
    for b in range(2, b_max + 1):
        for m in range(1, n_len // b + 1):
            lhs = 2 * d[m - 1] <= d[b * m - 1]
            rhs = t[b * m - 1] <= Fraction(b, 2) * t[m - 1]
            if lhs != rhs:
                return False
    return True


class TestDualRegularity:
    def test_urp_iff_dual_lrp_on_generators(self):
        for spec in ("unit", "power:0.3", "power:0.5", "power:0.9", "power:1"):
            tau = parse_positive_sequence(spec, 256)
            assert _dual_lrp_equivalence_holds(tau, 8)
            b_urp = urp_witness(tau, 8)
            b_lrp_dual = lrp_witness(dual_sequence(tau), 8)
            assert b_urp == b_lrp_dual

    @settings(max_examples=100, deadline=None)
    @given(st.lists(positive_floats, min_size=2, max_size=48))
    def test_equivalence_exact_on_random(self, values):
        assert _dual_lrp_equivalence_holds(PositiveSequence(values), 6)

    def test_dual_of_power_sequence_essentially_increasing(self):
        # if (n^a / t_n) has bounded increase ratio, so does the dual sequence
        rng = np.random.default_rng(11)
        a = 0.6
        n = np.arange(1.0, 301.0)
        for _ in range(25):
            noise = rng.uniform(0.5, 2.0, size=300)
            tau = PositiveSequence(n**a * noise)
            aux = PositiveSequence(n**a / tau.values)
            bound = essentially_increasing_ratio(aux)
            assert essentially_increasing_ratio(dual_sequence(tau)) <= bound * (
                1 + 1e-12
            )


class TestRunningMaxMonotone:
    def test_majorizes_and_monotone(self):
        tau = PositiveSequence([2, 1, 4, 3])
        mono = running_max_monotone(tau)
        assert mono.values.tolist() == [2.0, 2.0, 4.0, 4.0]
        assert mono.is_nondecreasing()


class TestGenerators:
    def test_explicit(self):
        tau = parse_positive_sequence("explicit:[1, 2.5, 3]", 3)
        assert tau.values.tolist() == [1.0, 2.5, 3.0]

    def test_geometric(self):
        tau = parse_positive_sequence("geometric:2", 4)
        assert tau.values.tolist() == [1.0, 2.0, 4.0, 8.0]

    def test_unknown_rejected(self):
        with pytest.raises(ValueError):
            parse_positive_sequence("nope:1", 4)
        with pytest.raises(ValueError):
            parse_weight("nope", 4)

    def test_weight_generators(self):
        assert parse_weight("unit", 3).w.tolist() == [1.0, 1.0, 1.0]
        assert parse_weight("geometric:0.5", 3).w.tolist() == [1.0, 0.5, 0.25]
        assert parse_weight("explicit:[2,1]", 2).primitive_values.tolist() == [2.0, 3.0]
