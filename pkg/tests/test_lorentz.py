import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedyspaces.accum import make_rng
from greedyspaces.errors import HorizonExhaustedError
from greedyspaces.lorentz import (
    LorentzSpec,
    RealSequence,
    allen_dual_weight,
    block_ellinfty_construction,
    delta_m,
    discrete_hardy,
    embedding_gap_H,
    fundamental_function,
    hardy_equivalence_band,
    lorentz_norm,
    lorentz_norm_direct,
    lorentz_norm_many,
    lrp_equivalent_weight,
    marcinkiewicz_norm,
    norm,
    p_convexify,
    rearrangement,
    spec_from_json,
)
from greedyspaces.seqreg import PositiveSequence, Weight, parse_weight

from oracles import mp_lorentz_norm

UNIT16 = parse_weight("unit", 16)
SQRT64 = parse_weight("power:0.5", 64)

coeff_lists = st.lists(
    st.floats(min_value=-100, max_value=100, allow_nan=False), min_size=1, max_size=16
)


class TestRearrangement:
    def test_basic(self):
        assert rearrangement([0, -3, 1]).coeffs.tolist() == [3.0, 1.0, 0.0]

    def test_zeros(self):
        assert rearrangement([0.0, 0.0]).coeffs.tolist() == [0.0, 0.0]

    def test_ties_stable(self):
        assert rearrangement([1.0, 1.0, 1.0]).coeffs.tolist() == [1.0, 1.0, 1.0]

    def test_support(self):
        assert RealSequence([0.0, 2.0, 0.0, -1.0]).support.tolist() == [1, 3]


class TestLorentzNorm:
    def test_q1_unit_weight_is_l1(self):
        spec = LorentzSpec(q=1.0, weight=UNIT16)
        rng = make_rng(0)
        for _ in range(50):
            f = rng.standard_normal(16)
            assert lorentz_norm(f, spec) == pytest.approx(
                float(np.sum(np.abs(f))), rel=1e-14
            )

    def test_qinf_unit_e1(self):
        spec = LorentzSpec(q=math.inf, weight=UNIT16)
        assert lorentz_norm([1, 0, 0], spec) == 1.0

    def test_indicator_against_direct_summation(self):
        spec = LorentzSpec(q=2.0, weight=SQRT64)
        for m in (1, 3, 17, 64):
            f = np.ones(m)
            expected = mp_lorentz_norm(
                f, SQRT64.primitive_values[:m], SQRT64.w[:m], 2.0
            )
            assert lorentz_norm(f, spec) == pytest.approx(expected, rel=1e-13)

    def test_random_against_direct_summation(self):
        spec = LorentzSpec(q=0.5, weight=SQRT64)
        rng = make_rng(1)
        for _ in range(25):
            f = rng.standard_normal(40)
            a = np.sort(np.abs(f))[::-1]
            expected = mp_lorentz_norm(a, SQRT64.primitive_values[:40], SQRT64.w[:40], 0.5)
            assert lorentz_norm(f, spec) == pytest.approx(expected, rel=1e-12)

    def test_length_mismatch(self):
        spec = LorentzSpec(q=1.0, weight=parse_weight("unit", 4))
        with pytest.raises(ValueError):
            lorentz_norm(np.ones(5), spec)

    def test_doubling_cap_rejects_exploding_weight(self):
        with pytest.raises(ValueError):
            LorentzSpec(q=1.0, weight=parse_weight("geometric:2", 64))

    def test_spec_from_json(self):
        spec = spec_from_json({"q": "inf", "weight": "unit"}, 8)
        assert math.isinf(spec.q)
        spec2 = spec_from_json({"q": 2, "weight": [1, 1, 1], "flavor": "direct"}, 3)
        assert spec2.flavor == "direct"
        with pytest.raises(ValueError):
            spec_from_json({"q": 1}, 4)


class TestDirectForm:
    def test_unit_is_l2(self):
        rng = make_rng(2)
        u = parse_weight("unit", 32)
        for _ in range(20):
            f = rng.standard_normal(32)
            assert lorentz_norm_direct(f, u, 2.0) == pytest.approx(
                float(np.linalg.norm(f)), rel=1e-12
            )

    def test_scaled_atom(self):
        assert lorentz_norm_direct([1, 0], Weight.from_weights([4.0, 1.0]), 2.0) == 2.0

    def test_infinite_q_rejected(self):
        with pytest.raises(ValueError):
            lorentz_norm_direct([1.0], UNIT16, math.inf)

    def test_change_of_scale_band(self):
        # direct weight with partial sums s^q stays within a fixed band of
        # the primitive form
        q = 2.0
        spec = LorentzSpec(q=q, weight=SQRT64)
        u = Weight.from_primitive(SQRT64.primitive_values**q)
        rng = make_rng(3)
        ratios = []
        for _ in range(200):
            f = rng.standard_normal(64)
            ratios.append(lorentz_norm_direct(f, u, q) / lorentz_norm(f, spec))
        assert 0.2 <= min(ratios) and max(ratios) <= 5.0


class TestMarcinkiewicz:
    def test_atom_constant_primitive(self):
        w = Weight.from_weights([1.0, 0.0, 0.0])
        assert marcinkiewicz_norm([1, 0, 0], w) == 1.0

    def test_flat_pair(self):
        assert marcinkiewicz_norm([1.0, 1.0], parse_weight("unit", 2)) == 1.0

    def test_atom_sqrt_weight(self):
        assert marcinkiewicz_norm([1.0, 0.0], parse_weight("power:0.5", 2)) == 1.0

    def test_dispatch(self):
        spec = LorentzSpec(q=1.0, weight=UNIT16, flavor="marcinkiewicz")
        assert norm([1, 1, 0], spec) == 1.0


class TestDiscreteHardy:
    def test_constant_exact(self):
        out = discrete_hardy([0.7] * 9)
        assert out.coeffs.tolist() == [0.7] * 9

    def test_atom(self):
        out = discrete_hardy([1.0, 0.0, 0.0])
        assert out.coeffs.tolist() == [1.0, 0.5, 1.0 / 3.0]

    def test_pair(self):
        assert discrete_hardy([1.0, 3.0]).coeffs.tolist() == [1.0, 2.0]

    @settings(max_examples=150, deadline=None)
    @given(coeff_lists)
    def test_averages_dominate_entries_of_rearrangement(self, values):
        fstar = rearrangement(values).coeffs
        avg = discrete_hardy(fstar).coeffs
        assert np.all(avg >= fstar)


class TestHardyEquivalence:
    def test_atom_ratio_at_least_one(self):
        spec = LorentzSpec(q=2.0, weight=SQRT64)
        e1 = np.zeros(64)
        e1[0] = 1.0
        lo, hi = hardy_equivalence_band(spec, [e1])
        assert lo >= 1.0

    def test_sqrt_weight_band_bounded(self):
        spec = LorentzSpec(q=2.0, weight=parse_weight("power:0.5", 128))
        rng = make_rng(4)
        samples = [rng.standard_normal(128) for _ in range(1000)]
        lo, hi = hardy_equivalence_band(spec, samples)
        assert lo >= 1.0
        assert hi <= 10.0

    def test_indicator_ratio_matches_direct_summation(self):
        # constant-on-support input, linear partial sums: the averaged
        # rearrangement has an explicit harmonic tail, checked against the
        # high-precision oracle norm by norm
        n, m = 64, 12
        w = parse_weight("unit", n)
        spec = LorentzSpec(q=2.0, weight=w)
        f = np.zeros(n)
        f[:m] = 1.0
        averaged = discrete_hardy(rearrangement(f).coeffs).coeffs
        tail = m / np.arange(m, n + 1, dtype=float)
        assert np.allclose(averaged[m - 1 :], tail, rtol=1e-15)
        ratio = lorentz_norm(averaged, spec) / lorentz_norm(f, spec)
        expected = mp_lorentz_norm(
            averaged, w.primitive_values, w.w, 2.0
        ) / mp_lorentz_norm(f, w.primitive_values, w.w, 2.0)
        assert ratio == pytest.approx(expected, rel=1e-12)
        assert ratio >= 1.0

    def test_preconditions(self):
        spec = LorentzSpec(q=2.0, weight=SQRT64)
        with pytest.raises(ValueError):
            hardy_equivalence_band(spec, [])
        bad = LorentzSpec(q=1.0, weight=SQRT64)
        with pytest.raises(ValueError):
            hardy_equivalence_band(bad, [np.ones(4)])
        # linear partial sums have no upper-regularity witness
        linear = LorentzSpec(q=2.0, weight=parse_weight("power:1", 16))
        with pytest.raises(ValueError):
            hardy_equivalence_band(linear, [np.ones(4)])


class TestFundamentalFunction:
    def test_q1_unit_is_m(self):
        spec = LorentzSpec(q=1.0, weight=UNIT16)
        assert [fundamental_function(spec, m) for m in (1, 5, 16)] == [1.0, 5.0, 16.0]

    def test_qinf_is_partial_sum(self):
        spec = LorentzSpec(q=math.inf, weight=SQRT64)
        for m in (1, 7, 64):
            assert fundamental_function(spec, m) == SQRT64.primitive_values[m - 1]

    def test_sqrt_weight_band(self):
        w = parse_weight("power:0.5", 4096)
        spec = LorentzSpec(q=2.0, weight=w)
        ratios = [
            fundamental_function(spec, m) / w.primitive_values[m - 1]
            for m in (1, 2, 4, 64, 512, 4096)
        ]
        assert 0.5 <= min(ratios) and max(ratios) <= 2.0

    def test_range(self):
        spec = LorentzSpec(q=1.0, weight=UNIT16)
        with pytest.raises(IndexError):
            fundamental_function(spec, 0)


class TestGapConstants:
    def test_harmonic(self):
        assert embedding_gap_H(UNIT16, 4) == 25.0 / 12.0
        assert embedding_gap_H(UNIT16, 1) == 1.0

    def test_decaying_geometric_bounded(self):
        # partial sums converge, so the gap sum is capped by a constant
        w = parse_weight("geometric:0.5", 64)
        values = [embedding_gap_H(w, m) for m in range(1, 65)]
        assert values == sorted(values)
        assert values[-1] <= 2.0

    def test_delta_trivial(self):
        assert delta_m(UNIT16, 2.0, 2.0, 7) == 1.0

    def test_delta_values(self):
        assert delta_m(UNIT16, 1.0, math.inf, 4) == 25.0 / 12.0
        assert delta_m(UNIT16, 1.0, 2.0, 4) == pytest.approx(
            math.sqrt(25.0 / 12.0), rel=1e-15
        )

    def test_delta_order_validation(self):
        with pytest.raises(ValueError):
            delta_m(UNIT16, 2.0, 1.0, 3)


class TestAllenDualWeight:
    def test_u1_exact(self):
        for q in (1.5, 2.0, 3.0):
            sigma = PositiveSequence(np.arange(1.0, 9.0))
            qp = q / (q - 1.0)
            assert allen_dual_weight(sigma, q).w[0] == 1.0 ** (-qp)
        sigma = PositiveSequence([0.5, 1.0, 2.0])
        assert allen_dual_weight(sigma, 2.0).w[0] == 0.5 ** (-2.0)

    def test_linear_q2(self):
        sigma = PositiveSequence(np.arange(1.0, 9.0))
        u = allen_dual_weight(sigma, 2.0)
        assert u.w[1] == pytest.approx(3.0, rel=1e-15)

    def test_sqrt_ratio_band(self):
        w = parse_weight("power:0.5", 4096)
        sigma = w.primitive_sequence()
        u = allen_dual_weight(sigma, 2.0)
        n = np.arange(2, 4097, dtype=float)
        t = n / w.primitive_values[1:]
        ref = t**2.0 / n
        ratios = u.w[1:] / ref
        assert ratios.min() >= 0.4 and ratios.max() <= 2.5

    def test_requires_strict_increase(self):
        with pytest.raises(ValueError):
            allen_dual_weight(PositiveSequence([1.0, 1.0, 2.0]), 2.0)
        with pytest.raises(ValueError):
            allen_dual_weight(PositiveSequence([1.0, 2.0]), 1.0)


class TestConvexification:
    def test_identity(self):
        spec = LorentzSpec(q=2.0, weight=SQRT64)
        assert p_convexify(spec, 1.0) is spec

    def test_half(self):
        spec = LorentzSpec(q=2.0, weight=SQRT64)
        out = p_convexify(spec, 0.5)
        assert out.q == 1.0
        assert np.allclose(
            out.weight.primitive_values, SQRT64.primitive_values**2, rtol=1e-15
        )

    def test_norm_identity_band(self):
        spec = LorentzSpec(q=2.0, weight=SQRT64)
        out = p_convexify(spec, 2.0)
        rng = make_rng(5)
        ratios = []
        for _ in range(100):
            f = rng.standard_normal(64)
            lhs = lorentz_norm(np.abs(f) ** 2.0, spec) ** (1.0 / 2.0)
            ratios.append(lhs / lorentz_norm(f, out))
        assert 0.5 <= min(ratios) and max(ratios) <= 2.0


class TestLrpEquivalentWeight:
    def test_linear_exact(self):
        rep = lrp_equivalent_weight(parse_weight("power:1", 64))
        assert rep.pointwise_band == (1.0, 1.0)
        assert rep.sum_band == (1.0, 1.0)
        assert np.array_equal(rep.weight.w, np.ones(64))

    def test_sqrt_pointwise_one(self):
        rep = lrp_equivalent_weight(parse_weight("power:0.5", 512))
        assert rep.pointwise_band[0] == pytest.approx(1.0, abs=1e-12)
        assert rep.pointwise_band[1] == pytest.approx(1.0, abs=1e-12)
        assert 1.0 <= rep.sum_band[0] and rep.sum_band[1] <= 2.0

    def test_preconditions(self):
        with pytest.raises(ValueError):
            lrp_equivalent_weight(parse_weight("geometric:0.5", 64))


class TestBlockConstruction:
    def test_sqrt_weight(self):
        bc = block_ellinfty_construction(parse_weight("power:0.5", 4096), 2.0, 3)
        assert len(bc.blocks) == 3
        assert 0.5 <= bc.sign_band[0] and bc.sign_band[1] <= 2.0
        supports = [set(b.support.tolist()) for b in bc.blocks]
        assert supports[0].isdisjoint(supports[1])
        assert supports[1].isdisjoint(supports[2])

    def test_constant_primitive_exhausts(self):
        w = Weight.from_primitive(np.ones(64))
        with pytest.raises(HorizonExhaustedError):
            block_ellinfty_construction(w, 2.0, 3)

    def test_single_block_matches_marcinkiewicz(self):
        w = parse_weight("power:0.5", 256)
        bc = block_ellinfty_construction(w, 2.0, 1)
        assert marcinkiewicz_norm(bc.blocks[0], w) == bc.sign_band[0]
        assert bc.sign_band[0] == pytest.approx(1.0, rel=1e-12)


WEIGHTS = {
    "unit": parse_weight("unit", 64),
    "power:0.5": parse_weight("power:0.5", 64),
    "geometric:0.5": parse_weight("geometric:0.5", 64),
}


class TestNormProperties:
    @settings(max_examples=120, deadline=None)
    @given(
        coeffs=st.lists(
            st.floats(min_value=-50, max_value=50, allow_nan=False),
            min_size=1,
            max_size=20,
        ),
        q=st.sampled_from([0.5, 1.0, 2.0, math.inf]),
        wname=st.sampled_from(sorted(WEIGHTS)),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    def test_rearrangement_and_sign_invariance_exact(self, coeffs, q, wname, seed):
        spec = LorentzSpec(q=q, weight=WEIGHTS[wname])
        f = np.asarray(coeffs)
        rng = np.random.default_rng(seed)
        g = rng.permutation(f) * rng.choice([-1.0, 1.0], size=len(f))
        assert lorentz_norm(f, spec) == lorentz_norm(g, spec)

    @settings(max_examples=120, deadline=None)
    @given(
        coeffs=st.lists(
            st.floats(min_value=-50, max_value=50, allow_nan=False),
            min_size=1,
            max_size=20,
        ),
        q=st.sampled_from([0.5, 1.0, 2.0, math.inf]),
        wname=st.sampled_from(sorted(WEIGHTS)),
        c=st.floats(min_value=1e-3, max_value=1e3, allow_nan=False),
    )
    def test_homogeneity(self, coeffs, q, wname, c):
        spec = LorentzSpec(q=q, weight=WEIGHTS[wname])
        f = np.asarray(coeffs)
        base = lorentz_norm(f, spec)
        assert lorentz_norm(c * f, spec) == pytest.approx(abs(c) * base, rel=1e-12)

    def test_monotonicity(self):
        rng = make_rng(6)
        for q in (0.5, 1.0, 2.0, math.inf):
            for w in WEIGHTS.values():
                spec = LorentzSpec(q=q, weight=w)
                for _ in range(100):
                    g = rng.standard_normal(32)
                    shrink = rng.uniform(0.0, 1.0, size=32)
                    gstar = rearrangement(g).coeffs
                    fstar = np.sort(gstar * shrink)[::-1]
                    assert lorentz_norm(fstar, spec) <= lorentz_norm(g, spec) * (
                        1 + 1e-12
                    )

    def test_scale_nesting_unit_weight_exact(self):
        # weak-type value never exceeds the strong sum for the unit weight
        w = parse_weight("unit", 64)
        spec1 = LorentzSpec(q=1.0, weight=w)
        specinf = LorentzSpec(q=math.inf, weight=w)
        rng = make_rng(7)
        x = rng.standard_normal((10_000, 64))
        inf_vals = lorentz_norm_many(x, specinf)
        one_vals = lorentz_norm_many(x, spec1)
        assert np.all(inf_vals <= one_vals)

    def test_pairing_bounded_by_dual_norms(self):
        # sum a*_n b*_n <= ||a||_{1,1,w} ||b||_{m(w)}, by summation by parts
        w = parse_weight("power:0.5", 32)
        spec1 = LorentzSpec(q=1.0, weight=w)
        rng = make_rng(8)
        for _ in range(10_000):
            a = rearrangement(rng.standard_normal(32)).coeffs
            b = rearrangement(rng.standard_normal(32)).coeffs
            lhs = float(a @ b)
            rhs = lorentz_norm(a, spec1) * marcinkiewicz_norm(b, w)
            assert lhs <= rhs * (1 + 1e-12)
