import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rndcalc.errors import CapacityError, DomainError, StructuralError
from rndcalc.measure import (
    MAX_POINTS,
    ProbabilityMeasure,
    SampleSpace,
    SignedMeasure,
    SubsetMask,
    counting,
    integrate,
    is_absolutely_continuous,
    measure_of,
    mix,
    probability,
    product,
    product_space,
    scale,
    signed,
    subset_masks,
    total_mass,
)

from conftest import signed_measures


class TestSampleSpace:
    def test_labels_must_be_unique(self):
        with pytest.raises(StructuralError):
            SampleSpace(("a", "b", "a"))

    def test_size_bounds(self):
        with pytest.raises(StructuralError):
            SampleSpace(())
        assert SampleSpace.of_size(3).labels == ("0", "1", "2")

    def test_product_capacity(self):
        big = SampleSpace.of_size(2**10)
        with pytest.raises(CapacityError):
            product_space(big, SampleSpace.of_size(2**10 + 1))

    def test_product_labels_row_major(self):
        s = product_space(SampleSpace(("a", "b")), SampleSpace(("x", "y")))
        assert s.labels == ("(a, x)", "(a, y)", "(b, x)", "(b, y)")


class TestBasicOps:
    @pytest.mark.parametrize(
        "w, expected", [((0.25, 0.75), 1.0), ((0.1, -0.1), 0.0), ((0.2, 0.9, 0.4), 1.5)]
    )
    def test_total_mass(self, w, expected):
        assert total_mass(signed(w)) == pytest.approx(expected, abs=1e-15)

    def test_measure_of(self):
        m = signed([0.25, 0.75])
        assert measure_of(m, SubsetMask.of(m.space, [0])) == 0.25
        assert measure_of(m, SubsetMask.full(m.space)) == 1.0
        m3 = signed([0.2, -0.5, 0.3])
        assert measure_of(m3, SubsetMask.of(m3.space, [0, 2])) == pytest.approx(0.5, abs=1e-15)

    def test_measure_of_space_mismatch(self):
        m = signed([0.5, 0.5])
        with pytest.raises(StructuralError):
            measure_of(m, SubsetMask.full(SampleSpace.of_size(3)))

    @pytest.mark.parametrize(
        "p, q, expected",
        [
            ((0.5, 0.5, 0), (0.25, 0.25, 0.5), True),
            ((0.5, 0.5), (1.0, 0.0), False),
            ((0, 0, 1), (0, 0.5, 0.5), True),
        ],
    )
    def test_absolute_continuity(self, p, q, expected):
        assert is_absolutely_continuous(signed(p), signed(q)) is expected

    def test_integrate(self):
        m = probability([0.3, 0.7])
        assert integrate(lambda x: 1.0, m) == pytest.approx(1.0, abs=1e-15)
        half = signed([0.5, 0.5])
        assert integrate([2, 4], half) == 3.0
        assert integrate([7, 9], half, SubsetMask.empty(half.space)) == 0.0

    def test_integrate_rejects_infinite_integrand_on_charged_point(self):
        m = signed([0.5, 0.0])
        assert integrate([1.0, np.inf], m) == 0.5
        with pytest.raises(DomainError):
            integrate([np.inf, 1.0], m)

    def test_scale(self):
        np.testing.assert_array_equal(scale(signed([0.5, 0.5]), 2).weights, [1.0, 1.0])
        np.testing.assert_array_equal(scale(signed([0.3, 0.7]), 1).weights, [0.3, 0.7])
        np.testing.assert_allclose(scale(signed([0.2, -0.1]), -3).weights, [-0.6, 0.3], rtol=1e-15)

    def test_mix(self):
        q1, q2 = signed([0.1, 0.2]), signed([0.3, 0.1])
        np.testing.assert_allclose(mix([2, 3], [q1, q2]).weights, [1.1, 0.7], rtol=1e-15)
        np.testing.assert_array_equal(mix([1], [q1]).weights, q1.weights)
        fixed = signed([0.4, 0.6])
        np.testing.assert_array_equal(mix([0.5, 0.5], [fixed, fixed]).weights, [0.4, 0.6])
        with pytest.raises(StructuralError):
            mix([1, 2], [q1])

    def test_product(self):
        m = product(signed([0.5, 0.5]), signed([0.25, 0.75]))
        np.testing.assert_array_equal(m.weights, [0.125, 0.375, 0.125, 0.375])
        point = product(signed([0.3, 0.7]), signed([0.0, 1.0, 0.0]))
        np.testing.assert_array_equal(point.weights.reshape(2, 3)[:, 1], [0.3, 0.7])
        assert product(signed([1.0]), signed([1.0])).weights.tolist() == [1.0]

    def test_probability_normalizes(self):
        p = ProbabilityMeasure(SampleSpace.of_size(3), np.array([1.0, 1.0, 2.0]))
        assert abs(p.weights.sum() - 1.0) <= 1e-12
        with pytest.raises(DomainError):
            probability([0.5, -0.1])

    def test_weights_must_be_finite(self):
        with pytest.raises(DomainError):
            signed([0.5, np.nan])
        with pytest.raises(DomainError):
            signed([np.inf, 0.0])

    def test_measures_are_immutable(self):
        m = signed([0.5, 0.5])
        with pytest.raises(ValueError):
            m.weights[0] = 1.0

    def test_counting(self):
        assert counting(SampleSpace.of_size(4)).weights.tolist() == [1.0] * 4


class TestSubsets:
    def test_exhaustive_for_small_spaces(self):
        masks = subset_masks(4)
        assert masks.shape == (16, 4)
        assert len({tuple(r) for r in masks}) == 16

    def test_sampled_for_large_spaces(self):
        masks = subset_masks(20, seed=3)
        assert masks.shape == (1000 + 20 + 1, 20)
        assert masks[-1].all()
        np.testing.assert_array_equal(masks[1000:1020], np.eye(20, dtype=bool))
        np.testing.assert_array_equal(masks, subset_masks(20, seed=3))


@given(signed_measures(max_size=8))
def test_finite_additivity_exhaustive(m):
    n = m.size
    # every ordered pair of disjoint subsets, via a ternary labelling of points
    for labels in itertools.product(range(3), repeat=n):
        a = np.array(labels) == 1
        b = np.array(labels) == 2
        union = measure_of(m, SubsetMask(m.space, a | b))
        parts = measure_of(m, SubsetMask(m.space, a)) + measure_of(m, SubsetMask(m.space, b))
        assert abs(union - parts) <= 1e-12 * max(1.0, np.abs(m.weights).sum())


@given(signed_measures(max_size=6), signed_measures(max_size=6))
def test_product_marginalizes(m1, m2):
    w = product(m1, m2).weights.reshape(m1.size, m2.size).sum(axis=1)
    expected = total_mass(m2) * m1.weights
    scale_ = np.abs(m1.weights) * np.abs(m2.weights).sum()
    assert np.all(np.abs(w - expected) <= 1e-12 * np.maximum(scale_, 1e-300))


@given(st.data())
def test_absolute_continuity_reflexive_and_transitive(data):
    n = data.draw(st.integers(1, 8))
    masks = [np.array(data.draw(st.lists(st.booleans(), min_size=n, max_size=n))) for _ in range(3)]
    space = SampleSpace.of_size(n)
    P, Q, R = (SignedMeasure(space, m.astype(float) * (i + 1)) for i, m in enumerate(masks))
    for m in (P, Q, R):
        assert is_absolutely_continuous(m, m)
    if is_absolutely_continuous(P, Q) and is_absolutely_continuous(Q, R):
        assert is_absolutely_continuous(P, R)


@given(signed_measures(), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_scale_composition_within_rounding(m, a, b):
    lhs = scale(scale(m, a), b).weights
    rhs = scale(m, a * b).weights
    # float products are not associative: (w*a)*b and w*(a*b) may differ by
    # rounding, so exact equality is asserted only for power-of-two factors
    assert np.all(np.abs(lhs - rhs) <= 2 * np.finfo(float).eps * np.abs(rhs) + 1e-300)


@given(signed_measures(), st.integers(-20, 20), st.integers(-20, 20))
def test_scale_composition_exact_powers_of_two(m, i, j):
    a, b = 2.0**i, 2.0**j
    np.testing.assert_array_equal(scale(scale(m, a), b).weights, scale(m, a * b).weights)


def test_capacity_limit_constant():
    assert MAX_POINTS == 2**20
