import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rndcalc import fixtures as fx
from rndcalc.conditional import (
    ConditionalKernel,
    binary_symmetric_channel,
    constant_kernel,
    identity_kernel,
    output_marginal,
)
from rndcalc.errors import DomainError
from rndcalc.information import (
    check_il_identity,
    identity_rhs,
    kl_divergence,
    lautum_information,
    lautum_information_terms,
    mutual_information,
    mutual_information_terms,
)
from rndcalc.measure import SampleSpace, SignedMeasure, counting, probability, signed

UNIFORM2 = probability([0.5, 0.5])
BSC = binary_symmetric_channel(0.25)


def brute_mi(K, px):
    """Double sum over the joint, written independently of the library."""
    py = px @ K
    total = 0.0
    for i in range(K.shape[0]):
        for j in range(K.shape[1]):
            if px[i] * K[i, j] > 0:
                total += px[i] * K[i, j] * math.log(K[i, j] / py[j])
    return total


def brute_lautum(K, px):
    py = px @ K
    total = 0.0
    for i in range(K.shape[0]):
        for j in range(K.shape[1]):
            if px[i] * py[j] > 0:
                total += px[i] * py[j] * math.log(py[j] / K[i, j])
    return total


class TestKL:
    def test_examples(self):
        assert kl_divergence(UNIFORM2, UNIFORM2) == 0.0
        expected = 0.5 * math.log(2) + 0.5 * math.log(2 / 3)
        assert kl_divergence(UNIFORM2, probability([0.25, 0.75])) == pytest.approx(expected, abs=1e-15)
        assert kl_divergence(probability([1.0, 0.0]), UNIFORM2) == pytest.approx(math.log(2), abs=1e-15)

    def test_violation(self):
        with pytest.raises(DomainError) as err:
            kl_divergence(UNIFORM2, probability([1.0, 0.0]))
        assert err.value.witness == "1"


class TestMutualLautum:
    def test_bsc_values(self):
        h = -(0.25 * math.log(0.25) + 0.75 * math.log(0.75))
        assert mutual_information(BSC, UNIFORM2) == pytest.approx(math.log(2) - h, abs=1e-15)
        assert mutual_information(BSC, UNIFORM2) == pytest.approx(0.130812, abs=1e-6)
        assert lautum_information(BSC, UNIFORM2) == pytest.approx(0.143841, abs=1e-6)
        K = BSC.matrix
        assert mutual_information(BSC, UNIFORM2) == pytest.approx(brute_mi(K, UNIFORM2.weights), abs=1e-15)
        assert lautum_information(BSC, UNIFORM2) == pytest.approx(brute_lautum(K, UNIFORM2.weights), abs=1e-15)

    def test_constant_kernel(self):
        K, px = constant_kernel(3, [0.3, 0.7]), probability([0.2, 0.3, 0.5])
        assert mutual_information(K, px) == pytest.approx(0.0, abs=1e-15)
        assert lautum_information(K, px) == pytest.approx(0.0, abs=1e-15)

    def test_identity_kernel(self):
        assert mutual_information(identity_kernel(2), UNIFORM2) == pytest.approx(math.log(2), abs=1e-15)
        with pytest.raises(DomainError):
            lautum_information(identity_kernel(2), UNIFORM2)

    def test_decomposition_sums_to_value(self, rng):
        K, px = fx.random_kernel(rng, 3, 4, floor=0.01), fx.random_probability(rng, 3)
        for res in (mutual_information_terms(K, px), lautum_information_terms(K, px)):
            assert res.decomposition.shape == (3, 4)
            assert res.decomposition.sum() == pytest.approx(res.value, abs=1e-15)

    def test_symmetry_under_relabeling(self):
        flipped = ConditionalKernel.from_rows(BSC.matrix[::-1, ::-1])
        px = probability(UNIFORM2.weights[::-1])
        assert mutual_information(flipped, px) == mutual_information(BSC, UNIFORM2)
        assert lautum_information(flipped, px) == lautum_information(BSC, UNIFORM2)


@given(st.integers(0, 10_000))
def test_nonnegativity(seed):
    rng = np.random.default_rng(seed)
    K = fx.random_kernel(rng, int(rng.integers(1, 6)), int(rng.integers(1, 6)), floor=0.0)
    px = fx.random_probability(rng, K.x_space.size)
    assert mutual_information(K, px) >= -1e-15
    py = output_marginal(K, px)
    if all(np.all(K.matrix[i][py.weights != 0] > 0) for i in range(K.x_space.size) if px.weights[i] > 0):
        strict = ConditionalKernel(K.x_space, K.y_space, K.matrix)
        assert lautum_information(strict, px) >= -1e-15
    assert mutual_information(K, px) == pytest.approx(brute_mi(K.matrix, px.weights), abs=1e-12)


class TestIdentity:
    def test_counting_reference(self):
        assert identity_rhs(BSC, UNIFORM2, counting(BSC.y_space)) == pytest.approx(0.274653, abs=1e-6)

    def test_three_references(self):
        P_Y = output_marginal(BSC, UNIFORM2)
        refs = [P_Y, counting(P_Y.space), signed([0.6, 1.4])]
        r = check_il_identity(BSC, UNIFORM2, refs)
        assert r.passed
        total = r.details["I"] + r.details["L"]
        assert total == pytest.approx(0.274653, abs=1e-6)
        for value in r.details["rhs"]:
            assert abs(value - total) <= 1e-9

    def test_reference_collapse(self, rng):
        for _ in range(100):
            K = fx.random_kernel(rng, 4, 3, floor=0.01)
            px = fx.random_probability(rng, 4, floor=0.01)
            P_Y = output_marginal(K, px)
            total = mutual_information(K, px) + lautum_information(K, px)
            assert abs(identity_rhs(K, px, P_Y) - total) <= 1e-12

    def test_constant_kernel_zero(self):
        K, px = constant_kernel(2, [0.3, 0.7]), UNIFORM2
        r = check_il_identity(K, px, [counting(K.y_space), signed([2.0, 5.0])])
        assert r.passed
        for value in r.details["rhs"]:
            assert value == pytest.approx(0.0, abs=1e-15)

    def test_chain_violation_names_link(self):
        with pytest.raises(DomainError) as err:
            identity_rhs(BSC, UNIFORM2, signed([1.0, 0.0]))
        assert "Q" in err.value.witness["link"]
        with pytest.raises(DomainError):
            identity_rhs(BSC, UNIFORM2, signed([1.0, -1.0]))


@given(st.integers(0, 10_000))
def test_q_invariance(seed):
    rng = np.random.default_rng(seed)
    K = fx.random_kernel(rng, int(rng.integers(2, 6)), int(rng.integers(2, 6)), floor=0.01)
    px = fx.random_probability(rng, K.x_space.size, floor=0.01)
    ny = K.y_space.size
    refs = [
        SignedMeasure(K.y_space, rng.uniform(0.01, 100.0, size=ny)),
        SignedMeasure(K.y_space, rng.uniform(0.01, 100.0, size=ny)),
        counting(K.y_space),
    ]
    values = [identity_rhs(K, px, Q) for Q in refs]
    assert max(values) - min(values) <= 1e-9
