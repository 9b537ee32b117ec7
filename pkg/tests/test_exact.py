"""Brute-force oracle: submatrix log-determinants and subset enumeration."""

import math

import numpy as np
import pytest

from linxbound import SymMatrix, exact_mesp, logdet_submatrix, validate

from helpers import correlation_matrix, gram_matrix

NEG_INF = float("-inf")


def test_logdet_identity_subset():
    assert logdet_submatrix(SymMatrix.identity(3), (0, 2)) == 0.0


def test_logdet_singular_block_is_minus_inf():
    assert logdet_submatrix(SymMatrix.all_ones(2), (0, 1)) == NEG_INF


def test_logdet_diagonal_product():
    c = SymMatrix.from_diagonal([2.0, 1.5, 0.5])
    # det of the leading 2x2 block is just 2 * 1.5
    assert logdet_submatrix(c, (0, 1)) == pytest.approx(math.log(3.0), abs=1e-14)


@pytest.mark.parametrize("subset", [(), (0, 0), (0, 3), (-1,)])
def test_logdet_rejects_bad_subsets(subset):
    with pytest.raises(ValueError):
        logdet_submatrix(SymMatrix.identity(3), subset)


def test_exact_picks_largest_diagonal():
    inst = validate(SymMatrix.from_diagonal([2.0, 1.5, 0.5]), 1)
    res = exact_mesp(inst, 1)
    assert res.value == pytest.approx(math.log(2.0), abs=1e-14)
    assert res.best_subset == (0,)


def test_exact_tie_breaks_to_lexicographic_smallest():
    inst = validate(SymMatrix.all_ones(2), 1)
    res = exact_mesp(inst, 1)
    assert res.value == pytest.approx(0.0, abs=1e-15)
    assert res.best_subset == (0,)

    inst = validate(SymMatrix.identity(4), 2)
    assert exact_mesp(inst, 2).best_subset == (0, 1)


def test_exact_all_singular_subsets():
    # rank 1, s = 2: every subset determinant vanishes
    inst = validate(SymMatrix.all_ones(3), 2)
    res = exact_mesp(inst, 2)
    assert res.value == NEG_INF
    assert res.best_subset == (0, 1)


def test_exact_enumeration_cap():
    inst = validate(SymMatrix.identity(25), 2)
    with pytest.raises(ValueError, match="cap"):
        exact_mesp(inst, 2)
    assert exact_mesp(inst, 2, cap=25).value == 0.0


def test_exact_scaling_identity():
    # scaling every determinant by gamma^s shifts the optimum by s*log(gamma)
    rng = np.random.default_rng(2)
    for _ in range(10):
        n = int(rng.integers(3, 8))
        s = int(rng.integers(1, n))
        gamma = float(rng.uniform(0.3, 3.0))
        c = gram_matrix(rng, n)
        base = exact_mesp(validate(SymMatrix.from_array(c), s), s)
        scaled = exact_mesp(validate(SymMatrix.from_array(gamma * c), s), s)
        assert scaled.value - s * math.log(gamma) == pytest.approx(base.value, abs=1e-10)
        assert scaled.best_subset == base.best_subset


def test_masking_never_decreases_exact_value():
    rng = np.random.default_rng(9)
    for _ in range(10):
        n = int(rng.integers(3, 8))
        s = int(rng.integers(1, n))
        c = gram_matrix(rng, n)
        m = correlation_matrix(rng, n)
        plain = exact_mesp(validate(SymMatrix.from_array(c), s), s)
        masked = exact_mesp(validate(SymMatrix.from_array(c * m), s), s)
        assert masked.value >= plain.value - 1e-12
