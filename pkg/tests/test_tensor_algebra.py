import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigscan.errors import DomainError
from sigscan.kernels import signature_sequential
from sigscan.tensor_algebra import (
    TruncatedTensor,
    chen_product,
    flatten,
    restricted_exp,
    sig_dim,
    tensor_product,
    unflatten,
)
from conftest import random_tensor


@pytest.mark.parametrize("d, n, expected", [(10, 4, 11110), (1, 3, 3), (2, 2, 6), (6, 3, 258), (3, 2, 12)])
def test_sig_dim(d, n, expected):
    assert sig_dim(d, n) == expected


@pytest.mark.parametrize("d, n", [(0, 2), (2, 0), (-1, 3)])
def test_sig_dim_rejects_non_positive(d, n):
    with pytest.raises(DomainError):
        sig_dim(d, n)


class TestTensorProduct:
    def test_basis_vectors(self):
        out = tensor_product([1.0, 0.0], [0.0, 1.0])
        np.testing.assert_array_equal(out, [[0, 1], [0, 0]])
        np.testing.assert_array_equal(out.reshape(-1), [0, 1, 0, 0])

    def test_direct_outer(self):
        np.testing.assert_array_equal(tensor_product([1, 2], [3, 4]).reshape(-1), [3, 4, 6, 8])

    def test_zero_annihilates(self, rng):
        b = rng.standard_normal((3, 3))
        assert not tensor_product(np.zeros((3, 3, 3)), b).any()

    @pytest.mark.parametrize("p, q", [(1, 1), (1, 2), (2, 2), (3, 1)])
    def test_coefficient_count(self, rng, p, q):
        out = tensor_product(rng.standard_normal((3,) * p), rng.standard_normal((3,) * q))
        assert out.size == 3 ** (p + q)
        assert out.shape == (3,) * (p + q)

    def test_row_major_order(self, rng):
        a = rng.standard_normal((2, 2))
        b = rng.standard_normal(2)
        out = tensor_product(a, b)
        assert out[1, 0, 1] == a[1, 0] * b[1]
        assert out.reshape(-1)[1 * 4 + 0 * 2 + 1] == a[1, 0] * b[1]

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            tensor_product(np.ones(2), np.ones(3))

    def test_degree_cap(self):
        with pytest.raises(DomainError):
            tensor_product(np.ones((2, 2)), np.ones((2, 2)), max_degree=3)


class TestRestrictedExp:
    def test_zero_vector(self):
        t = restricted_exp(np.zeros(3), 4)
        assert all(not level.any() for level in t.levels)
        assert [level.size for level in t.levels] == [3, 9, 27, 81]

    def test_basis_vector(self):
        t = restricted_exp([1.0, 0.0], 2)
        np.testing.assert_array_equal(t.levels[0], [1, 0])
        np.testing.assert_array_equal(t.levels[1], [0.5, 0, 0, 0])

    def test_one_dimensional(self):
        t = restricted_exp([2.0], 3)
        np.testing.assert_allclose([lv[0] for lv in t.levels], [2, 2, 4 / 3], rtol=1e-15)

    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            restricted_exp([np.nan, 1.0], 2)


class TestChenProduct:
    def test_identity(self, rng):
        a = random_tensor(rng, 3, 3)
        e = TruncatedTensor.identity(3, 3)
        assert chen_product(a, e) == a
        assert chen_product(e, a) == a

    def test_cross_term(self):
        a = TruncatedTensor(2, 2, [[1, 0], [0, 0, 0, 0]])
        b = TruncatedTensor(2, 2, [[0, 1], [0, 0, 0, 0]])
        c = chen_product(a, b)
        np.testing.assert_array_equal(c.levels[0], [1, 1])
        np.testing.assert_array_equal(c.levels[1], [0, 1, 0, 0])

    def test_two_segment_path(self, rng):
        u, v = rng.standard_normal(2), rng.standard_normal(2)
        prod = chen_product(restricted_exp(u, 3), restricted_exp(v, 3))
        path = np.stack([np.zeros(2), u, u + v])
        np.testing.assert_allclose(flatten(prod), signature_sequential(path, 3), atol=1e-14)

    def test_mismatch(self):
        with pytest.raises(DomainError):
            chen_product(TruncatedTensor(2, 2), TruncatedTensor(2, 3))
        with pytest.raises(DomainError):
            chen_product(TruncatedTensor(2, 2), TruncatedTensor(3, 2))

    def test_matmul_operator(self, rng):
        a, b = random_tensor(rng, 2, 3), random_tensor(rng, 2, 3)
        assert (a @ b) == chen_product(a, b)


class TestFlatten:
    def test_concatenation(self):
        t = TruncatedTensor(2, 2, [[1, 2], [3, 4, 5, 6]])
        np.testing.assert_array_equal(flatten(t), [1, 2, 3, 4, 5, 6])

    def test_round_trip(self, rng):
        t = random_tensor(rng, 3, 4)
        assert unflatten(flatten(t), 3, 4) == t

    def test_zero(self):
        out = flatten(TruncatedTensor.identity(3, 2))
        assert out.shape == (12,) and not out.any()

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            unflatten(np.zeros(5), 2, 2)


def test_truncated_tensor_validates_levels():
    with pytest.raises(DomainError):
        TruncatedTensor(2, 2, [[1, 2], [1, 2, 3]])
    with pytest.raises(DomainError):
        TruncatedTensor(2, 2, [[1, 2]])
    with pytest.raises(DomainError):
        TruncatedTensor(2, 1, [[1, np.inf]])


small_dims = st.integers(1, 3)
small_depths = st.integers(1, 4)
seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(small_dims, small_depths, seeds)
def test_associativity(dim, depth, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_tensor(rng, dim, depth, scale=0.5) for _ in range(3))
    assert chen_product(chen_product(a, b), c).allclose(chen_product(a, chen_product(b, c)), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(small_dims, small_depths, seeds, st.floats(-2, 2))
def test_collinear_exponentials_compose(dim, depth, seed, lam):
    u = 0.7 * np.random.default_rng(seed).standard_normal(dim)
    lhs = chen_product(restricted_exp(u, depth), restricted_exp(lam * u, depth))
    assert lhs.allclose(restricted_exp((1 + lam) * u, depth), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(small_dims, small_depths, seeds)
def test_exponential_inverse(dim, depth, seed):
    v = np.random.default_rng(seed).standard_normal(dim)
    prod = chen_product(restricted_exp(v, depth), restricted_exp(-v, depth))
    assert prod.allclose(TruncatedTensor.identity(dim, depth), atol=1e-12)
