import itertools

import numpy as np
import pytest

from sigscan.errors import ResourceError
from sigscan.kernels import signature_parallel, signature_sequential
from sigscan.oracle import OracleLimits, degree_term, run_weight, signature_bruteforce
from sigscan.tensor_algebra import flatten, restricted_exp


def test_run_weight():
    assert run_weight((0, 0)) == 0.5
    assert run_weight((0, 1)) == 1.0
    assert run_weight((1, 1, 1, 2)) == 1 / 6
    assert run_weight((0, 0, 2, 2)) == 0.25


def test_single_segment_is_exponential(rng):
    path = rng.standard_normal((2, 3))
    np.testing.assert_allclose(
        signature_bruteforce(path, 4), flatten(restricted_exp(path[1] - path[0], 4)), atol=1e-14
    )


def test_two_segments_hand_enumerated():
    path = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    np.testing.assert_allclose(signature_bruteforce(path, 2), [1, 1, 0.5, 1, 0, 0.5], atol=1e-15)


def test_degree_one_telescopes(rng):
    path = rng.standard_normal((7, 2))
    np.testing.assert_allclose(signature_bruteforce(path, 1), path[-1] - path[0], atol=1e-14)


def test_limits_enforced(rng):
    with pytest.raises(ResourceError):
        signature_bruteforce(rng.standard_normal((10, 2)), 2)
    with pytest.raises(ResourceError):
        signature_bruteforce(rng.standard_normal((3, 2)), 5)
    with pytest.raises(ResourceError):
        signature_bruteforce(rng.standard_normal((3, 4)), 2)
    signature_bruteforce(rng.standard_normal((3, 4)), 2, OracleLimits(max_dim=4))


@pytest.mark.parametrize("seed", range(20))
def test_matches_both_kernels(seed):
    rng = np.random.default_rng(seed)
    segments, dim, depth = rng.integers(1, 7), rng.integers(1, 4), rng.integers(1, 5)
    path = rng.standard_normal((segments + 1, dim))
    ref = signature_bruteforce(path, depth)
    tol = 1e-10 * (1 + np.max(np.abs(ref)))
    assert np.max(np.abs(signature_sequential(path, depth) - ref)) <= tol
    assert np.max(np.abs(signature_parallel(path, depth) - ref)) <= tol


def test_strict_sum_is_cross_terms(rng):
    diffs = rng.standard_normal((4, 2))
    full = degree_term(diffs, 3)
    with_runs = np.zeros(8)
    for idx in itertools.combinations_with_replacement(range(4), 3):
        if len(set(idx)) < 3:
            term = np.multiply.outer(np.multiply.outer(diffs[idx[0]], diffs[idx[1]]), diffs[idx[2]])
            with_runs += run_weight(idx) * term.reshape(-1)
    np.testing.assert_allclose(degree_term(diffs, 3, strict=True), full - with_runs, atol=1e-14)
