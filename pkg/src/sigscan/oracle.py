"""Brute-force signatures by enumerating weakly increasing segment tuples.

For a piecewise-linear path with segments ΔX_1..ΔX_M, the degree-n term is

    sum over j_1 <= ... <= j_n of ΔX_{j_1} ⊗ ... ⊗ ΔX_{j_n} / prod_b m_b!

where the m_b are the lengths of the runs of equal indices. This shares no
code with the kernels and costs O(M^n) per degree, so it is for tiny inputs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from sigscan.errors import DomainError, ResourceError


@dataclass(frozen=True)
class OracleLimits:
    max_segments: int = 8
    max_depth: int = 4
    max_dim: int = 3


def run_weight(indices) -> float:
    """``1 / prod(m_b!)`` over the runs of equal consecutive indices."""
    return 1.0 / math.prod(math.factorial(sum(1 for _ in run)) for _, run in itertools.groupby(indices))


def degree_term(diffs: np.ndarray, degree: int, strict: bool = False) -> np.ndarray:
    """Degree-``degree`` block as a flat ``d**degree`` vector.

    With ``strict=True`` only strictly increasing tuples are summed, all with
    weight 1 (the cross terms without any repeated segment).
    """
    segments, dim = diffs.shape
    total = np.zeros((dim,) * degree)
    tuples = (
        itertools.combinations(range(segments), degree)
        if strict
        else itertools.combinations_with_replacement(range(segments), degree)
    )
    for idx in tuples:
        term = reduce(np.multiply.outer, (diffs[j] for j in idx))
        total += term if strict else run_weight(idx) * term
    return total.reshape(-1)


def signature_bruteforce(path, depth: int, limits: OracleLimits = OracleLimits()) -> np.ndarray:
    """Flat depth-``depth`` signature of a single ``(L, d)`` path."""
    path = np.asarray(path, dtype=np.float64)
    if path.ndim != 2 or path.shape[0] < 1 or path.shape[1] < 1:
        raise DomainError(f"oracle takes a single (L, d) path, got shape {path.shape}")
    if depth < 1:
        raise DomainError(f"depth must be >= 1, got {depth}")
    segments, dim = path.shape[0] - 1, path.shape[1]
    if segments > limits.max_segments or depth > limits.max_depth or dim > limits.max_dim:
        raise ResourceError(
            f"oracle limited to {limits.max_segments} segments, depth {limits.max_depth}, "
            f"dim {limits.max_dim}; got {segments}, {depth}, {dim}"
        )
    diffs = np.array([path[i + 1] - path[i] for i in range(segments)]).reshape(segments, dim)
    return np.concatenate([degree_term(diffs, n) for n in range(1, depth + 1)])
