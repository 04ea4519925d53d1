"""Arithmetic in the truncated tensor algebra over R^d.

An element is stored as its levels 1..N; level ``n`` is a flat array of
``d**n`` coefficients in row-major multi-index order (last index fastest).
The degree-0 coefficient is always 1 and is never stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from sigscan.errors import DomainError


def sig_dim(d: int, depth: int) -> int:
    """Number of stored coefficients of a depth-``depth`` signature over R^d."""
    if int(d) != d or int(depth) != depth or d < 1 or depth < 1:
        raise DomainError(f"need d >= 1 and depth >= 1, got d={d}, depth={depth}")
    d, depth = int(d), int(depth)
    return sum(d**n for n in range(1, depth + 1))


def level_offsets(d: int, depth: int) -> list[int]:
    """Start offsets of each level inside a flat signature, plus the end."""
    offsets = [0]
    for n in range(1, depth + 1):
        offsets.append(offsets[-1] + d**n)
    return offsets


def tensor_product(a, b, max_degree: int | None = None) -> np.ndarray:
    """Outer product of a degree-p and a degree-q tensor over the same R^d.

    Args:
        a: Array of shape ``(d,) * p``.
        b: Array of shape ``(d,) * q``.
        max_degree: Optional cap on ``p + q``.

    Returns:
        Array of shape ``(d,) * (p + q)`` with
        ``out[i..., j...] = a[i...] * b[j...]``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    dims = set(a.shape) | set(b.shape)
    if a.ndim == 0 or b.ndim == 0 or len(dims) != 1:
        raise DomainError(
            f"operands must be tensors over one common R^d, got shapes {a.shape} and {b.shape}"
        )
    if max_degree is not None and a.ndim + b.ndim > max_degree:
        raise DomainError(f"product degree {a.ndim + b.ndim} exceeds cap {max_degree}")
    return np.multiply.outer(a, b)


@dataclass(eq=False)
class TruncatedTensor:
    """Element of the depth-``depth`` truncated tensor algebra over R^``dim``.

    ``levels[n - 1]`` holds the ``dim**n`` degree-n coefficients.
    """

    dim: int
    depth: int
    levels: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        sig_dim(self.dim, self.depth)
        if not self.levels:
            self.levels = [np.zeros(self.dim**n) for n in range(1, self.depth + 1)]
        if len(self.levels) != self.depth:
            raise DomainError(f"expected {self.depth} levels, got {len(self.levels)}")
        levels = []
        for n, level in enumerate(self.levels, start=1):
            level = np.asarray(level, dtype=float).reshape(-1)
            if level.size != self.dim**n:
                raise DomainError(
                    f"level {n} needs {self.dim**n} coefficients, got {level.size}"
                )
            if not np.all(np.isfinite(level)):
                raise DomainError(f"level {n} has non-finite coefficients")
            levels.append(level)
        self.levels = levels

    @classmethod
    def identity(cls, dim: int, depth: int) -> TruncatedTensor:
        return cls(dim, depth)

    def __eq__(self, other):
        if not isinstance(other, TruncatedTensor):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.depth == other.depth
            and all(np.array_equal(x, y) for x, y in zip(self.levels, other.levels))
        )

    def __matmul__(self, other: TruncatedTensor) -> TruncatedTensor:
        return chen_product(self, other)

    def allclose(self, other: TruncatedTensor, atol: float = 1e-12, rtol: float = 0.0) -> bool:
        return (
            self.dim == other.dim
            and self.depth == other.depth
            and all(np.allclose(x, y, atol=atol, rtol=rtol) for x, y in zip(self.levels, other.levels))
        )


def restricted_exp(v, depth: int) -> TruncatedTensor:
    """Truncated tensor exponential ``(v, v⊗v/2!, ..., v^⊗N/N!)`` of a vector."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size == 0:
        raise DomainError("vector must have at least one channel")
    if not np.all(np.isfinite(v)):
        raise DomainError("vector has non-finite entries")
    sig_dim(v.size, depth)
    levels = [v.copy()]
    for n in range(2, depth + 1):
        levels.append(np.outer(levels[-1], v / n).reshape(-1))
    return TruncatedTensor(v.size, depth, levels)


def chen_product(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Product of two group-like truncated tensors.

    Level n is ``a_n + b_n + sum_{i+j=n, i,j>=1} a_i ⊗ b_j``, which is the
    signature of the concatenated path when ``a`` and ``b`` are signatures.
    """
    if a.dim != b.dim or a.depth != b.depth:
        raise DomainError(
            f"operands differ: dim {a.dim} vs {b.dim}, depth {a.depth} vs {b.depth}"
        )
    out = []
    for n in range(1, a.depth + 1):
        c = a.levels[n - 1] + b.levels[n - 1]
        for i in range(1, n):
            c = c + np.outer(a.levels[i - 1], b.levels[n - i - 1]).reshape(-1)
        out.append(c)
    return TruncatedTensor(a.dim, a.depth, out)


def flatten(t: TruncatedTensor) -> np.ndarray:
    """Concatenate levels 1..N into one flat coefficient vector."""
    return np.concatenate(t.levels)


def unflatten(coeffs, dim: int, depth: int) -> TruncatedTensor:
    """Inverse of :func:`flatten`."""
    coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
    expected = sig_dim(dim, depth)
    if coeffs.size != expected:
        raise DomainError(
            f"flat signature for dim={dim}, depth={depth} needs {expected} values, got {coeffs.size}"
        )
    offsets = level_offsets(dim, depth)
    return TruncatedTensor(
        dim, depth, [coeffs[offsets[n]:offsets[n + 1]].copy() for n in range(depth)]
    )


def depth_from_width(width: int, dim: int) -> int:
    """Recover the depth N from a flat signature width and channel count."""
    for depth in range(1, 64):
        size = sig_dim(dim, depth)
        if size == width:
            return depth
        if size > width:
            break
    raise DomainError(f"width {width} is not a signature size for dim={dim}")

