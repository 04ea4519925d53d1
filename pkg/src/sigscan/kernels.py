"""Batched signature kernels.

Two interchangeable algorithms compute the same depth-N signature of a
batch of piecewise-linear paths ``X`` of shape ``(B, L, d)``:

* ``sequential``: left fold of restricted exponentials of the increments
  with the Chen product. ``L - 1`` dependent steps, O(B * D) working memory.
* ``parallel``: one pass per degree. Each pass builds the per-step
  contribution to that degree for every time step at once (batched outer
  products against the exclusive prefix sums of lower degrees) and then
  runs a single cumulative sum along the sequence axis. ``N`` dependent
  passes regardless of ``L``, O(B * L * D) working memory.

Flat outputs use degree-ascending, row-major order (see ``tensor_algebra``).
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass

import numpy as np

from sigscan.errors import DomainError, ResourceError
from sigscan.tensor_algebra import sig_dim

DEFAULT_MEMORY_CAP = 2**31
DEFAULT_SEQ_LEN_THRESHOLD = 64


class KernelKind(str, enum.Enum):
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"
    AUTO = "auto"

    @classmethod
    def parse(cls, value) -> KernelKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown kernel {value!r}; choose from {[k.value for k in cls]}") from None


@dataclass(frozen=True)
class ExecutionEnv:
    """What the host can do, as far as kernel choice is concerned.

    ``accelerator`` marks hardware with wide vector units or a GPU, where the
    parallel kernel pays off for sequences at least ``seq_len_threshold`` long.
    """

    accelerator: bool = False
    seq_len_threshold: int = DEFAULT_SEQ_LEN_THRESHOLD

    @classmethod
    def from_environment(cls) -> ExecutionEnv:
        flag = os.environ.get("SIGSCAN_ACCELERATOR", "").strip().lower()
        threshold = os.environ.get("SIGSCAN_SEQ_LEN_THRESHOLD")
        return cls(
            accelerator=flag in {"1", "true", "yes", "on"},
            seq_len_threshold=int(threshold) if threshold else DEFAULT_SEQ_LEN_THRESHOLD,
        )


@dataclass
class KernelStats:
    """Per-call instrumentation filled in by the kernels.

    ``fold_steps`` counts Chen products in the sequential kernel and
    ``scan_passes`` counts cumulative sums in the parallel kernel.
    """

    kernel: KernelKind | None = None
    fold_steps: int = 0
    scan_passes: int = 0
    peak_elements: int = 0

    @property
    def counter(self) -> int:
        return self.fold_steps if self.kernel is KernelKind.SEQUENTIAL else self.scan_passes


def select_kernel(hint, env: ExecutionEnv | None = None, seq_len: int | None = None) -> KernelKind:
    """Resolve ``hint`` to a concrete kernel.

    Explicit kinds pass through. ``AUTO`` picks the parallel kernel only on an
    accelerator and for sequences of at least ``env.seq_len_threshold`` points.
    """
    hint = KernelKind.parse(hint)
    if hint is not KernelKind.AUTO:
        return hint
    env = env if env is not None else ExecutionEnv.from_environment()
    if env.accelerator and (seq_len is None or seq_len >= env.seq_len_threshold):
        return KernelKind.PARALLEL
    return KernelKind.SEQUENTIAL


def as_path_batch(paths) -> tuple[np.ndarray, bool]:
    """Validate paths and return a ``(B, L, d)`` array plus a "was single" flag.

    float32 input stays float32; everything else is promoted to float64.
    """
    arr = np.asarray(paths)
    if arr.dtype != np.float32:
        arr = arr.astype(np.float64)
    single = arr.ndim == 2
    if single:
        arr = arr[None]
    if arr.ndim != 3:
        raise DomainError(f"paths must have shape (B, L, d) or (L, d), got {np.shape(paths)}")
    batch, length, dim = arr.shape
    if batch < 1 or length < 1 or dim < 1:
        raise DomainError(f"paths need B, L, d >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("paths contain non-finite values")
    return arr, single


def _check_depth(depth) -> int:
    if int(depth) != depth or depth < 1:
        raise DomainError(f"depth must be a positive integer, got {depth}")
    return int(depth)


def increments(paths) -> np.ndarray:
    """``X[:, i + 1] - X[:, i]``, shape ``(B, L - 1, d)``; empty when ``L == 1``."""
    arr, single = as_path_batch(paths)
    diffs = np.diff(arr, axis=1)
    return diffs[0] if single else diffs


def scaled_increments(diffs, depth: int) -> list[np.ndarray]:
    """Pre-divided increments ``[ΔX / n! for n in 1..depth]`` (index 0 is ΔX itself)."""
    diffs = np.asarray(diffs)
    return [diffs / math.factorial(n) for n in range(1, _check_depth(depth) + 1)]


def outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Outer product over the last axis, keeping all leading axes."""
    return (a[..., :, None] * b[..., None, :]).reshape(*a.shape[:-1], -1)


def exp_levels(delta: np.ndarray, depth: int) -> list[np.ndarray]:
    """Batched restricted exponential; level n has shape ``(..., d**n)``."""
    levels = [delta]
    for n in range(2, depth + 1):
        levels.append(outer(levels[-1], delta / n))
    return levels


def chen_step(state: list[np.ndarray], seg: list[np.ndarray]) -> list[np.ndarray]:
    """Batched ``state ⊠ seg`` on per-level arrays."""
    depth = len(state)
    out = []
    for n in range(1, depth + 1):
        c = state[n - 1] + seg[n - 1]
        for i in range(1, n):
            c = c + outer(state[i - 1], seg[n - i - 1])
        out.append(c)
    return out


def _zeros_flat(batch, dim, depth, dtype, prefix=()):
    return np.zeros((batch, *prefix, sig_dim(dim, depth)), dtype=dtype)


def _sequential(arr: np.ndarray, depth: int, stats: KernelStats | None, stream: bool):
    batch, length, dim = arr.shape
    diffs = np.diff(arr, axis=1)
    if stream:
        out = _zeros_flat(batch, dim, depth, arr.dtype, (length - 1,))
    state = None
    steps = 0
    for k in range(length - 1):
        seg = exp_levels(diffs[:, k], depth)
        # absorbing the first segment is the product with the identity
        state = seg if state is None else chen_step(state, seg)
        steps += 1
        if stream:
            out[:, k] = np.concatenate(state, axis=-1)
    if stats is not None:
        stats.kernel = KernelKind.SEQUENTIAL
        stats.fold_steps = steps
        stats.peak_elements = batch * sig_dim(dim, depth)
    if stream:
        return out
    if state is None:
        return _zeros_flat(batch, dim, depth, arr.dtype)
    return np.concatenate(state, axis=-1)


def parallel_levels(
    diffs: np.ndarray,
    depth: int,
    stats: KernelStats | None = None,
    memory_cap: int | None = None,
) -> list[np.ndarray]:
    """Prefix signatures of every path prefix, one array per degree.

    Args:
        diffs: Increments of shape ``(B, M, d)`` with ``M >= 1``.
        depth: Truncation depth N.
        stats: Optional instrumentation handle.
        memory_cap: Largest allowed ``B * M * d**N``.

    Returns:
        ``[S_1, ..., S_N]`` with ``S_n`` of shape ``(B, M, d**n)``; ``S_n[:, k]``
        is the degree-n signature of the first ``k + 1`` segments.
    """
    return parallel_forward(diffs, depth, stats, memory_cap)[2]


def parallel_forward(diffs, depth, stats=None, memory_cap=None):
    """Run the scan passes and keep the intermediates needed for a backward pass.

    Returns ``(seg_exp, prefix, levels)``: ``seg_exp[k-1]`` is ``ΔX^{⊗k}/k!`` per
    step, ``prefix[m-1]`` the exclusive prefix sum of degree m (m < N), and
    ``levels`` the inclusive prefix signatures.

    Degree n at step j receives ``sum_{k=1..n} S_{n-k}[j-1] ⊗ ΔX_j^{⊗k} / k!``
    with ``S_0 = 1`` and ``S_m[-1] = 0``. All steps are formed at once and
    then accumulated with one cumulative sum.
    """
    batch, segments, dim = diffs.shape
    cap = DEFAULT_MEMORY_CAP if memory_cap is None else memory_cap
    need = batch * segments * dim**depth
    if need > cap:
        raise ResourceError(
            f"parallel kernel needs {need} intermediate scalars at the top degree "
            f"(cap {cap}); use the sequential kernel or a smaller batch"
        )
    scaled = scaled_increments(diffs, depth)
    # power is ΔX^{⊗(k-1)} unscaled, so power ⊗ ΔX/k! = ΔX^{⊗k}/k!
    power = None
    seg_exp = []
    for k in range(1, depth + 1):
        seg_exp.append(scaled[k - 1] if power is None else outer(power, scaled[k - 1]))
        if k < depth:
            power = diffs if power is None else outer(power, diffs)
    del power

    prefix = []
    levels = []
    passes = 0
    for n in range(1, depth + 1):
        contrib = seg_exp[n - 1].copy()
        for k in range(1, n):
            contrib += outer(prefix[n - k - 1], seg_exp[k - 1])
        s_n = np.cumsum(contrib, axis=1)
        passes += 1
        levels.append(s_n)
        if n < depth:
            shifted = np.zeros_like(s_n)
            shifted[:, 1:] = s_n[:, :-1]
            prefix.append(shifted)
    if stats is not None:
        stats.kernel = KernelKind.PARALLEL
        stats.scan_passes = passes
        stats.peak_elements = 3 * batch * segments * sig_dim(dim, depth)
    return seg_exp, prefix, levels


def _parallel(arr, depth, stats, stream, memory_cap):
    batch, length, dim = arr.shape
    if length == 1:
        if stream:
            return _zeros_flat(batch, dim, depth, arr.dtype, (0,))
        if stats is not None:
            stats.kernel = KernelKind.PARALLEL
            stats.scan_passes = depth
        return _zeros_flat(batch, dim, depth, arr.dtype)
    levels = parallel_levels(np.diff(arr, axis=1), depth, stats, memory_cap)
    if stream:
        return np.concatenate(levels, axis=-1)
    return np.concatenate([s[:, -1] for s in levels], axis=-1)


def signature_sequential(paths, depth: int, stats: KernelStats | None = None) -> np.ndarray:
    """Signature by the sequential Chen fold.

    Returns ``(B, D)`` for ``(B, L, d)`` input or ``(D,)`` for a single ``(L, d)``
    path. ``L == 1`` gives the identity (all zeros).
    """
    arr, single = as_path_batch(paths)
    out = _sequential(arr, _check_depth(depth), stats, stream=False)
    return out[0] if single else out


def signature_parallel(
    paths, depth: int, stats: KernelStats | None = None, memory_cap: int | None = None
) -> np.ndarray:
    """Signature by per-degree cumulative-sum passes.

    Same output contract as :func:`signature_sequential`. Raises
    :class:`ResourceError` if ``B * (L - 1) * d**N`` exceeds ``memory_cap``.
    """
    arr, single = as_path_batch(paths)
    out = _parallel(arr, _check_depth(depth), stats, False, memory_cap)
    return out[0] if single else out


def signature(
    paths,
    depth: int,
    kernel=KernelKind.AUTO,
    env: ExecutionEnv | None = None,
    stats: KernelStats | None = None,
    memory_cap: int | None = None,
) -> np.ndarray:
    """Signature of a path or batch of paths using the selected kernel."""
    arr, single = as_path_batch(paths)
    depth = _check_depth(depth)
    kind = select_kernel(kernel, env, arr.shape[1])
    if kind is KernelKind.PARALLEL:
        out = _parallel(arr, depth, stats, False, memory_cap)
    else:
        out = _sequential(arr, depth, stats, stream=False)
    return out[0] if single else out


def signature_stream(
    paths,
    depth: int,
    kernel=KernelKind.AUTO,
    env: ExecutionEnv | None = None,
    stats: KernelStats | None = None,
    memory_cap: int | None = None,
) -> np.ndarray:
    """Signatures of every prefix, shape ``(B, L - 1, D)``.

    Row ``k`` is the signature of points ``0..k+1``; the last row equals
    :func:`signature` for the same kernel.
    """
    arr, single = as_path_batch(paths)
    depth = _check_depth(depth)
    if arr.shape[1] < 2:
        raise DomainError("stream output needs at least two points per path")
    kind = select_kernel(kernel, env, arr.shape[1])
    if kind is KernelKind.PARALLEL:
        out = _parallel(arr, depth, stats, True, memory_cap)
    else:
        out = _sequential(arr, depth, stats, stream=True)
    return out[0] if single else out
