"""Reverse-mode derivatives of the signature with respect to path points."""

from __future__ import annotations

import numpy as np

from sigscan.errors import DomainError
from sigscan.kernels import (
    ExecutionEnv,
    KernelKind,
    as_path_batch,
    exp_levels,
    parallel_forward,
    select_kernel,
    signature,
    signature_stream,
)
from sigscan.tensor_algebra import level_offsets, sig_dim


def _split(flat: np.ndarray, dim: int, depth: int) -> list[np.ndarray]:
    offsets = level_offsets(dim, depth)
    return [flat[..., offsets[n]:offsets[n + 1]] for n in range(depth)]


def _contract_right(g: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``sum_j g[..., i, j] b[..., j]`` with g flat over ``(i, j)``."""
    g = g.reshape(*b.shape[:-1], -1, b.shape[-1])
    return (g @ b[..., None])[..., 0]


def _contract_left(a: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``sum_i a[..., i] g[..., i, j]`` with g flat over ``(i, j)``."""
    g = g.reshape(*a.shape[:-1], a.shape[-1], -1)
    return (a[..., None, :] @ g)[..., 0, :]


def exp_vjp(delta: np.ndarray, grads: list[np.ndarray]) -> np.ndarray:
    """Pull cotangents on ``exp_levels(delta)`` back to ``delta``."""
    depth = len(grads)
    levels = exp_levels(delta, depth)
    grads = [g.copy() for g in grads]
    out = np.zeros_like(delta)
    for m in range(depth, 1, -1):
        grads[m - 2] += _contract_right(grads[m - 1], delta / m)
        out += _contract_left(levels[m - 2], grads[m - 1]) / m
    return out + grads[0]


def _increment_grad_to_points(g_diffs: np.ndarray, length: int) -> np.ndarray:
    batch, _, dim = g_diffs.shape
    out = np.zeros((batch, length, dim), dtype=g_diffs.dtype)
    out[:, 1:] += g_diffs
    out[:, :-1] -= g_diffs
    return out


def _vjp_sequential(arr, depth, cot_levels):
    batch, length, dim = arr.shape
    diffs = np.diff(arr, axis=1)
    states = signature_stream(arr, depth, KernelKind.SEQUENTIAL)
    grad = [g.copy() for g in cot_levels]
    g_diffs = np.zeros_like(diffs)
    for k in range(length - 2, -1, -1):
        seg = exp_levels(diffs[:, k], depth)
        if k > 0:
            prev = _split(states[:, k - 1], dim, depth)
        else:
            prev = [np.zeros_like(s) for s in seg]
        g_prev = [g.copy() for g in grad]
        g_seg = [g.copy() for g in grad]
        for n in range(2, depth + 1):
            for i in range(1, n):
                g_prev[i - 1] += _contract_right(grad[n - 1], seg[n - i - 1])
                g_seg[n - i - 1] += _contract_left(prev[i - 1], grad[n - 1])
        g_diffs[:, k] = exp_vjp(diffs[:, k], g_seg)
        grad = g_prev
    return _increment_grad_to_points(g_diffs, length)


def _vjp_parallel(arr, depth, cot_levels, memory_cap):
    length = arr.shape[1]
    diffs = np.diff(arr, axis=1)
    seg_exp, prefix, levels = parallel_forward(diffs, depth, memory_cap=memory_cap)
    g_levels = [np.zeros_like(s) for s in levels]
    for n in range(depth):
        g_levels[n][:, -1] = cot_levels[n]
    g_seg = [np.zeros_like(e) for e in seg_exp]
    for n in range(depth, 0, -1):
        # adjoint of the inclusive cumsum is a reversed cumsum
        g_contrib = np.flip(np.cumsum(np.flip(g_levels[n - 1], axis=1), axis=1), axis=1)
        g_seg[n - 1] += g_contrib
        for k in range(1, n):
            m = n - k
            g_prefix = _contract_right(g_contrib, seg_exp[k - 1])
            g_levels[m - 1][:, :-1] += g_prefix[:, 1:]
            g_seg[k - 1] += _contract_left(prefix[m - 1], g_contrib)
    g_diffs = exp_vjp(diffs, g_seg)
    return _increment_grad_to_points(g_diffs, length)


def signature_vjp(
    paths,
    depth: int,
    cotangent,
    kernel=KernelKind.AUTO,
    env: ExecutionEnv | None = None,
    memory_cap: int | None = None,
) -> np.ndarray:
    """Gradient of ``<cotangent, signature(paths)>`` with respect to the path points.

    Args:
        paths: ``(B, L, d)`` batch or a single ``(L, d)`` path.
        depth: Signature depth N.
        cotangent: ``(B, D)`` (or ``(D,)`` for a single path) upstream gradient.
        kernel: Which forward kernel to differentiate through.

    Returns:
        Array shaped like ``paths``.
    """
    arr, single = as_path_batch(paths)
    batch, length, dim = arr.shape
    width = sig_dim(dim, depth)
    cot = np.asarray(cotangent, dtype=arr.dtype)
    if single and cot.ndim == 1:
        cot = cot[None]
    if cot.shape != (batch, width):
        raise DomainError(f"cotangent must have shape {(batch, width)}, got {np.shape(cotangent)}")
    if length == 1:
        out = np.zeros_like(arr)
    else:
        cot_levels = _split(cot, dim, depth)
        kind = select_kernel(kernel, env, length)
        if kind is KernelKind.PARALLEL:
            out = _vjp_parallel(arr, depth, cot_levels, memory_cap)
        else:
            out = _vjp_sequential(arr, depth, cot_levels)
    return out[0] if single else out


def finite_diff_grad(paths, depth: int, cotangent, h: float = 1e-5, kernel=KernelKind.SEQUENTIAL) -> np.ndarray:
    """Central-difference estimate of :func:`signature_vjp`; small inputs only."""
    if h <= 0:
        raise DomainError(f"step must be positive, got {h}")
    arr, single = as_path_batch(paths)
    cot = np.asarray(cotangent, dtype=np.float64).reshape(arr.shape[0], -1)
    out = np.zeros_like(arr)
    for idx in np.ndindex(*arr.shape):
        plus = arr.copy()
        minus = arr.copy()
        plus[idx] += h
        minus[idx] -= h
        b = idx[0]
        f_plus = cot[b] @ signature(plus[b:b + 1], depth, kernel)[0]
        f_minus = cot[b] @ signature(minus[b:b + 1], depth, kernel)[0]
        out[idx] = (f_plus - f_minus) / (2 * h)
    return out[0] if single else out
