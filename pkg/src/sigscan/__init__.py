"""Path signatures by sequential Chen fold or parallel cumulative-sum scan."""

from sigscan.autodiff import finite_diff_grad, signature_vjp
from sigscan.errors import DomainError, PathParseError, ResourceError, SignatureError, TrainingError
from sigscan.kernels import (
    ExecutionEnv,
    KernelKind,
    KernelStats,
    increments,
    scaled_increments,
    select_kernel,
    signature,
    signature_parallel,
    signature_sequential,
    signature_stream,
)
from sigscan.oracle import OracleLimits, signature_bruteforce
from sigscan.tensor_algebra import (
    TruncatedTensor,
    chen_product,
    flatten,
    restricted_exp,
    sig_dim,
    tensor_product,
    unflatten,
)

__all__ = [
    "DomainError",
    "ExecutionEnv",
    "KernelKind",
    "KernelStats",
    "OracleLimits",
    "PathParseError",
    "ResourceError",
    "SignatureError",
    "TrainingError",
    "TruncatedTensor",
    "chen_product",
    "finite_diff_grad",
    "flatten",
    "increments",
    "restricted_exp",
    "scaled_increments",
    "select_kernel",
    "sig_dim",
    "signature",
    "signature_bruteforce",
    "signature_parallel",
    "signature_sequential",
    "signature_stream",
    "signature_vjp",
    "tensor_product",
    "unflatten",
]
