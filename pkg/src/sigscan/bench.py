"""Timing grids for the signature kernels."""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from sigscan.errors import DomainError, ResourceError
from sigscan.kernels import KernelKind, KernelStats, signature

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "kernel", "batch", "seq_len", "dim", "depth", "dtype",
    "reps", "mean_ms", "std_ms", "min_ms", "counter",
]
DTYPES = {"f64": np.float64, "f32": np.float32}

# one-factor-at-a-time sweeps around (batch 128, length 100, depth 4)
PAPER_BATCH_SIZES = [32, 64, 128, 256, 512]
PAPER_SEQ_LENS = [50, 100, 200, 500, 1000]
PAPER_DEPTHS = [2, 3, 4, 5, 6]
PAPER_CENTER = (128, 100, 4)
PAPER_DIM = 3


@dataclass
class BenchConfig:
    """Grid definition.

    ``layout="product"`` takes the cartesian product of all lists.
    ``layout="one-factor"`` sweeps each of batch, length and depth in turn
    while holding the other two at ``center``, as the published tables do.
    """

    batch_sizes: list[int] = field(default_factory=lambda: [PAPER_CENTER[0]])
    seq_lens: list[int] = field(default_factory=lambda: [PAPER_CENTER[1]])
    dims: list[int] = field(default_factory=lambda: [PAPER_DIM])
    depths: list[int] = field(default_factory=lambda: [PAPER_CENTER[2]])
    kernels: list[str] = field(default_factory=lambda: ["sequential", "parallel"])
    repeats: int = 20
    warmup: int = 3
    dtype: str = "f64"
    seed: int = 0
    layout: str = "product"
    center: tuple[int, int, int] = PAPER_CENTER
    memory_cap: int | None = None

    def __post_init__(self):
        for name in ("batch_sizes", "seq_lens", "dims", "depths"):
            values = getattr(self, name)
            if not values or any(v < 1 for v in values):
                raise DomainError(f"{name} must be a non-empty list of positive integers")
        if self.repeats < 1:
            raise DomainError("repeats must be >= 1")
        if self.warmup < 0:
            raise DomainError("warmup must be >= 0")
        if self.dtype not in DTYPES:
            raise DomainError(f"dtype must be one of {list(DTYPES)}")
        if self.layout not in ("product", "one-factor"):
            raise DomainError(f"unknown layout {self.layout!r}")
        self.kernels = [KernelKind.parse(k).value for k in self.kernels]
        if "auto" in self.kernels:
            raise DomainError("benchmark concrete kernels only")

    @classmethod
    def paper_grid(cls, **overrides) -> BenchConfig:
        kwargs = dict(
            batch_sizes=list(PAPER_BATCH_SIZES),
            seq_lens=list(PAPER_SEQ_LENS),
            depths=list(PAPER_DEPTHS),
            layout="one-factor",
        )
        kwargs.update(overrides)
        return cls(**kwargs)

    def grid_points(self) -> list[tuple[int, int, int, int]]:
        """``(batch, seq_len, dim, depth)`` tuples in run order."""
        if self.layout == "product":
            return [
                (b, s, d, n)
                for d, b, s, n in itertools.product(self.dims, self.batch_sizes, self.seq_lens, self.depths)
            ]
        cb, cs, cn = self.center
        points = []
        for d in self.dims:
            points += [(b, cs, d, cn) for b in self.batch_sizes]
            points += [(cb, s, d, cn) for s in self.seq_lens]
            points += [(cb, cs, d, n) for n in self.depths]
        return points


@dataclass
class BenchRecord:
    kernel: str
    batch: int
    seq_len: int
    dim: int
    depth: int
    dtype: str
    reps: int
    mean_ms: float = math.nan
    std_ms: float = math.nan
    min_ms: float = math.nan
    counter: int | None = None
    threads: int = 1
    checksum: float = math.nan
    skipped: str | None = None

    @property
    def counter_name(self) -> str:
        return "fold_steps" if self.kernel == "sequential" else "scan_passes"

    def row(self) -> list:
        if self.skipped:
            timing = ["", "", "", ""]
        else:
            timing = [f"{self.mean_ms:.6g}", f"{self.std_ms:.6g}", f"{self.min_ms:.6g}", self.counter]
        return [self.kernel, self.batch, self.seq_len, self.dim, self.depth, self.dtype, self.reps, *timing]


def _point_seed(seed, point):
    return np.random.SeedSequence([seed, *point])


def time_kernel(paths, depth, kernel, repeats, warmup, memory_cap=None):
    """Return ``(times_ms, stats, output)`` for repeated calls on one input."""
    for _ in range(warmup):
        signature(paths, depth, kernel, memory_cap=memory_cap)
    times = []
    stats = KernelStats()
    out = None
    for _ in range(repeats):
        stats = KernelStats()
        t0 = time.perf_counter()
        out = signature(paths, depth, kernel, stats=stats, memory_cap=memory_cap)
        times.append((time.perf_counter() - t0) * 1e3)
    return times, stats, out


def run_grid(config: BenchConfig, progress=None) -> list[BenchRecord]:
    """Time every grid point with every configured kernel.

    Points the parallel kernel cannot hold in memory become skipped records.
    """
    records = []
    dtype = DTYPES[config.dtype]
    for point in config.grid_points():
        batch, seq_len, dim, depth = point
        rng = np.random.default_rng(_point_seed(config.seed, point))
        paths = rng.standard_normal((batch, seq_len, dim)).astype(dtype)
        for kernel in config.kernels:
            rec = BenchRecord(kernel, batch, seq_len, dim, depth, config.dtype, config.repeats)
            try:
                times, stats, out = time_kernel(
                    paths, depth, kernel, config.repeats, config.warmup, config.memory_cap
                )
            except ResourceError as exc:
                rec.skipped = str(exc)
                log.warning("skipped %s at %s: %s", kernel, point, exc)
            else:
                rec.mean_ms = statistics.fmean(times)
                rec.std_ms = statistics.pstdev(times) if len(times) > 1 else 0.0
                rec.min_ms = min(times)
                rec.counter = stats.counter
                rec.checksum = float(np.sum(out, dtype=np.float64))
            records.append(rec)
            if progress is not None:
                progress(rec)
    return records


def to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def to_markdown(records) -> str:
    header = "| Kernel | Batch Size | Seq. length | Dim | Depth | dtype | Mean (ms) | Std (ms) | Min (ms) | Counter |"
    lines = [header, "|" + "---|" * 10]
    for rec in records:
        if rec.skipped:
            cells = [rec.kernel, rec.batch, rec.seq_len, rec.dim, rec.depth, rec.dtype, "skipped", "", "", ""]
        else:
            cells = [
                rec.kernel, rec.batch, rec.seq_len, rec.dim, rec.depth, rec.dtype,
                f"{rec.mean_ms:.4g}", f"{rec.std_ms:.3g}", f"{rec.min_ms:.4g}",
                f"{rec.counter_name}={rec.counter}",
            ]
        lines.append("| " + " | ".join(str(c) for c in cells) + " |")
    return "\n".join(lines) + "\n"


def emit(records, fmt: str = "csv", path=None) -> str:
    """Render records as CSV or a markdown table, writing to ``path`` if given."""
    if fmt == "csv":
        text = to_csv(records)
    elif fmt == "markdown":
        text = to_markdown(records)
    else:
        raise DomainError(f"unknown format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def monotonicity_report(records, slack: float = 0.1) -> list[str]:
    """Flag sequential timings that drop as length grows at fixed (B, d, N).

    Informational only; ``slack`` is the relative drop tolerated as noise.
    """
    groups = {}
    for rec in records:
        if rec.kernel == "sequential" and not rec.skipped:
            groups.setdefault((rec.batch, rec.dim, rec.depth), {})[rec.seq_len] = rec.mean_ms
    notes = []
    for (batch, dim, depth), by_len in sorted(groups.items()):
        lens = sorted(by_len)
        for short, long in zip(lens, lens[1:]):
            if by_len[long] < by_len[short] * (1 - slack):
                notes.append(
                    f"sequential B={batch} d={dim} N={depth}: L={long} ({by_len[long]:.3g} ms) "
                    f"faster than L={short} ({by_len[short]:.3g} ms)"
                )
    return notes
