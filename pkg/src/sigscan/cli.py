"""Command-line entry points: ``sigcompute``, ``sigbench`` and ``sigtrain``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from sigscan.bench import BenchConfig, emit, monotonicity_report, run_grid
from sigscan.errors import PathParseError, SignatureError
from sigscan.kernels import KernelKind, signature, signature_stream
from sigscan.model import TrainConfig, train
from sigscan.oracle import signature_bruteforce

log = logging.getLogger("sigscan")


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def int_list(text: str) -> list[int]:
    return [positive_int(t) for t in text.split(",") if t.strip()]


def read_path_csv(path) -> np.ndarray:
    """Read one path: a row per time step, a column per channel, optional header."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, cells in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in cells]
            if not any(cells):
                continue
            try:
                values = [float(c) for c in cells]
            except ValueError:
                if not rows and width is None:
                    width = len(cells)  # header
                    continue
                raise PathParseError(f"non-numeric value in {cells}", lineno) from None
            if width is None:
                width = len(values)
            if len(values) != width:
                raise PathParseError(f"expected {width} columns, got {len(values)}", lineno)
            if not all(np.isfinite(values)):
                raise PathParseError("non-finite value", lineno)
            rows.append(values)
    if not rows:
        raise PathParseError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def read_paths(source) -> list[tuple[str, np.ndarray]]:
    source = Path(source)
    if source.is_dir():
        files = sorted(p for p in source.iterdir() if p.suffix.lower() == ".csv")
        if not files:
            raise PathParseError(f"{source}: no .csv files")
    else:
        files = [source]
    out = []
    for f in files:
        try:
            out.append((f.name, read_path_csv(f)))
        except PathParseError as exc:
            raise PathParseError(f"{f}: {exc}") from None
    return out


def _format_rows(rows) -> str:
    return "".join(",".join(format(float(x), ".17g") for x in row) + "\n" for row in rows)


def sigcompute_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sigcompute", description="Print the truncated signature of paths stored as CSV."
    )
    parser.add_argument("--input", required=True, help="CSV file, or a directory of CSV files for a batch")
    parser.add_argument("--depth", type=positive_int, required=True)
    parser.add_argument("--kernel", choices=[k.value for k in KernelKind], default="auto")
    parser.add_argument("--stream", action="store_true", help="emit every prefix signature")
    parser.add_argument("--oracle", action="store_true", help="use the brute-force enumeration (tiny paths)")
    parser.add_argument("--out", help="write here instead of stdout")
    args = parser.parse_args(argv)

    try:
        paths = read_paths(args.input)
        rows = []
        for _, path in paths:
            if args.oracle:
                if args.stream:
                    rows += [signature_bruteforce(path[: k + 2], args.depth) for k in range(len(path) - 1)]
                else:
                    rows.append(signature_bruteforce(path, args.depth))
            elif args.stream:
                rows += list(signature_stream(path, args.depth, args.kernel))
            else:
                rows.append(signature(path, args.depth, args.kernel))
    except (SignatureError, OSError) as exc:
        print(f"sigcompute: error: {exc}", file=sys.stderr)
        return 1
    text = _format_rows(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def sigbench_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sigbench", description="Time the signature kernels over a grid.")
    parser.add_argument("--batch-sizes", type=int_list)
    parser.add_argument("--seq-lens", type=int_list)
    parser.add_argument("--dims", type=int_list)
    parser.add_argument("--depths", type=int_list)
    parser.add_argument("--kernels", default="sequential,parallel")
    parser.add_argument("--repeats", type=positive_int, default=20)
    parser.add_argument("--warmup", type=int, default=3)
    parser.add_argument("--dtype", choices=["f64", "f32"], default="f64")
    parser.add_argument("--format", choices=["csv", "markdown"], default="csv")
    parser.add_argument("--out")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--memory-cap", type=positive_int, help="max intermediate scalars for the parallel kernel")
    parser.add_argument(
        "--paper-grid", action="store_true",
        help="one-factor sweeps of batch, length and depth around (128, 100, 4)",
    )
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)

    overrides = {
        name: value
        for name, value in (
            ("batch_sizes", args.batch_sizes),
            ("seq_lens", args.seq_lens),
            ("dims", args.dims),
            ("depths", args.depths),
        )
        if value is not None
    }
    common = dict(
        kernels=[k.strip() for k in args.kernels.split(",") if k.strip()],
        repeats=args.repeats,
        warmup=args.warmup,
        dtype=args.dtype,
        seed=args.seed,
        memory_cap=args.memory_cap,
    )
    try:
        if args.paper_grid:
            config = BenchConfig.paper_grid(**overrides, **common)
        else:
            config = BenchConfig(**overrides, **common)
        records = run_grid(
            config,
            progress=lambda r: log.info(
                "%s B=%d L=%d d=%d N=%d %s", r.kernel, r.batch, r.seq_len, r.dim, r.depth,
                "skipped" if r.skipped else f"{r.mean_ms:.3f} ms",
            ),
        )
        text = emit(records, args.format, args.out)
    except (SignatureError, OSError) as exc:
        print(f"sigbench: error: {exc}", file=sys.stderr)
        return 1
    for note in monotonicity_report(records):
        log.info("note: %s", note)
    if not args.out:
        sys.stdout.write(text)
    return 0


def sigtrain_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sigtrain", description="Train the dense -> signature -> dense model on synthetic data."
    )
    parser.add_argument("--seq-len", type=positive_int, default=100)
    parser.add_argument("--sig-input-size", type=positive_int, default=4)
    parser.add_argument("--depth", type=positive_int, default=3)
    parser.add_argument("--epochs", type=positive_int, default=10)
    parser.add_argument("--batch-size", type=positive_int, default=128)
    parser.add_argument("--samples", type=positive_int, default=1024)
    parser.add_argument("--lr", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--kernel", choices=[k.value for k in KernelKind], default="sequential")
    parser.add_argument("--activation", choices=["tanh", "identity"], default="tanh")
    parser.add_argument("--out", help="write the JSON report here instead of stdout")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)

    try:
        config = TrainConfig(
            n_samples=args.samples,
            seq_len=args.seq_len,
            sig_input_size=args.sig_input_size,
            depth=args.depth,
            batch_size=args.batch_size,
            epochs=args.epochs,
            learning_rate=args.lr,
            seed=args.seed,
            kernel=args.kernel,
            activation=args.activation,
        )
        report = train(config)
    except SignatureError as exc:
        print(f"sigtrain: error: {exc}", file=sys.stderr)
        return 1
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0
