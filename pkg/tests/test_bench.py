import csv
import io

import numpy as np
import pytest

from sigscan.bench import (
    CSV_COLUMNS,
    BenchConfig,
    BenchRecord,
    emit,
    monotonicity_report,
    run_grid,
)
from sigscan.errors import DomainError


def tiny(**kw):
    base = dict(batch_sizes=[2], seq_lens=[5], dims=[2], depths=[2], repeats=1, warmup=0)
    base.update(kw)
    return BenchConfig(**base)


def test_paper_grid_has_fifteen_points():
    cfg = BenchConfig.paper_grid()
    points = cfg.grid_points()
    assert len(points) == 15
    assert points[0] == (32, 100, 3, 4)
    assert points.count((128, 100, 3, 4)) == 3
    assert [p[1] for p in points[5:10]] == [50, 100, 200, 500, 1000]
    assert [p[3] for p in points[10:]] == [2, 3, 4, 5, 6]


def test_product_layout():
    cfg = tiny(batch_sizes=[1, 2], seq_lens=[3, 4, 5], depths=[1, 2])
    assert len(cfg.grid_points()) == 12


def test_one_record_per_point_and_kernel():
    cfg = BenchConfig.paper_grid(batch_sizes=[2, 3], seq_lens=[4, 6], depths=[2, 3], dims=[2], repeats=1, warmup=0)
    records = run_grid(cfg)
    assert len(records) == 2 * len(cfg.grid_points())
    assert all(r.reps == 1 for r in records)


def test_counters():
    records = run_grid(tiny(seq_lens=[5, 200], depths=[2, 3]))
    for r in records:
        if r.kernel == "sequential":
            assert r.counter == r.seq_len - 1
        else:
            assert r.counter == r.depth
    assert any(r.kernel == "sequential" and r.seq_len == 200 and r.counter == 199 for r in records)


def test_statistics_are_consistent():
    for r in run_grid(tiny(repeats=4, warmup=1)):
        assert r.mean_ms >= r.min_ms > 0
        assert r.std_ms >= 0


def test_signatures_are_seed_reproducible():
    a = [r.checksum for r in run_grid(tiny(seed=7))]
    b = [r.checksum for r in run_grid(tiny(seed=7))]
    c = [r.checksum for r in run_grid(tiny(seed=8))]
    assert a == b and a != c
    assert a[0] == pytest.approx(a[1], rel=1e-9)


def test_resource_error_becomes_skipped_row():
    records = run_grid(tiny(memory_cap=10))
    par = [r for r in records if r.kernel == "parallel"]
    seq = [r for r in records if r.kernel == "sequential"]
    assert par[0].skipped and par[0].counter is None
    assert not seq[0].skipped
    rows = list(csv.reader(io.StringIO(emit(records))))
    assert rows[2][7:] == ["", "", "", ""]


def test_csv_columns(tmp_path):
    records = run_grid(tiny(seq_lens=[3, 4, 5]))
    out = tmp_path / "b.csv"
    text = emit(records, "csv", out)
    assert out.read_text() == text
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 1 + len(records)


def test_empty_csv():
    assert emit([], "csv") == ",".join(CSV_COLUMNS) + "\n"


def test_markdown_rows():
    records = run_grid(tiny(seq_lens=[3, 4]))
    lines = emit(records, "markdown").strip().splitlines()
    assert len(lines) == 2 + len(records)
    assert "fold_steps=2" in lines[2]


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        emit([], "csv", tmp_path / "missing" / "b.csv")


def test_float32_grid():
    records = run_grid(tiny(dtype="f32"))
    assert all(r.dtype == "f32" for r in records)
    assert np.isfinite(records[0].checksum)


@pytest.mark.parametrize(
    "kw", [dict(repeats=0), dict(seq_lens=[]), dict(depths=[0]), dict(dtype="f16"), dict(kernels=["auto"])]
)
def test_config_validation(kw):
    with pytest.raises(DomainError):
        tiny(**kw)


def test_monotonicity_report_flags_drops():
    def rec(length, ms):
        return BenchRecord("sequential", 8, length, 2, 3, "f64", 1, ms, 0.0, ms, length - 1)

    assert monotonicity_report([rec(50, 1.0), rec(100, 2.0)]) == []
    notes = monotonicity_report([rec(50, 2.0), rec(100, 1.0)])
    assert len(notes) == 1 and "L=100" in notes[0]
