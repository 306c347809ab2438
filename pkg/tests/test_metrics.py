import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prodchain import metrics
from prodchain.metrics import CSV_COLUMNS, MetricReport
from prodchain.netsim import BlockRecord, ReadRecord, Scenario, SimResult, run_scenario


def toy_result(threshold=1.0):
    blocks = (
        BlockRecord(0, 0, 0.0, (2.0, 4.0, 6.0, 8.0), None, 100, 10),
        BlockRecord(1, 1, 3.0, (5.0, 9.0, 7.0, 11.0), None, 100, 10),
        BlockRecord(2, 2, 6.0, (), "syntax", 100, 10),
    )
    reads = (ReadRecord(0, 1, 8.0, 10.0), ReadRecord(1, 2, 11.0, 14.0))
    return SimResult(4, 10, threshold, blocks, reads)


def test_transaction_latency_by_hand():
    r = toy_result()
    # full confirmation: 8 - 0 and 11 - 3
    assert metrics.transaction_latency(r) == pytest.approx(8.0)
    # half the nodes: 2nd smallest commit, 4 - 0 and 7 - 3
    assert metrics.transaction_latency(r, 0.5) == pytest.approx(4.0)
    # first committer
    assert metrics.transaction_latency(r, 0.25) == pytest.approx(2.0)
    assert metrics.transaction_latency_median(r) == pytest.approx(8.0)
    with pytest.raises(ValueError):
        metrics.transaction_latency(r, 0)


def test_throughput_by_hand():
    r = toy_result()
    # 20 committed tx over [0, 11]
    assert metrics.transaction_throughput(r) == pytest.approx(20 / 11)
    assert metrics.block_throughput(r) == pytest.approx(2 / 11)
    assert metrics.success_rate(r) == pytest.approx(200 / 3)


def test_read_metrics_by_hand():
    r = toy_result()
    assert metrics.read_latency(r) == pytest.approx(2.5)
    assert metrics.read_latency_median(r) == pytest.approx(2.5)
    assert metrics.read_throughput(r) == pytest.approx(2 / 6)


def test_empty_cases():
    r = SimResult(4, 1, 1.0, (BlockRecord(0, 0, 0.0, (), "consensus", 10, 1),), ())
    assert metrics.read_latency(r) is None
    assert metrics.read_throughput(r) == 0.0
    assert metrics.transaction_latency(r) is None
    assert metrics.transaction_throughput(r) == 0.0
    assert metrics.success_rate(r) == 0.0
    with pytest.raises(ValueError):
        metrics.success_rate(SimResult(4, 1, 1.0, (), ()))


def test_zero_span_rejected():
    r = SimResult(1, 1, 1.0, (BlockRecord(0, 0, 0.0, (0.0,), None, 10, 1),), (ReadRecord(0, 0, 0.0, 0.0),))
    with pytest.raises(ValueError):
        metrics.transaction_throughput(r)
    with pytest.raises(ValueError):
        metrics.read_throughput(r)


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=20), st.integers(0, 2**31))
def test_r_squared_matches_correlation(xs, seed):
    if np.ptp(xs) < 1e-6:
        return
    rng = np.random.default_rng(seed)
    ys = 2 * np.asarray(xs) + rng.normal(size=len(xs))
    r = np.corrcoef(xs, ys)[0, 1]
    assert metrics.r_squared(xs, ys) == pytest.approx(r**2, abs=1e-9)


def test_r_squared_degenerate():
    assert metrics.r_squared([1, 2], [1, 2]) is None
    assert metrics.r_squared([1, 1, 1], [1, 2, 3]) is None
    assert metrics.r_squared([1, 2, 3], [5, 5, 5]) == 1.0


def test_report_validation():
    with pytest.raises(ValueError):
        MetricReport("k", 1, 1.0, -1.0, 1.0, 1.0, 100.0)
    with pytest.raises(ValueError):
        MetricReport("k", 1, 1.0, 1.0, 1.0, 1.0, 101.0)
    with pytest.raises(ValueError):
        MetricReport("k", 1, -1.0, 1.0, 1.0, 1.0, 100.0)


def test_average_reports():
    a = MetricReport("k", 1, 1.0, 2.0, None, 4.0, 100.0)
    b = MetricReport("k", 1, 3.0, 4.0, 5.0, 6.0, 90.0)
    avg = metrics.average_reports([a, b])
    assert (avg.read_latency_s, avg.read_throughput_rps, avg.tx_latency_s, avg.success_rate_pct) == (2.0, 3.0, 5.0, 95.0)


def test_with_fits_perfect_models():
    rows = [MetricReport("n", n, 2 + 3 * math.log(n), 1.0, 7 * n * math.log(n), 1.0, 100.0) for n in (10, 20, 40, 80)]
    fitted = metrics.with_fits(rows)
    assert all(r.r2_log_fit == pytest.approx(1.0) and r.r2_nlog_fit == pytest.approx(1.0) for r in fitted)


def test_csv_has_exact_columns():
    r = metrics.report(toy_result(), "block_count", 2)
    text = metrics.render([r], "csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[1][:3] == ["block_count", "2.00", "2.50"]
    assert rows[1][-2:] == ["", ""]


def test_jsonl_round_trip(tmp_path):
    result = run_scenario(Scenario(block_count=3))
    reports = [metrics.report(result, "block_count", 3)]
    out = tmp_path / "r.jsonl"
    metrics.export(reports, "jsonl", out)
    assert metrics.parse_jsonl(out.read_text()) == reports
    buf = io.StringIO()
    metrics.export(reports, "csv", buf)
    assert buf.getvalue().startswith("group_key,")
    with pytest.raises(ValueError):
        metrics.render(reports, "xml")
    with pytest.raises(ValueError):
        metrics.render([], "csv")
