"""Latency, throughput and success-rate measures over simulation results."""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from .netsim import BlockRecord, SimResult

CSV_COLUMNS = (
    "group_key",
    "group_value",
    "read_latency_s",
    "read_throughput_rps",
    "tx_latency_s",
    "tx_throughput_tps",
    "success_rate_pct",
    "r2_log_fit",
    "r2_nlog_fit",
)


def _confirmation(block: BlockRecord, threshold: float) -> float | None:
    if not block.commit_times:
        return None
    need = math.ceil(threshold * len(block.commit_times) - 1e-9)
    return sorted(block.commit_times)[need - 1]


def _check_threshold(threshold: float) -> None:
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")


def read_latency(result: SimResult) -> float | None:
    """Mean of (response - request) over reads; None when there are no reads."""
    if not result.reads:
        return None
    return statistics.fmean(r.response_time - r.request_time for r in result.reads)


def read_latency_median(result: SimResult) -> float | None:
    if not result.reads:
        return None
    return statistics.median(r.response_time - r.request_time for r in result.reads)


def read_throughput(result: SimResult) -> float:
    if not result.reads:
        return 0.0
    span = max(r.response_time for r in result.reads) - min(r.request_time for r in result.reads)
    if span <= 0:
        raise ValueError("read span is zero")
    return len(result.reads) / span


def _latencies(result: SimResult, threshold: float) -> list[float]:
    out = []
    for b in result.blocks:
        c = _confirmation(b, threshold)
        if c is not None:
            out.append(c - b.submit_time)
    return out


def transaction_latency(result: SimResult, threshold: float | None = None) -> float | None:
    """Mean of (confirmation at threshold - submit); None if no block confirmed."""
    threshold = result.network_threshold if threshold is None else threshold
    _check_threshold(threshold)
    lat = _latencies(result, threshold)
    return statistics.fmean(lat) if lat else None


def transaction_latency_median(result: SimResult, threshold: float | None = None) -> float | None:
    threshold = result.network_threshold if threshold is None else threshold
    _check_threshold(threshold)
    lat = _latencies(result, threshold)
    return statistics.median(lat) if lat else None


def _tx_span(result: SimResult) -> tuple[int, float]:
    confirmed = [(b, _confirmation(b, result.network_threshold)) for b in result.blocks if b.committed]
    if not confirmed:
        return 0, 0.0
    committed_tx = sum(b.tx_count for b, _ in confirmed)
    span = max(c for _, c in confirmed) - min(b.submit_time for b in result.blocks)
    return committed_tx, span


def transaction_throughput(result: SimResult) -> float:
    """Committed transactions / (last confirmation - first submit), network-wide."""
    committed, span = _tx_span(result)
    if committed == 0:
        return 0.0
    if span <= 0:
        raise ValueError("transaction span is zero")
    return committed / span


def block_throughput(result: SimResult) -> float:
    """Same as transaction_throughput but counting blocks."""
    committed, span = _tx_span(result)
    if committed == 0:
        return 0.0
    if span <= 0:
        raise ValueError("transaction span is zero")
    return result.committed_blocks / span


def success_rate(result: SimResult) -> float:
    if not result.blocks:
        raise ValueError("no blocks attempted")
    return 100.0 * result.committed_blocks / len(result.blocks)


def r_squared(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Coefficient of determination for a least-squares line y ~ a + b x."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(x) < 3 or np.ptp(x) == 0:
        return None
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    if total == 0:
        return 1.0
    return float(1 - np.sum(resid**2) / total)


@dataclass(frozen=True)
class MetricReport:
    group_key: str
    group_value: float
    read_latency_s: float | None
    read_throughput_rps: float
    tx_latency_s: float | None
    tx_throughput_tps: float
    success_rate_pct: float
    r2_log_fit: float | None = None
    r2_nlog_fit: float | None = None
    read_latency_median_s: float | None = None
    tx_latency_median_s: float | None = None
    block_throughput_bps: float = 0.0

    def __post_init__(self):
        if self.read_throughput_rps < 0 or self.tx_throughput_tps < 0 or self.block_throughput_bps < 0:
            raise ValueError("throughputs must be >= 0")
        if not 0 <= self.success_rate_pct <= 100:
            raise ValueError("success rate must be in [0, 100]")
        for lat in (self.read_latency_s, self.tx_latency_s):
            if lat is not None and lat < 0:
                raise ValueError("latencies must be >= 0")


def report(result: SimResult, group_key: str, group_value: float) -> MetricReport:
    return MetricReport(
        group_key=group_key,
        group_value=group_value,
        read_latency_s=read_latency(result),
        read_throughput_rps=read_throughput(result),
        tx_latency_s=transaction_latency(result),
        tx_throughput_tps=transaction_throughput(result),
        success_rate_pct=success_rate(result),
        read_latency_median_s=read_latency_median(result),
        tx_latency_median_s=transaction_latency_median(result),
        block_throughput_bps=block_throughput(result),
    )


def _mean_or_none(values):
    vals = [v for v in values if v is not None]
    return statistics.fmean(vals) if vals else None


def average_reports(reports: Sequence[MetricReport]) -> MetricReport:
    """Field-wise mean of repeated runs of the same group."""
    first = reports[0]
    values = {}
    for f in fields(MetricReport):
        if f.name in ("group_key", "group_value"):
            values[f.name] = getattr(first, f.name)
        else:
            mean = _mean_or_none(getattr(r, f.name) for r in reports)
            values[f.name] = 0.0 if mean is None and f.name in ("read_throughput_rps", "tx_throughput_tps", "block_throughput_bps") else mean
    return MetricReport(**values)


def with_fits(reports: Sequence[MetricReport]) -> list[MetricReport]:
    """Attach R^2 of read latency vs log(n) and tx latency vs n log(n), n = group value."""
    ok = [r for r in reports if r.read_latency_s is not None and r.group_value > 1]
    r2_log = r_squared([math.log(r.group_value) for r in ok], [r.read_latency_s for r in ok])
    ok = [r for r in reports if r.tx_latency_s is not None and r.group_value > 1]
    r2_nlog = r_squared([r.group_value * math.log(r.group_value) for r in ok], [r.tx_latency_s for r in ok])
    out = []
    for r in reports:
        d = asdict(r)
        d.update(r2_log_fit=r2_log, r2_nlog_fit=r2_nlog)
        out.append(MetricReport(**d))
    return out


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return f"{value:.2f}"


def render(reports: Sequence[MetricReport], fmt: str = "csv") -> str:
    if not reports:
        raise ValueError("nothing to export")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in reports:
            writer.writerow([_csv_cell(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()
    if fmt in ("jsonl", "json-lines"):
        return "".join(json.dumps(asdict(r), sort_keys=True) + "\n" for r in reports)
    raise ValueError(f"unknown export format {fmt!r}")


def export(reports: Sequence[MetricReport], fmt: str, out: str | Path | IO[str]) -> None:
    text = render(reports, fmt)
    if isinstance(out, (str, Path)):
        Path(out).write_text(text)
    else:
        out.write(text)


def parse_jsonl(text: str) -> list[MetricReport]:
    return [MetricReport(**json.loads(line)) for line in text.splitlines() if line.strip()]
