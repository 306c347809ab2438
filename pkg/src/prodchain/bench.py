"""Benchmark tables: latency and success rate against the number of prodblocks."""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

from .metrics import MetricReport, average_reports, report, with_fits
from .netsim import Scenario, run_scenario

BLOCK_COUNTS = tuple(range(10, 101, 10))

# Testbed measurements for 10, 20, ..., 100 prodblocks, kept for comparison plots.
TESTBED_READ_LATENCY = (10.66, 13.5, 17.33, 18.33, 21.5, 22.01, 22.23, 24.07, 27.67, 33.66)
TESTBED_TX_LATENCY = (46.43, 78.70, 111.33, 173.33, 208.23, 260.47, 317.63, 352.03, 371.33, 410.02)
TESTBED_SUCCESS_RATE = (100.0, 100.0, 100.0, 100.0, 100.0, 99.9, 99.87, 99.6, 99.5, 99.48)
TESTBED_BLOCK_THROUGHPUT = (7, 14, 24, 33, 41, 53, 62, 74, 81, 95)

# Failure onset and slope. Runs of up to 50 prodblocks never failed on the
# testbed; past that the per-block failure probability grows linearly, with
# the slope set so the mean shortfall over the 60..100-block runs is 0.33%:
# mean(slope * (B - 50) for B in 60..100) = 30 * slope = 0.0033.
FAILURE_ONSET = 50
FAILURE_SLOPE = 0.0033 / 30


def calibrated_failure_probability(block_count: int) -> float:
    return FAILURE_SLOPE * max(0, block_count - FAILURE_ONSET)


def calibrated_error_rates(block_count: int) -> tuple[float, float, float]:
    """Total failure probability split evenly over consensus, syntax and version errors."""
    p = calibrated_failure_probability(block_count)
    return (p / 3, p / 3, p / 3)


def bench_rows(
    base: Scenario | None = None,
    seed: int = 0,
    reps: int = 1,
    block_counts: Sequence[int] = BLOCK_COUNTS,
    calibrated: bool = True,
) -> list[MetricReport]:
    """One averaged MetricReport per block count, over seeds ``seed .. seed + reps - 1``."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    base = base or Scenario()
    rows = []
    for count in block_counts:
        scenario = replace(base, block_count=count)
        if calibrated:
            scenario = replace(scenario, error_rates=calibrated_error_rates(count))
        runs = [report(run_scenario(replace(scenario, rng_seed=seed + r)), "block_count", count) for r in range(reps)]
        rows.append(average_reports(runs))
    return with_fits(rows)
