"""Run- and condition-level statistical battery, ECDFs, and the two detectors.

Percentiles are nearest-rank (sorted value at 1-based index ceil(p*n)),
so every reported percentile is an observed sample. This matters at
n=100: interpolating estimators give a different P99. Spread uses the
sample standard deviation (n-1 denominator).

Two detectors cover the two ways interference showed up:

  * tail inflation: the stressed condition's mean P99 grows relative to
    baseline while the distribution keeps its shape;
  * regime shift: a single run collapses to a tight spread anchored at a
    slow mode, which condition-level aggregates can hide entirely. The
    regime detector therefore runs per-run against baseline runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

DEFAULT_P99_RATIO_THRESHOLD = 1.10
DEFAULT_SD_COLLAPSE_THRESHOLD = 0.25


@dataclass(frozen=True)
class RunSummary:
    run_id: str
    n: int
    mean: float
    sd: float
    p50: float
    p95: float
    p99: float
    min: float
    max: float
    condition: str | None = None


@dataclass(frozen=True)
class ConditionSummary:
    condition: str
    runs: int
    samples: int
    mean_of_run_means: float
    run_mean_sd: float
    mean_p99: float
    max_observed: float
    single_run_warning: bool = False


@dataclass(frozen=True)
class EcdfCurve:
    values: tuple[float, ...]  # sorted sample values, ms
    fractions: tuple[float, ...]  # rank/n at each value, ends at 1.0


@dataclass(frozen=True)
class TailInflationFlag:
    p99_ratio: float
    mean_ratio: float
    max_ratio: float
    threshold: float
    flagged: bool


@dataclass(frozen=True)
class RegimeShiftFlag:
    run_id: str
    run_sd: float
    baseline_median_run_sd: float
    sd_collapse_ratio: float
    run_mean: float
    baseline_mean_of_means: float
    flagged: bool


def nearest_rank(sorted_values: np.ndarray, p: float) -> float:
    """Percentile as the sorted sample at 1-based index ceil(p*n)."""
    n = len(sorted_values)
    idx = int(np.ceil(p * n))
    idx = max(1, min(idx, n))
    return float(sorted_values[idx - 1])


def run_summary(
    latencies_ms: Sequence[float], run_id: str = "", condition: str | None = None
) -> RunSummary:
    """Summarize one run's latency vector.

    Empty input is an error: a run with zero samples is class C upstream
    and never reaches summarization.
    """
    arr = np.asarray(latencies_ms, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty latency vector")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("latencies must be positive finite")
    # All statistics run over the sorted array so reordering the input
    # cannot perturb floating-point accumulation.
    s = np.sort(arr)
    sd = float(np.std(s, ddof=1)) if s.size > 1 else 0.0
    return RunSummary(
        run_id=run_id,
        n=int(s.size),
        mean=float(np.mean(s)),
        sd=sd,
        p50=nearest_rank(s, 0.50),
        p95=nearest_rank(s, 0.95),
        p99=nearest_rank(s, 0.99),
        min=float(s[0]),
        max=float(s[-1]),
        condition=condition,
    )


def condition_summary(runs: Sequence[RunSummary], condition: str | None = None) -> ConditionSummary:
    """Aggregate per-run summaries into one condition row.

    A single-run condition is legitimate (storage stress has few runs),
    so run_mean_sd degrades to 0 with a warning flag instead of erroring.
    """
    if not runs:
        raise ValueError("condition_summary requires at least one run")
    labels = {r.condition for r in runs if r.condition is not None}
    if condition is not None:
        labels.add(condition)
    if len(labels) > 1:
        raise ValueError(f"mixed condition labels: {sorted(labels)}")
    label = labels.pop() if labels else ""

    means = np.array([r.mean for r in runs])
    single = len(runs) == 1
    run_mean_sd = 0.0 if single else float(np.std(means, ddof=1))
    return ConditionSummary(
        condition=label,
        runs=len(runs),
        samples=sum(r.n for r in runs),
        mean_of_run_means=float(np.mean(means)),
        run_mean_sd=run_mean_sd,
        mean_p99=float(np.mean([r.p99 for r in runs])),
        max_observed=max(r.max for r in runs),
        single_run_warning=single,
    )


def ecdf(latencies_ms: Sequence[float]) -> EcdfCurve:
    """Standard empirical CDF: a step of 1/n at each sorted sample."""
    arr = np.sort(np.asarray(latencies_ms, dtype=float))
    if arr.size == 0:
        raise ValueError("cannot build an ECDF from an empty vector")
    fractions = np.arange(1, arr.size + 1) / arr.size
    return EcdfCurve(values=tuple(arr.tolist()), fractions=tuple(fractions.tolist()))


def ecdf_to_csv(curve: EcdfCurve, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write("value_ms,fraction\n")
        for v, f in zip(curve.values, curve.fractions):
            fh.write(f"{v:.6f},{f:.6f}\n")


def detect_tail_inflation(
    baseline: ConditionSummary,
    stressed: ConditionSummary,
    p99_ratio_threshold: float = DEFAULT_P99_RATIO_THRESHOLD,
) -> TailInflationFlag:
    """Flag when the stressed mean P99 exceeds baseline by the threshold ratio.

    Mean and max ratios ride along for context; the flag itself is P99
    only. A ratio below 1 can coexist with a real problem (a regime
    shift lowers P99), which is the regime detector's job to catch.
    """
    ratio = stressed.mean_p99 / baseline.mean_p99
    return TailInflationFlag(
        p99_ratio=ratio,
        mean_ratio=stressed.mean_of_run_means / baseline.mean_of_run_means,
        max_ratio=stressed.max_observed / baseline.max_observed,
        threshold=p99_ratio_threshold,
        flagged=ratio >= p99_ratio_threshold,
    )


def detect_regime_shift(
    baseline_runs: Sequence[RunSummary],
    candidate: RunSummary,
    collapse_threshold: float = DEFAULT_SD_COLLAPSE_THRESHOLD,
) -> RegimeShiftFlag:
    """Flag a run whose spread collapses while its mean stays at or above baseline.

    Both conditions are required: a tight fast run is just a good run;
    only a tight run anchored at the slow side signals a collapsed regime.
    """
    if len(baseline_runs) < 2:
        raise ValueError("regime-shift detection needs at least 2 baseline runs")
    baseline_sds = np.array([r.sd for r in baseline_runs])
    baseline_means = np.array([r.mean for r in baseline_runs])
    median_sd = float(np.median(baseline_sds))
    ratio = candidate.sd / median_sd if median_sd > 0 else np.inf
    baseline_mean = float(np.mean(baseline_means))
    flagged = ratio <= collapse_threshold and candidate.mean >= baseline_mean
    return RegimeShiftFlag(
        run_id=candidate.run_id,
        run_sd=candidate.sd,
        baseline_median_run_sd=median_sd,
        sd_collapse_ratio=float(ratio),
        run_mean=candidate.mean,
        baseline_mean_of_means=baseline_mean,
        flagged=flagged,
    )


# ---------------------------------------------------------------------------
# Serialization

_TABLE_COLUMNS = (
    ("Condition", 34, "s"),
    ("Runs", 6, "d"),
    ("Samples", 8, "d"),
    ("Mean of run means (ms)", 23, ".3f"),
    ("Run-mean SD (ms)", 17, ".3f"),
    ("Mean P99 (ms)", 14, ".3f"),
    ("Max observed (ms)", 18, ".3f"),
)


def format_condition_table(summaries: Sequence[ConditionSummary]) -> str:
    """Fixed-width text table with one row per condition."""
    header = "".join(f"{name:>{width}}" for name, width, _ in _TABLE_COLUMNS)
    lines = [header, "-" * len(header)]
    for s in summaries:
        cells = (
            s.condition,
            s.runs,
            s.samples,
            s.mean_of_run_means,
            s.run_mean_sd,
            s.mean_p99,
            s.max_observed,
        )
        row = "".join(
            f"{cell:>{width}{fmt}}" for cell, (_, width, fmt) in zip(cells, _TABLE_COLUMNS)
        )
        lines.append(row)
    return "\n".join(lines)


def run_summary_to_dict(s: RunSummary) -> dict:
    return {
        "run_id": s.run_id,
        "condition": s.condition,
        "n": s.n,
        "mean_ms": s.mean,
        "sd_ms": s.sd,
        "p50_ms": s.p50,
        "p95_ms": s.p95,
        "p99_ms": s.p99,
        "min_ms": s.min,
        "max_ms": s.max,
    }


def condition_summary_to_dict(s: ConditionSummary) -> dict:
    return {
        "condition": s.condition,
        "runs": s.runs,
        "samples": s.samples,
        "mean_of_run_means_ms": s.mean_of_run_means,
        "run_mean_sd_ms": s.run_mean_sd,
        "mean_p99_ms": s.mean_p99,
        "max_observed_ms": s.max_observed,
        "single_run_warning": s.single_run_warning,
    }


def condition_summary_to_json(s: ConditionSummary, path: str | Path | None = None) -> str:
    text = json.dumps(condition_summary_to_dict(s), indent=2, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
