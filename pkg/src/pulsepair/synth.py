"""Synthetic paired-run generator and fault injector.

Generates a software timing log plus the transition stream an external
observer would have captured for the same run, then degrades the external
stream according to an injected fault. Ground truth (true latencies, the
injected fault, the expected failure mode and validity class) is emitted
alongside so tests never re-derive expectations from the code under test.

Run structure: warmup pulses, one long synchronization marker, then the
measured inference pulses. External pulse widths are the software latency
plus a small positive wrapper overhead, quantized to the capture sample
period.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .capture import (
    Pulse,
    RunMetadata,
    SoftwareTimingLog,
    TransitionRecord,
    TransitionStream,
    dump_run_metadata,
    dump_software_log,
    dump_transition_stream,
)
from .validity import FailureMode, ValidityClass

MIN_LATENCY_MS = 0.01
DEFAULT_OVERHEAD_BOUND_MS = 0.05
DEFAULT_GAP_MS = 1.0


# ---------------------------------------------------------------------------
# Latency distribution specs


@dataclass(frozen=True)
class Gaussian:
    mean_ms: float
    sd_ms: float

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.maximum(rng.normal(self.mean_ms, self.sd_ms, size=n), MIN_LATENCY_MS)


@dataclass(frozen=True)
class Mixture:
    """Weighted mixture of gaussian components; weights must sum to 1."""

    components: tuple[tuple[float, Gaussian], ...]

    def __post_init__(self) -> None:
        total = sum(w for w, _ in self.components)
        if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-9):
            raise ValueError(f"mixture weights must sum to 1, got {total}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        weights = np.array([w for w, _ in self.components])
        choices = rng.choice(len(self.components), size=n, p=weights)
        out = np.empty(n)
        for i, (_, comp) in enumerate(self.components):
            mask = choices == i
            out[mask] = comp.sample(rng, int(mask.sum()))
        return out


@dataclass(frozen=True)
class Spiked:
    """Gaussian base where a small fraction of draws is scaled up.

    Reproduces the isolated-spike character of tail inflation without
    claiming anything about the underlying mechanism.
    """

    base: Gaussian
    spike_prob: float
    spike_scale: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.spike_prob < 1.0:
            raise ValueError(f"spike_prob must be in [0, 1), got {self.spike_prob}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        draws = self.base.sample(rng, n)
        spikes = rng.random(n) < self.spike_prob
        draws[spikes] *= self.spike_scale
        return np.maximum(draws, MIN_LATENCY_MS)


LatencyDistSpec = Gaussian | Mixture | Spiked


# ---------------------------------------------------------------------------
# Fault specs


class FaultKind(enum.Enum):
    NONE = "none"
    POST_MARKER_COLLAPSE = "post_marker_collapse"
    PARTIAL_LOSS = "partial_loss"
    EMPTY_CAPTURE = "empty_capture"
    MARKER_OVERLAP = "marker_overlap"
    JITTER = "jitter"


@dataclass(frozen=True)
class FaultSpec:
    kind: FaultKind = FaultKind.NONE
    drop_fraction: float | None = None  # partial_loss only, in (0, 1)
    marker_width_ms: float | None = None  # marker_overlap only
    overhead_bound_ms: float = DEFAULT_OVERHEAD_BOUND_MS

    def __post_init__(self) -> None:
        if self.kind is FaultKind.PARTIAL_LOSS:
            if self.drop_fraction is None or not 0.0 < self.drop_fraction < 1.0:
                raise ValueError("partial_loss requires drop_fraction in (0, 1)")
        if self.kind is FaultKind.MARKER_OVERLAP and self.marker_width_ms is None:
            raise ValueError("marker_overlap requires marker_width_ms")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "drop_fraction": self.drop_fraction,
            "marker_width_ms": self.marker_width_ms,
            "overhead_bound_ms": self.overhead_bound_ms,
        }


NO_FAULT = FaultSpec()


# ---------------------------------------------------------------------------
# Generation


@dataclass(frozen=True)
class GroundTruth:
    run_id: str
    seed: int
    fault: FaultSpec
    expected_failure_mode: FailureMode
    expected_validity: ValidityClass
    true_latencies_ms: tuple[float, ...]
    pulses_emitted: int  # post-marker inference pulses surviving the fault

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "seed": self.seed,
            "fault": self.fault.to_dict(),
            "expected_failure_mode": self.expected_failure_mode.value,
            "expected_validity": self.expected_validity.name,
            "true_latencies_ms": [round(v, 6) for v in self.true_latencies_ms],
            "pulses_emitted": self.pulses_emitted,
        }


@dataclass(frozen=True)
class GeneratedRun:
    log: SoftwareTimingLog
    stream: TransitionStream
    meta: RunMetadata
    truth: GroundTruth


def _quantize(t_s: float, sample_period: float) -> float:
    return round(t_s / sample_period) * sample_period


def gen_run(
    dist: LatencyDistSpec,
    meta: RunMetadata,
    fault: FaultSpec = NO_FAULT,
    seed: int = 0,
    gap_ms: float = DEFAULT_GAP_MS,
    overhead_bound_ms: float | None = None,
    warmup_transient_ms: float | None = None,
) -> GeneratedRun:
    """Generate one paired run, deterministic for a fixed seed.

    The software log always carries iterations_expected rows regardless of
    the fault: faults degrade the external channel only, which is the
    decoupling under study. `warmup_transient_ms` overrides the first
    warmup pulse width to model a startup transient.

    `overhead_bound_ms` defaults to the fault's bound; the jitter fault
    exists purely to widen it.
    """
    rng = np.random.default_rng(seed)
    sp = meta.sample_period_s
    bound_ms = fault.overhead_bound_ms if overhead_bound_ms is None else overhead_bound_ms

    marker_width_ms = meta.marker_width_ms
    if fault.kind is FaultKind.MARKER_OVERLAP:
        marker_width_ms = fault.marker_width_ms

    warmup = dist.sample(rng, meta.warmup_iterations)
    if warmup_transient_ms is not None and meta.warmup_iterations > 0:
        warmup[0] = warmup_transient_ms
    latencies = np.round(dist.sample(rng, meta.iterations_expected), 6)
    overhead = rng.uniform(0.0, bound_ms, size=meta.iterations_expected)

    records: list[TransitionRecord] = []
    t_s = gap_ms * 1e-3

    def emit_pulse(width_ms: float) -> None:
        nonlocal t_s
        rise = _quantize(t_s, sp)
        fall = _quantize(t_s + width_ms * 1e-3, sp)
        records.append(TransitionRecord(time_s=rise, level=1))
        records.append(TransitionRecord(time_s=fall, level=0))
        t_s = t_s + (width_ms + gap_ms) * 1e-3

    for w in warmup:
        emit_pulse(float(w))
    emit_pulse(marker_width_ms)
    marker_end_index = len(records)
    for lat, over in zip(latencies, overhead):
        emit_pulse(float(lat) + float(over))

    # Apply the external-channel fault.
    kept_pulses = meta.iterations_expected
    if fault.kind is FaultKind.EMPTY_CAPTURE:
        records = []
        kept_pulses = 0
    elif fault.kind is FaultKind.POST_MARKER_COLLAPSE:
        records = records[:marker_end_index]
        kept_pulses = 0
    elif fault.kind is FaultKind.PARTIAL_LOSS:
        keep = rng.random(meta.iterations_expected) >= fault.drop_fraction
        kept = records[:marker_end_index]
        for i, k in enumerate(keep):
            if k:
                kept.extend(records[marker_end_index + 2 * i : marker_end_index + 2 * i + 2])
        records = kept
        kept_pulses = int(keep.sum())

    stream = TransitionStream(records=tuple(records), sample_period=sp, initial_level=0)
    log = SoftwareTimingLog(
        run_id=meta.run_id,
        iterations_expected=meta.iterations_expected,
        rows=tuple((i, float(lat)) for i, lat in enumerate(latencies)),
    )
    mode, validity = _expected_outcome(fault, kept_pulses, meta)
    truth = GroundTruth(
        run_id=meta.run_id,
        seed=seed,
        fault=fault,
        expected_failure_mode=mode,
        expected_validity=validity,
        true_latencies_ms=tuple(float(v) for v in latencies),
        pulses_emitted=kept_pulses,
    )
    return GeneratedRun(log=log, stream=stream, meta=meta, truth=truth)


def _expected_outcome(
    fault: FaultSpec, kept_pulses: int, meta: RunMetadata
) -> tuple[FailureMode, ValidityClass]:
    """Expected downstream classification, derived from what was emitted.

    Partial loss is resolved against the realized drop count: dropping
    everything presents as post-marker collapse, dropping nothing as
    healthy.
    """
    if fault.kind is FaultKind.EMPTY_CAPTURE:
        return FailureMode.COMPLETE_ACQUISITION_FAILURE, ValidityClass.B
    if fault.kind is FaultKind.POST_MARKER_COLLAPSE:
        return FailureMode.POST_MARKER_COLLAPSE, ValidityClass.B
    if fault.kind is FaultKind.MARKER_OVERLAP:
        return FailureMode.MARKER_OVERLAP, ValidityClass.D
    if fault.kind is FaultKind.PARTIAL_LOSS:
        if kept_pulses == 0:
            return FailureMode.POST_MARKER_COLLAPSE, ValidityClass.B
        if kept_pulses == meta.iterations_expected:
            return FailureMode.HEALTHY, ValidityClass.A
        return FailureMode.PARTIAL_TRANSITION_LOSS, ValidityClass.B
    return FailureMode.HEALTHY, ValidityClass.A


def gen_condition(
    dist: LatencyDistSpec,
    meta_template: RunMetadata,
    n_runs: int,
    master_seed: int = 0,
    fault: FaultSpec = NO_FAULT,
    **gen_kwargs,
) -> list[GeneratedRun]:
    """Generate n_runs independent runs, deterministic for a master seed."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    seeds = np.random.SeedSequence(master_seed).generate_state(n_runs)
    runs = []
    for i, seed in enumerate(seeds):
        meta = RunMetadata(
            run_id=f"{meta_template.run_id}_{i + 1:03d}",
            architecture=meta_template.architecture,
            condition=meta_template.condition,
            marker_width_ms=meta_template.marker_width_ms,
            marker_threshold_ms=meta_template.marker_threshold_ms,
            iterations_expected=meta_template.iterations_expected,
            warmup_iterations=meta_template.warmup_iterations,
            sample_period_s=meta_template.sample_period_s,
        )
        runs.append(gen_run(dist, meta, fault=fault, seed=int(seed), **gen_kwargs))
    return runs


def write_run_dir(run: GeneratedRun, out_dir: str | Path) -> Path:
    """Write the run in exactly the on-disk layout the analyzer consumes."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_software_log(run.log, out / "software.csv")
    dump_transition_stream(run.stream, out / "transitions.csv")
    dump_run_metadata(run.meta, out / "metadata.json")
    (out / "ground_truth.json").write_text(
        json.dumps(run.truth.to_dict(), indent=2, sort_keys=True) + "\n"
    )
    return out
