"""Core domain types and file ingestion for both timing channels.

Two channels describe one capture run: an externally observed stream of
logic-level transitions (what a logic analyzer exports) and the
software-reported per-iteration latency log. Run metadata binds them
together and carries the marker configuration.

Wire units are seconds for transition timestamps and milliseconds for
latencies; all widths downstream are reported in milliseconds.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

TRANSITION_HEADER = "time_s,level"
SOFTWARE_HEADER = "iteration,latency_ms"

#: Resolution floor for a 10 MS/s capture (100 ns per sample).
DEFAULT_SAMPLE_PERIOD_S = 1e-7

ARCH_GPU_ENGINE = "gpu_engine"
ARCH_CPU_RUNTIME = "cpu_runtime"

COND_BASELINE = "baseline"
COND_MEMORY_STRESS_LIGHT = "memory_stress_light"
COND_STORAGE_STRESS = "storage_stress"


class FormatError(ValueError):
    """A file row could not be parsed; message carries the line number."""


class IntegrityError(ValueError):
    """Parsed data violates a stream/log invariant."""


@dataclass(frozen=True)
class TransitionRecord:
    """One logic-level edge: the line settled at `level` at `time_s`."""

    time_s: float
    level: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.time_s) or self.time_s < 0:
            raise IntegrityError(f"transition time must be finite and >= 0, got {self.time_s}")
        if self.level not in (0, 1):
            raise IntegrityError(f"level must be 0 or 1, got {self.level}")


@dataclass(frozen=True)
class TransitionStream:
    """Ordered edge list from one external capture channel.

    An empty stream is valid and meaningful: it is how a complete
    acquisition failure presents. `initial_level` is the line state at
    capture start; a stream whose first record is a falling edge implies
    the line started high.
    """

    records: tuple[TransitionRecord, ...]
    sample_period: float = DEFAULT_SAMPLE_PERIOD_S
    initial_level: int = 0

    def __post_init__(self) -> None:
        if self.sample_period <= 0:
            raise IntegrityError(f"sample_period must be positive, got {self.sample_period}")
        if self.initial_level not in (0, 1):
            raise IntegrityError(f"initial_level must be 0 or 1, got {self.initial_level}")
        prev_level = self.initial_level
        prev_time = -math.inf
        for i, rec in enumerate(self.records):
            if rec.time_s <= prev_time:
                raise IntegrityError(
                    f"record {i}: time {rec.time_s} not strictly after {prev_time}"
                )
            if rec.level == prev_level:
                raise IntegrityError(
                    f"record {i}: repeated level {rec.level} (edges must alternate)"
                )
            prev_time = rec.time_s
            prev_level = rec.level

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class SoftwareTimingLog:
    """Per-iteration software-reported latencies for one run."""

    run_id: str
    iterations_expected: int
    rows: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        prev_idx = -1
        for iteration, latency in self.rows:
            if iteration <= prev_idx:
                raise IntegrityError(
                    f"iteration index {iteration} not strictly ascending (after {prev_idx})"
                )
            if not math.isfinite(latency) or latency <= 0:
                raise IntegrityError(
                    f"iteration {iteration}: latency must be positive finite, got {latency}"
                )
            prev_idx = iteration

    @property
    def complete(self) -> bool:
        return len(self.rows) == self.iterations_expected

    @property
    def latencies_ms(self) -> tuple[float, ...]:
        return tuple(latency for _, latency in self.rows)


@dataclass(frozen=True)
class RunMetadata:
    """Run configuration shared by both channels.

    `gpio_line_verified_absent` is a manual override recorded at setup
    when physical pin-mapping verification showed the observed line never
    toggled; it cannot be inferred from the data alone.
    """

    run_id: str
    architecture: str
    condition: str
    marker_width_ms: float
    marker_threshold_ms: float
    iterations_expected: int
    warmup_iterations: int
    sample_period_s: float = DEFAULT_SAMPLE_PERIOD_S
    gpio_line_verified_absent: bool = False

    def __post_init__(self) -> None:
        if self.marker_threshold_ms >= self.marker_width_ms:
            raise IntegrityError(
                f"marker_threshold_ms ({self.marker_threshold_ms}) must be below "
                f"marker_width_ms ({self.marker_width_ms})"
            )
        if self.warmup_iterations < 0:
            raise IntegrityError("warmup_iterations must be >= 0")
        if self.iterations_expected <= 0:
            raise IntegrityError("iterations_expected must be positive")


class PulseKind:
    MARKER = "marker"
    INFERENCE = "inference"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class Pulse:
    """One rising-to-falling interval on the observed line.

    `kind` is assigned only by the classifier; extraction always emits
    unclassified pulses.
    """

    start_s: float
    end_s: float
    kind: str = PulseKind.UNCLASSIFIED

    def __post_init__(self) -> None:
        if self.end_s <= self.start_s:
            raise IntegrityError(f"pulse end {self.end_s} must be after start {self.start_s}")

    @property
    def width_ms(self) -> float:
        return (self.end_s - self.start_s) * 1e3


# ---------------------------------------------------------------------------
# Transition CSV


def load_transition_stream(
    path: str | Path, sample_period: float = DEFAULT_SAMPLE_PERIOD_S
) -> TransitionStream:
    """Read a `time_s,level` digital-export CSV into a TransitionStream.

    A header-only file yields an empty stream (that outcome is data, not
    an error). Malformed rows raise FormatError with the line number;
    non-monotone times or repeated levels raise IntegrityError.
    """
    path = Path(path)
    records: list[TransitionRecord] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != TRANSITION_HEADER:
            raise FormatError(f"{path}:1: expected header '{TRANSITION_HEADER}', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise FormatError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                time_s = float(row[0])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: bad time value {row[0]!r}") from None
            if row[1] not in ("0", "1"):
                raise FormatError(f"{path}:{lineno}: level must be 0 or 1, got {row[1]!r}")
            try:
                records.append(TransitionRecord(time_s=time_s, level=int(row[1])))
            except IntegrityError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None

    initial_level = 0
    if records and records[0].level == 0:
        # First edge is a falling edge: the line was high at capture start.
        initial_level = 1
    return TransitionStream(
        records=tuple(records), sample_period=sample_period, initial_level=initial_level
    )


def dump_transition_stream(stream: TransitionStream, path: str | Path) -> None:
    """Write the canonical transition CSV (9 decimal digits of seconds)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(TRANSITION_HEADER + "\n")
        for rec in stream.records:
            fh.write(f"{rec.time_s:.9f},{rec.level}\n")


# ---------------------------------------------------------------------------
# Software timing CSV


def load_software_log(path: str | Path, expected: int, run_id: str | None = None) -> SoftwareTimingLog:
    """Read an `iteration,latency_ms` CSV into a SoftwareTimingLog.

    Completeness is a derived property, not a precondition: a short log
    loads fine and reports complete=False.
    """
    path = Path(path)
    rows: list[tuple[int, float]] = []
    seen: set[int] = set()
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != SOFTWARE_HEADER:
            raise FormatError(f"{path}:1: expected header '{SOFTWARE_HEADER}', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise FormatError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                iteration = int(row[0])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: bad iteration index {row[0]!r}") from None
            try:
                latency = float(row[1])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: bad latency value {row[1]!r}") from None
            if iteration in seen:
                raise FormatError(f"{path}:{lineno}: duplicate iteration index {iteration}")
            if not math.isfinite(latency) or latency <= 0:
                raise FormatError(
                    f"{path}:{lineno}: latency must be positive finite, got {row[1]!r}"
                )
            seen.add(iteration)
            rows.append((iteration, latency))
    return SoftwareTimingLog(
        run_id=run_id if run_id is not None else path.stem,
        iterations_expected=expected,
        rows=tuple(rows),
    )


def dump_software_log(log: SoftwareTimingLog, path: str | Path) -> None:
    """Write the canonical software timing CSV (6 decimal digits of ms)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(SOFTWARE_HEADER + "\n")
        for iteration, latency in log.rows:
            fh.write(f"{iteration},{latency:.6f}\n")


# ---------------------------------------------------------------------------
# Run metadata JSON

_META_KEYS = (
    "run_id",
    "architecture",
    "condition",
    "marker_width_ms",
    "marker_threshold_ms",
    "iterations_expected",
    "warmup_iterations",
    "sample_period_s",
)


def load_run_metadata(path: str | Path) -> RunMetadata:
    path = Path(path)
    with path.open() as fh:
        raw = json.load(fh)
    missing = [k for k in _META_KEYS if k not in raw]
    if missing:
        raise FormatError(f"{path}: missing metadata keys {missing}")
    return RunMetadata(
        run_id=str(raw["run_id"]),
        architecture=str(raw["architecture"]),
        condition=str(raw["condition"]),
        marker_width_ms=float(raw["marker_width_ms"]),
        marker_threshold_ms=float(raw["marker_threshold_ms"]),
        iterations_expected=int(raw["iterations_expected"]),
        warmup_iterations=int(raw["warmup_iterations"]),
        sample_period_s=float(raw["sample_period_s"]),
        gpio_line_verified_absent=bool(raw.get("gpio_line_verified_absent", False)),
    )


def dump_run_metadata(meta: RunMetadata, path: str | Path) -> None:
    payload = {
        "run_id": meta.run_id,
        "architecture": meta.architecture,
        "condition": meta.condition,
        "marker_width_ms": meta.marker_width_ms,
        "marker_threshold_ms": meta.marker_threshold_ms,
        "iterations_expected": meta.iterations_expected,
        "warmup_iterations": meta.warmup_iterations,
        "sample_period_s": meta.sample_period_s,
    }
    if meta.gpio_line_verified_absent:
        payload["gpio_line_verified_absent"] = True
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
