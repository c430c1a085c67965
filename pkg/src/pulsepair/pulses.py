"""Edge stream to classified pulses, marker location, and index pairing.

The pairing contract is deliberately simple: the run begins with warmup
pulses, then a long synchronization marker, then the measured inference
pulses. The k-th post-marker inference pulse pairs with the k-th software
row. There is no clock alignment; the marker is a one-time anchor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .capture import Pulse, PulseKind, SoftwareTimingLog, TransitionStream

DEFAULT_MIN_MARGIN = 4.0


@dataclass(frozen=True)
class PulseExtraction:
    """Extraction output: pulses in time order plus the orphan-edge count.

    Orphans (a leading falling edge or trailing rising edge) are half
    pulses cut off by the capture window. They are counted, never silently
    dropped, because edge conservation feeds the validity classifier:
    edges consumed == 2 * len(pulses) + orphan_edges.
    """

    pulses: tuple[Pulse, ...]
    orphan_edges: int


@dataclass(frozen=True)
class MarkerLocation:
    found: bool
    index: int | None
    pre_marker_pulses: int
    extra_marker_indices: tuple[int, ...] = ()

    @property
    def ambiguous(self) -> bool:
        return len(self.extra_marker_indices) > 0


@dataclass(frozen=True)
class MarkerSeparationCheck:
    """Is the configured marker width safely above the observed inference widths?"""

    marker_width_ms: float
    inference_max_observed_ms: float | None
    margin_ratio: float
    min_margin: float
    passed: bool


@dataclass(frozen=True)
class PairingResult:
    pairs: tuple[tuple[int, float, float], ...]  # (iteration, software_ms, external_ms)
    unmatched_software: tuple[int, ...]
    unmatched_pulses: tuple[Pulse, ...]
    marker_found: bool
    pre_marker_pulses: int
    warnings: tuple[str, ...] = ()


def extract_pulses(stream: TransitionStream) -> PulseExtraction:
    """Pair each rising edge with the next falling edge.

    Output pulses are all unclassified. Degenerate streams (empty, single
    edge) yield an empty pulse list; they are data, not errors.
    """
    pulses: list[Pulse] = []
    orphans = 0
    records = stream.records
    i = 0
    if records and records[0].level == 0:
        # Line was high at capture start; the leading falling edge closes
        # a pulse whose rise we never saw.
        orphans += 1
        i = 1
    while i + 1 < len(records):
        rise, fall = records[i], records[i + 1]
        pulses.append(Pulse(start_s=rise.time_s, end_s=fall.time_s))
        i += 2
    if i < len(records):
        orphans += 1  # trailing rising edge never fell within the window
    return PulseExtraction(pulses=tuple(pulses), orphan_edges=orphans)


def classify_pulses(pulses: Sequence[Pulse], threshold_ms: float) -> tuple[Pulse, ...]:
    """Split pulses into markers and inference intervals by width.

    Boundary rule: width >= threshold is a marker, so a marker degraded
    exactly to the threshold is still found.
    """
    if threshold_ms <= 0:
        raise ValueError(f"threshold_ms must be positive, got {threshold_ms}")
    out = []
    for p in pulses:
        kind = PulseKind.MARKER if p.width_ms >= threshold_ms else PulseKind.INFERENCE
        out.append(Pulse(start_s=p.start_s, end_s=p.end_s, kind=kind))
    return tuple(out)


def locate_marker(pulses: Sequence[Pulse]) -> MarkerLocation:
    """Find the first marker pulse; extras are surfaced, not fatal.

    Multiple markers are the signature of marker/inference overlap, so
    the ambiguity is carried in the result for the validity layer.
    """
    marker_indices = [i for i, p in enumerate(pulses) if p.kind == PulseKind.MARKER]
    if not marker_indices:
        return MarkerLocation(found=False, index=None, pre_marker_pulses=0)
    first = marker_indices[0]
    return MarkerLocation(
        found=True,
        index=first,
        pre_marker_pulses=first,
        extra_marker_indices=tuple(marker_indices[1:]),
    )


def validate_marker_separation(
    marker_width_ms: float,
    observed_inference_widths_ms: Sequence[float],
    min_margin: float = DEFAULT_MIN_MARGIN,
) -> MarkerSeparationCheck:
    """Check the marker width against the observed inference distribution.

    With no observed inference pulses there is nothing the marker could
    collide with, so the check passes with an infinite margin.
    """
    if marker_width_ms <= 0:
        raise ValueError(f"marker_width_ms must be positive, got {marker_width_ms}")
    if not observed_inference_widths_ms:
        return MarkerSeparationCheck(
            marker_width_ms=marker_width_ms,
            inference_max_observed_ms=None,
            margin_ratio=math.inf,
            min_margin=min_margin,
            passed=True,
        )
    max_observed = max(observed_inference_widths_ms)
    ratio = marker_width_ms / max_observed
    return MarkerSeparationCheck(
        marker_width_ms=marker_width_ms,
        inference_max_observed_ms=max_observed,
        margin_ratio=ratio,
        min_margin=min_margin,
        passed=ratio >= min_margin,
    )


def pair_intervals(log: SoftwareTimingLog, pulses: Sequence[Pulse]) -> PairingResult:
    """Pair software rows with post-marker inference pulses by index.

    All degradation lands in the result rather than raising: runs where
    pairing collapses are exactly the data of interest. Pre-marker
    (warmup) pulses are structurally excluded and never paired.
    """
    loc = locate_marker(pulses)
    warnings: list[str] = []
    if not loc.found:
        if pulses:
            warnings.append("no synchronization marker found; cannot anchor pairing")
        return PairingResult(
            pairs=(),
            unmatched_software=tuple(i for i, _ in log.rows),
            unmatched_pulses=tuple(pulses),
            marker_found=False,
            pre_marker_pulses=0,
            warnings=tuple(warnings),
        )

    if loc.ambiguous:
        warnings.append(
            f"{len(loc.extra_marker_indices)} extra marker-width pulses after the first "
            "marker; possible marker/inference overlap"
        )

    post = list(pulses[loc.index + 1 :])
    inference = [p for p in post if p.kind == PulseKind.INFERENCE]
    extra_markers = [p for p in post if p.kind == PulseKind.MARKER]

    pairs = []
    for (iteration, latency), pulse in zip(log.rows, inference):
        pairs.append((iteration, latency, pulse.width_ms))
    n = len(pairs)
    unmatched_software = tuple(iteration for iteration, _ in log.rows[n:])
    unmatched_pulses = tuple(inference[n:]) + tuple(extra_markers)

    return PairingResult(
        pairs=tuple(pairs),
        unmatched_software=unmatched_software,
        unmatched_pulses=unmatched_pulses,
        marker_found=True,
        pre_marker_pulses=loc.pre_marker_pulses,
        warnings=tuple(warnings),
    )


def pairing_to_json(result: PairingResult, path: str | Path | None = None) -> str:
    """Serialize a PairingResult; widths carry 6 decimal digits of ms."""
    payload = {
        "pairs": [
            {
                "iteration": it,
                "software_latency_ms": round(sw, 6),
                "external_width_ms": round(ext, 6),
            }
            for it, sw, ext in result.pairs
        ],
        "unmatched_software": list(result.unmatched_software),
        "unmatched_pulses": [
            {"start_s": p.start_s, "end_s": p.end_s, "width_ms": round(p.width_ms, 6), "kind": p.kind}
            for p in result.unmatched_pulses
        ],
        "marker_found": result.marker_found,
        "pre_marker_pulses": result.pre_marker_pulses,
        "warnings": list(result.warnings),
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
