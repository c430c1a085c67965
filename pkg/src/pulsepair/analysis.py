"""Whole-run and multi-run analysis: the composed pipeline behind the CLI.

`analyze_run` loads one run directory (software CSV, transition CSV,
metadata JSON) and produces the full per-run report: pairing, separation
check, decoupling report, validity class, and the statistics each class
is allowed to carry. Software-only statistics exist for classes A and B;
external statistics exist only for class A.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .capture import (
    PulseKind,
    RunMetadata,
    SoftwareTimingLog,
    TransitionStream,
    load_run_metadata,
    load_software_log,
    load_transition_stream,
)
from .pulses import (
    DEFAULT_MIN_MARGIN,
    MarkerSeparationCheck,
    PairingResult,
    classify_pulses,
    extract_pulses,
    pair_intervals,
    validate_marker_separation,
)
from .stats import RunSummary, run_summary, run_summary_to_dict
from .validity import (
    DecouplingReport,
    ValidityClass,
    detect_decoupling,
    finalize_report,
    report_to_dict,
)

SOFTWARE_CSV = "software.csv"
TRANSITIONS_CSV = "transitions.csv"
METADATA_JSON = "metadata.json"


@dataclass(frozen=True)
class RunReport:
    meta: RunMetadata
    report: DecouplingReport
    separation: MarkerSeparationCheck
    pairing: PairingResult
    orphan_edges: int
    software_summary: RunSummary | None
    external_summary: RunSummary | None
    software_latencies: tuple[float, ...]
    warnings: tuple[str, ...]

    @property
    def validity(self) -> ValidityClass:
        assert self.report.validity is not None
        return self.report.validity


def analyze(
    log: SoftwareTimingLog,
    stream: TransitionStream,
    meta: RunMetadata,
    marker_threshold_ms: float | None = None,
    min_margin: float = DEFAULT_MIN_MARGIN,
) -> RunReport:
    """Run the full pipeline on in-memory inputs."""
    threshold = meta.marker_threshold_ms if marker_threshold_ms is None else marker_threshold_ms
    extraction = extract_pulses(stream)
    classified = classify_pulses(extraction.pulses, threshold)
    inference_widths = [p.width_ms for p in classified if p.kind == PulseKind.INFERENCE]
    separation = validate_marker_separation(meta.marker_width_ms, inference_widths, min_margin)
    pairing = pair_intervals(log, classified)
    report = finalize_report(
        detect_decoupling(log, pairing, meta, transitions_recovered=len(stream),
                          separation=separation),
        separation,
    )

    warnings = list(pairing.warnings)
    if not separation.passed:
        warnings.append(
            f"marker separation failed: margin ratio {separation.margin_ratio:.3f} "
            f"below minimum {separation.min_margin:.3f}"
        )
    if extraction.orphan_edges:
        warnings.append(f"{extraction.orphan_edges} orphan edge(s) at capture boundaries")
    if not log.complete:
        warnings.append(
            f"software log incomplete: {len(log.rows)} of {log.iterations_expected} rows"
        )

    software_summary = None
    external_summary = None
    if report.validity in (ValidityClass.A, ValidityClass.B) and log.rows:
        software_summary = run_summary(
            log.latencies_ms, run_id=meta.run_id, condition=meta.condition
        )
    if report.validity is ValidityClass.A and pairing.pairs:
        external_summary = run_summary(
            [ext for _, _, ext in pairing.pairs], run_id=meta.run_id, condition=meta.condition
        )

    return RunReport(
        meta=meta,
        report=report,
        separation=separation,
        pairing=pairing,
        orphan_edges=extraction.orphan_edges,
        software_summary=software_summary,
        external_summary=external_summary,
        software_latencies=log.latencies_ms,
        warnings=tuple(warnings),
    )


def analyze_run(
    run_dir: str | Path,
    marker_threshold_ms: float | None = None,
    min_margin: float = DEFAULT_MIN_MARGIN,
) -> RunReport:
    """Load one run directory and analyze it."""
    run_dir = Path(run_dir)
    meta = load_run_metadata(run_dir / METADATA_JSON)
    log = load_software_log(
        run_dir / SOFTWARE_CSV, expected=meta.iterations_expected, run_id=meta.run_id
    )
    stream = load_transition_stream(
        run_dir / TRANSITIONS_CSV, sample_period=meta.sample_period_s
    )
    return analyze(log, stream, meta, marker_threshold_ms=marker_threshold_ms,
                   min_margin=min_margin)


def separation_to_dict(sep: MarkerSeparationCheck) -> dict:
    ratio = sep.margin_ratio
    return {
        "marker_width_ms": sep.marker_width_ms,
        "inference_max_observed_ms": sep.inference_max_observed_ms,
        "margin_ratio": None if ratio == float("inf") else ratio,
        "min_margin": sep.min_margin,
        "passed": sep.passed,
    }


def run_report_to_dict(rr: RunReport) -> dict:
    return {
        "run_id": rr.meta.run_id,
        "architecture": rr.meta.architecture,
        "condition": rr.meta.condition,
        "validity": {"class": rr.validity.name, "label": rr.validity.label},
        "decoupling": report_to_dict(rr.report),
        "separation": separation_to_dict(rr.separation),
        "pairing": {
            "pairs": len(rr.pairing.pairs),
            "unmatched_software": len(rr.pairing.unmatched_software),
            "unmatched_pulses": len(rr.pairing.unmatched_pulses),
            "pre_marker_pulses": rr.pairing.pre_marker_pulses,
            "marker_found": rr.pairing.marker_found,
        },
        "orphan_edges": rr.orphan_edges,
        "software_summary": (
            run_summary_to_dict(rr.software_summary) if rr.software_summary else None
        ),
        "external_summary": (
            run_summary_to_dict(rr.external_summary) if rr.external_summary else None
        ),
        "warnings": list(rr.warnings),
    }


def run_report_to_json(rr: RunReport, path: str | Path | None = None) -> str:
    text = json.dumps(run_report_to_dict(rr), indent=2, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def run_report_to_text(rr: RunReport) -> str:
    lines = [
        f"run {rr.meta.run_id} ({rr.meta.architecture}, {rr.meta.condition})",
        f"  validity: {rr.validity.name} ({rr.validity.label})",
        f"  failure mode: {rr.report.failure_mode.value}"
        + (
            f" (loss fraction {rr.report.loss_fraction:.3f})"
            if rr.report.loss_fraction is not None
            else ""
        ),
        f"  software rows: {len(rr.pairing.pairs) + len(rr.pairing.unmatched_software)}"
        f" (complete: {rr.report.software_complete})",
        f"  transitions: {rr.report.transitions_recovered} recovered"
        f" / {rr.report.transitions_expected} expected (inference edges)",
        f"  pairs formed: {rr.report.pairs_formed}",
    ]
    if rr.software_summary is not None:
        s = rr.software_summary
        lines.append(
            f"  software latency: mean {s.mean:.3f} ms, sd {s.sd:.3f}, "
            f"p99 {s.p99:.3f}, max {s.max:.3f} (n={s.n})"
        )
    if rr.external_summary is not None:
        s = rr.external_summary
        lines.append(
            f"  external width:   mean {s.mean:.3f} ms, sd {s.sd:.3f}, "
            f"p99 {s.p99:.3f}, max {s.max:.3f} (n={s.n})"
        )
    for w in rr.warnings:
        lines.append(f"  warning: {w}")
    return "\n".join(lines)
