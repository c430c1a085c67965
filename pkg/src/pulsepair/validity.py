"""Run validity classification and observability-decoupling detection.

A run lands in exactly one of four classes:

  A  valid runtime and valid synchronization
  B  valid runtime, incomplete synchronization
  C  invalid runtime
  D  methodology failure

External timing claims may use only class A. Software-only claims may
additionally use class B. Nothing is deleted: class B runs are the
evidence that the external channel can fail while the runtime looks
healthy (observability decoupling).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .capture import RunMetadata, SoftwareTimingLog
from .pulses import MarkerSeparationCheck, PairingResult


class ValidityClass(enum.Enum):
    A = "valid runtime and valid synchronization"
    B = "valid runtime, incomplete synchronization"
    C = "invalid runtime"
    D = "methodology failure"

    @property
    def label(self) -> str:
        return self.value


class FailureMode(enum.Enum):
    HEALTHY = "healthy"
    POST_MARKER_COLLAPSE = "post_marker_collapse"
    PARTIAL_TRANSITION_LOSS = "partial_transition_loss"
    COMPLETE_ACQUISITION_FAILURE = "complete_acquisition_failure"
    MARKER_OVERLAP = "marker_overlap"
    GPIO_LINE_MISOBSERVATION = "gpio_line_misobservation"
    PAIRING_FAILURE = "pairing_failure"


@dataclass(frozen=True)
class DecouplingReport:
    """Joint view of runtime completeness vs external observability.

    `transitions_expected` counts inference edges only (2 per expected
    iteration); marker and warmup edges are excluded from the budget.
    `loss_fraction` is defined only for partial transition loss.
    """

    run_id: str
    software_complete: bool
    marker_found: bool
    transitions_recovered: int
    transitions_expected: int
    pairs_formed: int
    failure_mode: FailureMode
    loss_fraction: float | None = None
    validity: ValidityClass | None = None

    @property
    def decoupled(self) -> bool:
        return self.software_complete and self.failure_mode is not FailureMode.HEALTHY


def detect_decoupling(
    log: SoftwareTimingLog,
    pairing: PairingResult,
    meta: RunMetadata,
    transitions_recovered: int,
    separation: MarkerSeparationCheck | None = None,
) -> DecouplingReport:
    """Assign the external failure mode for one run.

    `transitions_recovered` is the raw edge count of the capture, before
    any pulse extraction. Rule order matters: an empty capture says
    nothing about markers, and a failed separation check poisons the
    pairing before pair counts mean anything.
    """
    expected_iters = meta.iterations_expected
    transitions_expected = 2 * expected_iters
    pairs = len(pairing.pairs)
    loss_fraction: float | None = None

    if transitions_recovered == 0:
        if meta.gpio_line_verified_absent:
            mode = FailureMode.GPIO_LINE_MISOBSERVATION
        else:
            # Deliberately no device-vs-host cause attribution: an empty
            # trace is ambiguous and stays that way.
            mode = FailureMode.COMPLETE_ACQUISITION_FAILURE
    elif separation is not None and not separation.passed:
        mode = FailureMode.MARKER_OVERLAP
    elif not pairing.marker_found:
        mode = FailureMode.PAIRING_FAILURE
    elif pairs == 0:
        mode = FailureMode.POST_MARKER_COLLAPSE
    elif pairs < expected_iters:
        mode = FailureMode.PARTIAL_TRANSITION_LOSS
        loss_fraction = 1.0 - (2 * pairs) / transitions_expected
    else:
        mode = FailureMode.HEALTHY

    return DecouplingReport(
        run_id=meta.run_id,
        software_complete=log.complete,
        marker_found=pairing.marker_found,
        transitions_recovered=transitions_recovered,
        transitions_expected=transitions_expected,
        pairs_formed=pairs,
        failure_mode=mode,
        loss_fraction=loss_fraction,
    )


def classify_run_validity(
    report: DecouplingReport, separation: MarkerSeparationCheck | None = None
) -> ValidityClass:
    """Map a decoupling report to the four-way class. Precedence D > C > B > A.

    Methodology failures dominate: their statistics are untrustworthy
    even when every row and pulse is present.
    """
    methodology_failure = report.failure_mode in (
        FailureMode.MARKER_OVERLAP,
        FailureMode.GPIO_LINE_MISOBSERVATION,
    )
    if methodology_failure or (separation is not None and not separation.passed):
        return ValidityClass.D
    if not report.software_complete:
        return ValidityClass.C
    if report.failure_mode is FailureMode.HEALTHY:
        return ValidityClass.A
    return ValidityClass.B


def finalize_report(
    report: DecouplingReport, separation: MarkerSeparationCheck | None = None
) -> DecouplingReport:
    """Return the report with its validity class filled in."""
    return replace(report, validity=classify_run_validity(report, separation))


@dataclass(frozen=True)
class ClaimViews:
    """The two defensible aggregation views over a classified corpus."""

    external: tuple[DecouplingReport, ...]  # class A only
    software_only: tuple[DecouplingReport, ...]  # classes A and B


def filter_for_external_claims(
    runs: Sequence[DecouplingReport],
) -> tuple[DecouplingReport, ...]:
    """Exactly the class-A subset; the only runs external claims may use."""
    _require_classified(runs)
    return tuple(r for r in runs if r.validity is ValidityClass.A)


def split_claim_views(runs: Sequence[DecouplingReport]) -> ClaimViews:
    """Split a classified corpus into external (A) and software-only (A+B) views.

    Classes C and D are excluded from both views but remain in the input;
    nothing is deleted.
    """
    _require_classified(runs)
    return ClaimViews(
        external=tuple(r for r in runs if r.validity is ValidityClass.A),
        software_only=tuple(
            r for r in runs if r.validity in (ValidityClass.A, ValidityClass.B)
        ),
    )


def _require_classified(runs: Sequence[DecouplingReport]) -> None:
    for r in runs:
        if r.validity is None:
            raise ValueError(f"run {r.run_id} has no validity class; classify first")


def report_to_dict(report: DecouplingReport) -> dict:
    out = {
        "run_id": report.run_id,
        "software_complete": report.software_complete,
        "marker_found": report.marker_found,
        "transitions_recovered": report.transitions_recovered,
        "transitions_expected": report.transitions_expected,
        "pairs_formed": report.pairs_formed,
        "failure_mode": report.failure_mode.value,
        "loss_fraction": report.loss_fraction,
        "decoupled": report.decoupled,
    }
    if report.validity is not None:
        out["validity"] = {"class": report.validity.name, "label": report.validity.label}
    return out


def report_to_json(report: DecouplingReport, path: str | Path | None = None) -> str:
    text = json.dumps(report_to_dict(report), indent=2, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
