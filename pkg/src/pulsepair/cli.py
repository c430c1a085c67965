"""Command-line surface: analyze, condition, synth.

Exit codes for `analyze` are a function of the validity class only:
0 for classes A and B, 2 for class C, 3 for class D, and 1 for
missing/malformed inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .analysis import RunReport, analyze_run, run_report_to_dict, run_report_to_json, run_report_to_text
from .capture import FormatError, IntegrityError
from .presets import PRESETS, build_preset, load_scenario
from .pulses import DEFAULT_MIN_MARGIN
from .stats import (
    DEFAULT_P99_RATIO_THRESHOLD,
    DEFAULT_SD_COLLAPSE_THRESHOLD,
    condition_summary,
    condition_summary_to_dict,
    detect_regime_shift,
    detect_tail_inflation,
    ecdf,
    ecdf_to_csv,
    format_condition_table,
    run_summary_to_dict,
)
from .synth import write_run_dir
from .validity import ValidityClass

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID_RUNTIME = 2
EXIT_METHODOLOGY_FAILURE = 3

_CLASS_EXIT = {
    ValidityClass.A: EXIT_OK,
    ValidityClass.B: EXIT_OK,
    ValidityClass.C: EXIT_INVALID_RUNTIME,
    ValidityClass.D: EXIT_METHODOLOGY_FAILURE,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsepair",
        description="Validate software-reported latency against externally observed pulses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="analyze one run directory")
    p_analyze.add_argument("run_dir", type=Path)
    p_analyze.add_argument("--out", type=Path, default=None,
                           help="directory for report.json and report.txt")
    p_analyze.add_argument("--marker-threshold-ms", type=float, default=None,
                           help="override the metadata classifier threshold")
    p_analyze.add_argument("--min-margin", type=float, default=DEFAULT_MIN_MARGIN)
    p_analyze.add_argument("--format", choices=("json", "text"), default="text")

    p_cond = sub.add_parser("condition", help="aggregate several runs of one condition")
    p_cond.add_argument("run_dirs", type=Path, nargs="+")
    p_cond.add_argument("--baseline", type=Path, nargs="+", default=None,
                        help="baseline run directories for the detectors")
    p_cond.add_argument("--out", type=Path, required=True, help="output directory")
    p_cond.add_argument("--marker-threshold-ms", type=float, default=None)
    p_cond.add_argument("--min-margin", type=float, default=DEFAULT_MIN_MARGIN)
    p_cond.add_argument("--p99-ratio-threshold", type=float,
                        default=DEFAULT_P99_RATIO_THRESHOLD)
    p_cond.add_argument("--sd-collapse-threshold", type=float,
                        default=DEFAULT_SD_COLLAPSE_THRESHOLD)
    p_cond.add_argument("--format", choices=("json", "text"), default="text")

    p_synth = sub.add_parser("synth", help="generate a synthetic corpus")
    p_synth.add_argument("scenario",
                         help=f"preset name ({', '.join(sorted(PRESETS))}) or JSON scenario file")
    p_synth.add_argument("--out-dir", type=Path, required=True)
    p_synth.add_argument("--seed", type=int, default=0)

    return parser


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        rr = analyze_run(args.run_dir, marker_threshold_ms=args.marker_threshold_ms,
                         min_margin=args.min_margin)
    except (FileNotFoundError, FormatError, IntegrityError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        run_report_to_json(rr, args.out / "report.json")
        (args.out / "report.txt").write_text(run_report_to_text(rr) + "\n")
    if args.format == "json":
        print(run_report_to_json(rr))
    else:
        print(run_report_to_text(rr))
    return _CLASS_EXIT[rr.validity]


def _analyze_many(run_dirs: Sequence[Path], args: argparse.Namespace) -> list[RunReport]:
    reports = []
    for d in run_dirs:
        reports.append(analyze_run(d, marker_threshold_ms=args.marker_threshold_ms,
                                   min_margin=args.min_margin))
    return reports


def cmd_condition(args: argparse.Namespace) -> int:
    try:
        reports = _analyze_many(args.run_dirs, args)
        baseline_reports = _analyze_many(args.baseline, args) if args.baseline else None
    except (FileNotFoundError, FormatError, IntegrityError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    external_runs = [r for r in reports if r.validity is ValidityClass.A]
    software_runs = [r for r in reports
                     if r.validity in (ValidityClass.A, ValidityClass.B)]

    payload: dict = {
        "runs": [run_report_to_dict(r) for r in reports],
        "external_view": {
            "runs": [r.meta.run_id for r in external_runs],
            "summary": None,
        },
        "software_only_view": {
            "runs": [r.meta.run_id for r in software_runs],
            "summary": None,
        },
        "detectors": {},
        "warnings": [],
    }

    table_sections: list[str] = []
    args.out.mkdir(parents=True, exist_ok=True)

    ext_summaries = [r.external_summary for r in external_runs if r.external_summary]
    if ext_summaries:
        ext_cond = condition_summary(ext_summaries)
        payload["external_view"]["summary"] = condition_summary_to_dict(ext_cond)
        table_sections.append("External timing (class A runs only)\n"
                              + format_condition_table([ext_cond]))
        pooled = [w for r in external_runs for _, _, w in r.pairing.pairs]
        ecdf_to_csv(ecdf(pooled), args.out / "external_ecdf.csv")
    else:
        payload["no_defensible_external_claims"] = True
        payload["warnings"].append(
            "no class-A runs: aggregate external timing claims are not defensible "
            "from this corpus"
        )
        table_sections.append("External timing: no defensible external claims "
                              "(zero class-A runs)")

    sw_summaries = [r.software_summary for r in software_runs if r.software_summary]
    if sw_summaries:
        sw_cond = condition_summary(sw_summaries)
        payload["software_only_view"]["summary"] = condition_summary_to_dict(sw_cond)
        table_sections.append("Software-reported timing (class A and B runs)\n"
                              + format_condition_table([sw_cond]))
        pooled_lat = [lat for r in software_runs for lat in r.software_latencies]
        ecdf_to_csv(ecdf(pooled_lat), args.out / "software_ecdf.csv")
    else:
        payload["warnings"].append("no class-A or class-B runs: no software-only claims")

    if baseline_reports is not None:
        base_sw = [r.software_summary for r in baseline_reports if r.software_summary]
        if len(base_sw) >= 1 and sw_summaries:
            base_cond = condition_summary(base_sw)
            tail = detect_tail_inflation(base_cond, sw_cond,
                                         p99_ratio_threshold=args.p99_ratio_threshold)
            payload["detectors"]["tail_inflation"] = {
                "p99_ratio": tail.p99_ratio,
                "mean_ratio": tail.mean_ratio,
                "max_ratio": tail.max_ratio,
                "threshold": tail.threshold,
                "flagged": tail.flagged,
            }
        if len(base_sw) >= 2 and sw_summaries:
            flags = []
            for s in sw_summaries:
                f = detect_regime_shift(base_sw, s,
                                        collapse_threshold=args.sd_collapse_threshold)
                flags.append({
                    "run_id": f.run_id,
                    "run_sd_ms": f.run_sd,
                    "baseline_median_run_sd_ms": f.baseline_median_run_sd,
                    "sd_collapse_ratio": f.sd_collapse_ratio,
                    "run_mean_ms": f.run_mean,
                    "flagged": f.flagged,
                })
            payload["detectors"]["regime_shift"] = flags

    text = "\n\n".join(table_sections) + "\n"
    (args.out / "condition_report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n")
    (args.out / "condition_table.txt").write_text(text)
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    scenario = args.scenario
    try:
        if scenario in PRESETS:
            runs = build_preset(scenario, master_seed=args.seed)
        elif Path(scenario).exists():
            runs = load_scenario(scenario, master_seed=args.seed)
        else:
            print(f"error: unknown preset or missing scenario file {scenario!r}; "
                  f"known presets: {', '.join(sorted(PRESETS))}", file=sys.stderr)
            return EXIT_ERROR
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for run in runs:
        write_run_dir(run, args.out_dir / run.meta.run_id)
    print(f"wrote {len(runs)} run(s) under {args.out_dir}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "analyze":
        return cmd_analyze(args)
    if args.command == "condition":
        return cmd_condition(args)
    return cmd_synth(args)


if __name__ == "__main__":
    raise SystemExit(main())
