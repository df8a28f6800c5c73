"""Batch front-end: scenario files in, JSON reports and CSV exports out.

``expertcompare run <scenario> [--set key=value]... [--workers K] [--out DIR]``
runs a scenario file (or a bundled preset by bare name) and writes
``report.json`` plus optional per-trial / trajectory / profile exports.
``expertcompare list-presets`` shows the bundled scenarios.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

from .config import (
    DistributionSpec,
    EquivalenceSpec,
    ScenarioFileError,
    TailSpec,
    load_scenario_text,
)
from .harness import (
    RunReport,
    check_equivalence,
    check_tail,
    estimate_verdict_distribution,
)
from .presets import preset_description, preset_names, preset_text

_VERDICT_KEYS = ("expert0", "inconclusive", "expert1", "anomalous")


def _resolve_scenario(ref: str) -> tuple[str, str]:
    """Return (text, source name) for a path or a bundled preset name."""
    path = Path(ref)
    if path.is_file():
        return path.read_text(encoding="utf-8"), str(path)
    if ref in preset_names():
        return preset_text(ref), f"preset:{ref}"
    raise ScenarioFileError(
        f"{ref!r} is neither a scenario file nor a preset name; "
        f"presets: {', '.join(preset_names())}"
    )


def _print_distribution_summary(report: RunReport) -> None:
    s = report.scenario
    print(f"scenario {s['label'] or '<unnamed>'}  "
          f"(trials={report.trials}, horizon={report.horizon}, "
          f"seed={s['master_seed']}, nature={s['nature']})")
    print(f"  f0 = {s['f0']}")
    print(f"  f1 = {s['f1']}")
    for tr in report.tests:
        params = ", ".join(f"{k}={v}" for k, v in tr.params.items())
        print(f"test {tr.name} ({params})")
        print(f"  {'verdict':<14}{'count':>8}{'frequency':>12}   95% CI")
        for key in _VERDICT_KEYS:
            lo, hi = tr.interval(key)
            print(f"  {key:<14}{tr.counts[key]:>8}{tr.frequency(key):>12.4f}"
                  f"   [{lo:.4f}, {hi:.4f}]")
        for label, block in tr.conditional.items():
            if "frequencies" in block:
                freqs = ", ".join(
                    f"{k}={v:.4f}" for k, v in block["frequencies"].items() if v > 0
                )
                print(f"  given {label} (hits={block['hits']}): {freqs}")
            else:
                print(f"  given {label}: event unobserved")
    for label, ev in report.events.items():
        print(f"event {label}: hits={ev['hits']}  frequency={ev['frequency']:.4f}  "
              f"CI=[{ev['ci95_low']:.4f}, {ev['ci95_high']:.4f}]")
    print(f"wall time: {report.wall_time_s:.2f} s")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def _run_distribution(spec: DistributionSpec, args) -> int:
    report = estimate_verdict_distribution(
        spec.scenario,
        workers=args.workers,
        collect_trials=args.trials_jsonl,
        record_trajectory=args.trajectory or args.profiles,
    )
    _print_distribution_summary(report)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "report.json", report.to_dict())
    if args.trials_jsonl:
        path = out / "trials.jsonl"
        with path.open("w", encoding="utf-8") as fh:
            for rec in report.trial_records:
                fh.write(json.dumps(rec) + "\n")
        print(f"wrote {path}")
    if args.trajectory and report.trajectory is not None:
        path = out / "trajectory.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["t", "log_ratio", "numerator_zero", "denominator_zero"]
            )
            writer.writeheader()
            writer.writerows(report.trajectory)
        print(f"wrote {path}")
    if args.profiles:
        if report.crosscal_profiles is None:
            print("no cross-calibration test configured; skipping profile export")
        else:
            path = out / "crosscal_profiles.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(
                    fh,
                    fieldnames=[
                        "l0", "l1", "nu", "ones_sum", "freq",
                        "midpoint0", "midpoint1", "band",
                    ],
                )
                writer.writeheader()
                writer.writerows(report.crosscal_profiles)
            print(f"wrote {path}")
    return 0


def _run_tail(spec: TailSpec, args) -> int:
    started = time.perf_counter()
    report = check_tail(
        spec.test,
        spec.f0,
        spec.f1,
        spec.forced,
        spec.horizon,
        spec.trials,
        spec.seed,
        nature_expert=spec.nature_expert,
    )
    wall = time.perf_counter() - started
    print(f"scenario {spec.name}  (tail surgery, trials={spec.trials}, "
          f"horizon={spec.horizon}, forced={''.join(map(str, spec.forced))})")
    print(f"  test {spec.test.name}: disagreements={report.disagreements} "
          f"of {report.trials} (frequency={report.disagreement_frequency:.4f})")
    print(f"wall time: {wall:.2f} s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "scenario": {
            "label": spec.name,
            "mode": "tail",
            "f0": spec.f0.spec_str(),
            "f1": spec.f1.spec_str(),
            "nature_expert": spec.nature_expert,
            "horizon": spec.horizon,
            "trials": spec.trials,
            "master_seed": spec.seed,
            "test": {"name": spec.test.name, **spec.test.params_dict()},
        },
        "wall_time_s": wall,
        "tail": report.to_dict(),
        "config": spec.config,
    }
    _write_json(out / "report.json", payload)
    return 0


def _run_equivalence(spec: EquivalenceSpec, args) -> int:
    started = time.perf_counter()
    report = check_equivalence(
        spec.test_a,
        spec.test_b,
        spec.f0,
        spec.f1,
        spec.natures,
        spec.horizon,
        spec.trials,
        spec.seed,
        workers=args.workers,
    )
    wall = time.perf_counter() - started
    print(f"scenario {spec.name}  (equivalence, trials={spec.trials}, "
          f"horizon={spec.horizon})")
    print(f"  {spec.test_a.name} vs {spec.test_b.name}")
    for nature, block in report.per_nature.items():
        print(f"  under {nature}: disagreement={block['frequency']:.4f} "
              f"({block['disagreements']}/{spec.trials}) "
              f"CI=[{block['ci95_low']:.4f}, {block['ci95_high']:.4f}]")
    print(f"wall time: {wall:.2f} s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "scenario": {
            "label": spec.name,
            "mode": "equivalence",
            "f0": spec.f0.spec_str(),
            "f1": spec.f1.spec_str(),
            "natures": [n.spec_str() for n in spec.natures],
            "horizon": spec.horizon,
            "trials": spec.trials,
            "master_seed": spec.seed,
            "testA": {"name": spec.test_a.name, **spec.test_a.params_dict()},
            "testB": {"name": spec.test_b.name, **spec.test_b.params_dict()},
        },
        "wall_time_s": wall,
        "equivalence": report.to_dict(),
        "config": spec.config,
    }
    _write_json(out / "report.json", payload)
    return 0


def _cmd_run(args) -> int:
    text, source = _resolve_scenario(args.scenario)
    spec = load_scenario_text(text, source, args.set or [])
    if isinstance(spec, DistributionSpec):
        return _run_distribution(spec, args)
    if isinstance(spec, TailSpec):
        return _run_tail(spec, args)
    return _run_equivalence(spec, args)


def _cmd_list_presets(_args) -> int:
    names = preset_names()
    for name in names:
        print(f"{name:<28} {preset_description(name)}")
    print(f"{len(names)} presets")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expertcompare",
        description="Simulate forecasting-strategy pairs and compare experts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file or bundled preset")
    run.add_argument("scenario", help="scenario file path or preset name")
    run.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a scenario key (repeatable)",
    )
    run.add_argument(
        "--workers",
        type=int,
        default=os.cpu_count() or 1,
        help="parallel trial workers (results are identical for any value)",
    )
    run.add_argument("--out", default=".", help="output directory for reports")
    run.add_argument(
        "--trials-jsonl", action="store_true", help="also write per-trial trials.jsonl"
    )
    run.add_argument(
        "--trajectory",
        action="store_true",
        help="also write trajectory.csv for the first trial",
    )
    run.add_argument(
        "--profiles",
        action="store_true",
        help="also write crosscal_profiles.csv for the first trial",
    )
    run.set_defaults(func=_cmd_run)

    lp = sub.add_parser("list-presets", help="list bundled scenarios")
    lp.set_defaults(func=_cmd_list_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
