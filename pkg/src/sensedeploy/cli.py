"""Command-line front door.

Subcommands mirror the library surfaces: ``deploy`` runs one job end to
end, ``bench`` runs the factorial sweep, ``report`` ranks cities for a
condition, ``rank`` scores an arbitrary decision-matrix CSV, ``serve``
starts the REST API and ``agents`` stands up a local device fleet.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import analysis, bench
from .model import GeoPoint, Region
from .orchestrator import Orchestrator
from .repository import NAMED_REGIONS
from .selector import CriterionSpec, DecisionMatrix, rank


def parse_region(text: str) -> Region:
    """Accept a named region or 'min_lon,min_lat,max_lon,max_lat'."""
    if text in NAMED_REGIONS:
        return NAMED_REGIONS[text]
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"region must be one of {sorted(NAMED_REGIONS)} or min_lon,min_lat,max_lon,max_lat"
        )
    min_lon, min_lat, max_lon, max_lat = (float(p) for p in parts)
    return Region(
        initial=GeoPoint(latitude=max_lat, longitude=min_lon),
        final=GeoPoint(latitude=min_lat, longitude=max_lon),
    )


def _int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p]


def cmd_deploy(args: argparse.Namespace) -> int:
    orch = Orchestrator(work_dir=args.work_dir, fixture_dir=args.fixtures)
    try:
        job = orch.create_job(
            region=args.region,
            count=args.count,
            targets=args.targets.split(","),
            selector=args.selector,
            source=args.source,
            seed=args.seed,
            per_device_limit=args.per_device_limit,
            measurement_type=args.measurement,
            history_hours=args.history,
            start=False,
        )
        orch.run_pipeline(job)
        view = job.view()
        print(json.dumps(view, indent=2))
        return 0 if view["state"] == "complete" else 1
    finally:
        orch.close()


def cmd_bench(args: argparse.Namespace) -> int:
    design = bench.ExperimentDesign(
        device_levels=tuple(args.devices),
        sensor_levels=tuple(args.sensors),
        replications=args.reps,
        seed=args.seed,
    )
    started = time.perf_counter()
    report = bench.run_design(design, progress=True)
    elapsed = time.perf_counter() - started
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / "trials.csv")
    report.write_summary_csv(out / "summary.csv")
    print(f"{len(report.records)} trials in {elapsed:.1f}s -> {out}/trials.csv")
    if report.failures:
        for failure in report.failures:
            print(
                f"FAILED devices={failure.devices} sensors={failure.sensors} "
                f"rep={failure.rep}: {failure.reason}",
                file=sys.stderr,
            )
        return 1
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    if args.input:
        readings = analysis.read_city_csv(Path(args.input).read_text("utf-8"))
    else:
        readings = analysis.load_city_fixture()
    profile = analysis.DISEASE_PROFILES[args.disease]
    ranking = analysis.rank_cities(readings, profile)
    sys.stdout.write(analysis.ranking_csv(ranking))
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    text = Path(args.input).read_text("utf-8") if args.input else sys.stdin.read()
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 2:
        print("need a header row and at least one option row", file=sys.stderr)
        return 1
    criteria = []
    for cell in rows[0]:
        name, _, direction = cell.strip().partition(":")
        criteria.append(CriterionSpec(name, direction))
    values = np.array([[float(cell) for cell in row] for row in rows[1:]])
    matrix = DecisionMatrix(tuple(range(len(values))), tuple(criteria), values)
    result = rank(matrix)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["option", "closeness"])
    for index in result.order:
        writer.writerow([index, f"{result.closeness[index]:.9f}"])
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .api import serve

    serve(work_dir=args.work_dir, fixture_dir=args.fixtures, host=args.host, port=args.port)
    return 0


def cmd_agents(args: argparse.Namespace) -> int:
    from .agent import spawn_fleet

    fleet = spawn_fleet(args.count, base_port=args.base_port, root_dir=args.deploy_dir)
    print(",".join(fleet.endpoints), flush=True)
    try:
        while True:
            time.sleep(1.0)
    except KeyboardInterrupt:
        fleet.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sensedeploy")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deploy", help="run one deployment job end to end")
    p.add_argument("--region", type=parse_region, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--targets", required=True, help="comma-separated device endpoints")
    p.add_argument("--selector", choices=("topsis", "random"), default="topsis")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--source", choices=("fixture", "synthetic"), default="fixture")
    p.add_argument("--per-device-limit", type=int, default=None)
    p.add_argument("--measurement", choices=("temperature", "humidity", "pressure"),
                   default="temperature")
    p.add_argument("--history", type=int, default=168, help="storage window, hours")
    p.add_argument("--work-dir", default=None)
    p.add_argument("--fixtures", default=None)
    p.set_defaults(func=cmd_deploy)

    p = sub.add_parser("bench", help="run the factorial timing sweep")
    p.add_argument("--devices", type=_int_list, default=[1, 4, 16])
    p.add_argument("--sensors", type=_int_list,
                   default=[1000, 20000, 40000, 60000, 80000, 100000])
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="results")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="rank cities for a rheumatic condition")
    p.add_argument("--disease", choices=sorted(analysis.DISEASE_PROFILES), required=True)
    p.add_argument("--input", default=None, help="readings CSV (default: shipped table)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("rank", help="rank a decision-matrix CSV (header: name:max|min)")
    p.add_argument("--input", default=None, help="CSV path (default: stdin)")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("serve", help="run the REST API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--work-dir", default=None)
    p.add_argument("--fixtures", default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("agents", help="run a local device-agent fleet")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--base-port", type=int, default=0)
    p.add_argument("--deploy-dir", default=None)
    p.set_defaults(func=cmd_agents)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
