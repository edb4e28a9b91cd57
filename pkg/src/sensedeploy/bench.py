"""Factorial performance sweep over device counts and sensor counts.

Each (devices, sensors, replication) cell generates a synthetic batch from
a cell-derived seed, stands up a fresh local agent fleet, runs the full
pipeline, and records one trial row with the four phase durations. Cells
run strictly sequentially so phase timings do not interfere. Repository
fetch happens before the timed region and is excluded from setup time.
"""

from __future__ import annotations

import csv
import gc
import logging
import shutil
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._scratch import make_scratch_dir
from .agent import spawn_fleet
from .model import GeoPoint, Region
from .orchestrator import JobState, Orchestrator

logger = logging.getLogger(__name__)

#: The sweep region; which box is used does not matter for timing, only the
#: record volume does, so the wider NA box is the default.
BENCH_REGION = Region(GeoPoint(70.0, -170.0), GeoPoint(30.0, -60.0))

TRIAL_COLUMNS = (
    "devices",
    "sensors",
    "rep",
    "unmarshal_ms",
    "select_ms",
    "marshal_ms",
    "deploy_ms",
    "setup_ms",
    "bytes_per_device",
)

PHASE_COLUMNS = ("unmarshal_ms", "select_ms", "marshal_ms", "deploy_ms", "setup_ms")


class InsufficientReplicationsError(ValueError):
    """A summary cell has fewer than two records."""


@dataclass(frozen=True, slots=True)
class ExperimentDesign:
    """Factor levels and replication count for one sweep."""

    device_levels: tuple[int, ...] = (1, 4, 16)
    sensor_levels: tuple[int, ...] = (1000, 20000, 40000, 60000, 80000, 100000)
    replications: int = 50
    seed: int = 42

    def __post_init__(self) -> None:
        if not self.device_levels or min(self.device_levels) < 1:
            raise ValueError(f"device levels must be >= 1: {self.device_levels}")
        if not self.sensor_levels or min(self.sensor_levels) < 1:
            raise ValueError(f"sensor levels must be >= 1: {self.sensor_levels}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1: {self.replications}")

    @property
    def cells(self) -> int:
        return len(self.device_levels) * len(self.sensor_levels) * self.replications


@dataclass(frozen=True, slots=True)
class TrialRecord:
    """One pipeline run's measurements."""

    devices: int
    sensors: int
    rep: int
    unmarshal_ms: float
    select_ms: float
    marshal_ms: float
    deploy_ms: float
    setup_ms: float
    bytes_per_device: float


@dataclass(frozen=True, slots=True)
class FailedCell:
    """A cell whose job did not complete; kept so failures are visible."""

    devices: int
    sensors: int
    rep: int
    reason: str


@dataclass
class BenchReport:
    """Everything a sweep produced."""

    design: ExperimentDesign
    records: list[TrialRecord] = field(default_factory=list)
    failures: list[FailedCell] = field(default_factory=list)

    def write_csv(self, path: Path | str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRIAL_COLUMNS)
            for r in self.records:
                writer.writerow([getattr(r, c) for c in TRIAL_COLUMNS])

    def write_summary_csv(self, path: Path | str) -> None:
        rows = summarize(self.records)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            header = ["devices", "sensors"]
            for phase in PHASE_COLUMNS:
                header += [f"{phase}_mean", f"{phase}_ci95"]
            writer.writerow(header)
            for row in rows:
                out = [row["devices"], row["sensors"]]
                for phase in PHASE_COLUMNS:
                    out += [f"{row[phase + '_mean']:.3f}", f"{row[phase + '_ci95']:.3f}"]
                writer.writerow(out)


def cell_seed(seed: int, devices: int, sensors: int, rep: int) -> int:
    """Stable per-cell seed so any cell can be reproduced in isolation."""
    mix = (seed * 1_000_003 + devices) * 1_000_003 + sensors
    return (mix * 1_000_003 + rep) % (2**31 - 1)


def run_trial(
    devices: int,
    sensors: int,
    rep: int,
    seed: int,
    keep_dirs: bool = False,
    compresslevel: int = 6,
    ack_timeout: float = 300.0,
    agent_mode: str = "process",
) -> TrialRecord:
    """Run one cell: fresh fleet, fresh orchestrator, one pipeline pass.

    Agents default to separate processes so their extraction work does not
    share the orchestrator's interpreter lock and deploy timings reflect
    real device parallelism.
    """
    work = make_scratch_dir(f"bench-{devices}x{sensors}-")
    fleet = spawn_fleet(devices, root_dir=work / "agents", mode=agent_mode)
    orch = Orchestrator(work_dir=work / "orch", ack_timeout=ack_timeout, compresslevel=compresslevel)
    try:
        job = orch.create_job(
            region=BENCH_REGION,
            count=sensors,
            targets=fleet.endpoints,
            selector="topsis",
            source="synthetic",
            seed=cell_seed(seed, devices, sensors, rep),
            start=False,
        )
        # Cyclic GC pauses would otherwise land inside phase brackets at
        # random; reference counting still reclaims the (acyclic) pipeline
        # data promptly.
        gc.collect()
        gc.disable()
        try:
            orch.run_pipeline(job)
        finally:
            gc.enable()
        if job.state != JobState.COMPLETE:
            raise RuntimeError(job.error or f"job ended {job.state.value}")
        t = job.timings
        return TrialRecord(
            devices=devices,
            sensors=sensors,
            rep=rep,
            unmarshal_ms=t.unmarshal_ms,
            select_ms=t.select_ms,
            marshal_ms=t.marshal_ms,
            deploy_ms=t.deploy_ms,
            setup_ms=t.setup_ms,
            bytes_per_device=sum(job.archive_bytes) / devices,
        )
    finally:
        fleet.close()
        orch.close()
        if not keep_dirs:
            shutil.rmtree(work, ignore_errors=True)


def run_design(design: ExperimentDesign, progress: bool = False) -> BenchReport:
    """Execute every cell of the design, strictly sequentially.

    Device levels vary fastest so the cells compared by the device-scaling
    analysis run seconds apart; slow background drift then cancels out of
    the per-level means instead of masquerading as a device effect. Failed
    cells are recorded in the report (never silently skipped) and the
    sweep continues.
    """
    report = BenchReport(design=design)
    total = design.cells
    done = 0
    for sensors in design.sensor_levels:
        for rep in range(design.replications):
            for devices in design.device_levels:
                started = time.perf_counter()
                try:
                    record = run_trial(devices, sensors, rep, design.seed)
                    report.records.append(record)
                except Exception as exc:
                    report.failures.append(
                        FailedCell(devices=devices, sensors=sensors, rep=rep, reason=str(exc))
                    )
                    logger.error("cell d=%d s=%d rep=%d failed: %s", devices, sensors, rep, exc)
                done += 1
                if progress:
                    elapsed = time.perf_counter() - started
                    print(
                        f"[{done}/{total}] devices={devices} sensors={sensors} "
                        f"rep={rep} ({elapsed:.1f}s)",
                        flush=True,
                    )
    return report


def summarize(records: Sequence[TrialRecord]) -> list[dict]:
    """Mean and 95% normal-approximation CI per phase per (devices, sensors).

    Raises :class:`InsufficientReplicationsError` when any cell has fewer
    than two records (the CI needs a sample standard deviation).
    """
    cells: dict[tuple[int, int], list[TrialRecord]] = {}
    for r in records:
        cells.setdefault((r.devices, r.sensors), []).append(r)
    rows = []
    for (devices, sensors), group in sorted(cells.items()):
        if len(group) < 2:
            raise InsufficientReplicationsError(
                f"cell devices={devices} sensors={sensors} has {len(group)} record(s); need >= 2"
            )
        row: dict = {"devices": devices, "sensors": sensors, "n": len(group)}
        for phase in PHASE_COLUMNS:
            values = np.array([getattr(r, phase) for r in group], dtype=np.float64)
            mean = float(values.mean())
            half_width = 1.96 * float(values.std(ddof=1)) / np.sqrt(len(values))
            row[f"{phase}_mean"] = mean
            row[f"{phase}_ci95"] = float(half_width)
        row["bytes_per_device_mean"] = float(
            np.mean([r.bytes_per_device for r in group])
        )
        rows.append(row)
    return rows


def check_device_scaling(
    records: Sequence[TrialRecord], sensors: int, tolerance: float = 0.25
) -> dict:
    """Shape assertions at a fixed sensor count across device levels.

    Returns per-level means plus two booleans: whether mean bytes per
    device strictly decreases as devices grow, and whether the unmarshal,
    select and marshal means vary by less than ``tolerance`` (relative to
    the smallest mean) across device levels.
    """
    selected = [r for r in records if r.sensors == sensors]
    levels = sorted({r.devices for r in selected})
    if len(levels) < 2:
        raise ValueError(f"need >= 2 device levels at sensors={sensors}, have {levels}")
    by_level = {
        d: [r for r in selected if r.devices == d] for d in levels
    }
    bytes_means = [float(np.mean([r.bytes_per_device for r in by_level[d]])) for d in levels]
    strictly_decreasing = all(a > b for a, b in zip(bytes_means, bytes_means[1:]))
    spreads = {}
    independent = True
    for phase in ("unmarshal_ms", "select_ms", "marshal_ms"):
        means = [float(np.mean([getattr(r, phase) for r in by_level[d]])) for d in levels]
        spread = (max(means) - min(means)) / min(means) if min(means) > 0 else 0.0
        spreads[phase] = spread
        if spread >= tolerance:
            independent = False
    return {
        "levels": levels,
        "bytes_per_device_means": bytes_means,
        "bytes_strictly_decreasing": strictly_decreasing,
        "phase_spreads": spreads,
        "phases_independent_of_devices": independent,
    }


def check_phase_growth(
    records: Sequence[TrialRecord],
    devices: int,
    slack: float = 1.5,
    floor_ms: float = 5.0,
) -> dict:
    """Check phase means grow no worse than linearly (x ``slack``) in sensors.

    Means below ``floor_ms`` are exempt: sub-millisecond phases at small
    sensor counts are timer noise, not workload.
    """
    selected = [r for r in records if r.devices == devices]
    levels = sorted({r.sensors for r in selected})
    if len(levels) < 2:
        raise ValueError(f"need >= 2 sensor levels at devices={devices}, have {levels}")
    violations = []
    for phase in ("unmarshal_ms", "select_ms", "marshal_ms", "deploy_ms"):
        means = {
            s: float(np.mean([getattr(r, phase) for r in selected if r.sensors == s]))
            for s in levels
        }
        for lo, hi in zip(levels, levels[1:]):
            if means[lo] < floor_ms:
                continue
            limit = slack * (hi / lo) * means[lo]
            if means[hi] > limit:
                violations.append(
                    f"{phase}: mean {means[hi]:.1f}ms at {hi} sensors exceeds "
                    f"{limit:.1f}ms (= {slack} x {hi}/{lo} x {means[lo]:.1f}ms)"
                )
    return {"levels": levels, "violations": violations, "linear_within_slack": not violations}
