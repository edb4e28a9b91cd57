"""Deployment orchestration: fetch, select, marshal, archive, notify, ACK.

A job moves through ``created -> fetching -> selecting -> marshaling ->
deploying -> complete`` (``failed`` is reachable from any active state).
The four setup phases are bracketed by a monotonic clock with no overlap;
repository fetch time is recorded separately because upstream latency is
nondeterministic. Archives are deterministic gzip'd tars published over the
orchestrator's own HTTP file endpoint; devices pull them and acknowledge.
"""

from __future__ import annotations

import gzip
import hashlib
import io
import json
import logging
import tarfile
import threading
import time
import urllib.error
import urllib.request
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Sequence

from . import descriptor as descriptor_mod
from . import repository as repository_mod
from . import selector as selector_mod
from ._scratch import make_scratch_dir
from .descriptor import VirtualSensorDescriptor
from .model import CONTEXT_FIELDS, Region
from .selector import DEFAULT_CRITERIA, CriterionSpec

logger = logging.getLogger(__name__)

ACK_PENDING = "pending"
ACK_OK = "ok"


class UnknownJobError(KeyError):
    """No job with the requested id."""


class ValidationError(ValueError):
    """Job request rejected; ``errors`` maps field name to problem."""

    def __init__(self, errors: dict[str, str]) -> None:
        super().__init__(f"invalid job request: {errors}")
        self.errors = errors


class JobState(str, Enum):
    CREATED = "created"
    FETCHING = "fetching"
    SELECTING = "selecting"
    MARSHALING = "marshaling"
    DEPLOYING = "deploying"
    COMPLETE = "complete"
    FAILED = "failed"


_STATE_ORDER = [
    JobState.CREATED,
    JobState.FETCHING,
    JobState.SELECTING,
    JobState.MARSHALING,
    JobState.DEPLOYING,
    JobState.COMPLETE,
]


@dataclass
class PhaseTimings:
    """Milliseconds per setup phase, populated as each phase finishes."""

    unmarshal_ms: float | None = None
    select_ms: float | None = None
    marshal_ms: float | None = None
    deploy_ms: float | None = None

    @property
    def setup_ms(self) -> float | None:
        parts = (self.unmarshal_ms, self.select_ms, self.marshal_ms, self.deploy_ms)
        if any(p is None for p in parts):
            return None
        return sum(parts)  # type: ignore[arg-type]

    def to_dict(self) -> dict[str, float | None]:
        return {
            "unmarshal_ms": self.unmarshal_ms,
            "select_ms": self.select_ms,
            "marshal_ms": self.marshal_ms,
            "deploy_ms": self.deploy_ms,
            "setup_ms": self.setup_ms,
        }


@dataclass(frozen=True, slots=True)
class DeployManifest:
    """What one device needs to pull and verify one archive."""

    job_id: str
    device: str
    archive_uri: str
    archive_digest: str
    descriptor_count: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "job_id": self.job_id,
            "device": self.device,
            "archive_uri": self.archive_uri,
            "archive_digest": self.archive_digest,
            "descriptor_count": self.descriptor_count,
        }


@dataclass
class DeployJob:
    """Mutable record of one deployment request and its progress."""

    id: str
    region: Region
    requested_count: int
    targets: list[str]
    selector: str = "topsis"
    criteria: tuple[CriterionSpec, ...] = DEFAULT_CRITERIA
    per_device_limit: int | None = None
    source: str = "synthetic"
    seed: int = 0
    measurement_type: str = "temperature"
    history_hours: int = 168
    priority: int = 10
    sampling_rate: int = 1
    state: JobState = JobState.CREATED
    timings: PhaseTimings = field(default_factory=PhaseTimings)
    acks: dict[str, str] = field(default_factory=dict)
    manifests: list[DeployManifest] = field(default_factory=list)
    archive_bytes: list[int] = field(default_factory=list)
    available: int | None = None
    descriptor_count: int = 0
    dropped: int = 0
    fetch_ms: float | None = None
    error: str | None = None
    created_at: float = field(default_factory=time.time)

    def view(self) -> dict[str, Any]:
        """JSON-safe status snapshot."""
        return {
            "id": self.id,
            "state": self.state.value,
            "region": {
                "initial": {
                    "latitude": self.region.initial.latitude,
                    "longitude": self.region.initial.longitude,
                },
                "final": {
                    "latitude": self.region.final.latitude,
                    "longitude": self.region.final.longitude,
                },
            },
            "requested_count": self.requested_count,
            "per_device_limit": self.per_device_limit,
            "selector": self.selector,
            "criteria": [{"name": c.name, "direction": c.direction} for c in self.criteria],
            "source": self.source,
            "seed": self.seed,
            "targets": list(self.targets),
            "timings": self.timings.to_dict(),
            "fetch_ms": self.fetch_ms,
            "acks": dict(self.acks),
            "manifests": [m.to_dict() for m in self.manifests],
            "available": self.available,
            "descriptor_count": self.descriptor_count,
            "dropped": self.dropped,
            "error": self.error,
            "created_at": self.created_at,
        }


def partition(items: Sequence, devices: Sequence, per_device_limit: int | None = None):
    """Split items across devices: contiguous, order-preserving, even.

    Device ``k`` receives ``ceil(n/d)`` or ``floor(n/d)`` items with the
    earlier devices taking the larger share. ``per_device_limit`` caps each
    share; excess items are dropped and counted.

    Returns ``(shares, dropped)`` where ``shares[k]`` is device k's list.
    """
    if not items:
        raise ValueError("cannot partition zero items")
    if not devices:
        raise ValueError("cannot partition across zero devices")
    n, d = len(items), len(devices)
    base, remainder = divmod(n, d)
    shares: list[list] = []
    dropped = 0
    offset = 0
    for k in range(d):
        size = base + (1 if k < remainder else 0)
        share = list(items[offset : offset + size])
        offset += size
        if per_device_limit is not None and len(share) > per_device_limit:
            dropped += len(share) - per_device_limit
            share = share[:per_device_limit]
        shares.append(share)
    return shares, dropped


def compress(
    files: Sequence[VirtualSensorDescriptor], compresslevel: int = 6
) -> tuple[bytes, str]:
    """Deterministic gzip'd tar of descriptors plus its SHA-256 hex digest.

    Entries are sorted by file name with zeroed timestamps, fixed 0644
    permissions and no owner info; the gzip header carries no mtime or
    file name. Identical descriptor sets therefore produce identical
    bytes on any machine.
    """
    if not files:
        raise ValueError("cannot compress an empty file list")
    buffer = io.BytesIO()
    gz = gzip.GzipFile(fileobj=buffer, mode="wb", compresslevel=compresslevel, mtime=0)
    with tarfile.open(fileobj=gz, mode="w|", format=tarfile.USTAR_FORMAT) as tar:
        for item in sorted(files, key=lambda f: f.file_name):
            info = tarfile.TarInfo(name=item.file_name)
            info.size = len(item.content)
            info.mtime = 0
            info.mode = 0o644
            info.uid = 0
            info.gid = 0
            info.uname = ""
            info.gname = ""
            tar.addfile(info, io.BytesIO(item.content))
    gz.close()
    data = buffer.getvalue()
    return data, hashlib.sha256(data).hexdigest()


class _ArtifactServer:
    """Static file endpoint publishing archives at stable URIs."""

    def __init__(self, archives_dir: Path, host: str = "127.0.0.1") -> None:
        root = archives_dir

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, fmt, *args):
                logger.debug("artifacts: " + fmt, *args)

            def do_GET(self):
                parts = self.path.strip("/").split("/")
                if len(parts) != 3 or parts[0] != "artifacts":
                    self.send_error(404)
                    return
                job_id, file_name = parts[1], parts[2]
                path = root / job_id / file_name
                if "/" in job_id or ".." in job_id or ".." in file_name or not path.is_file():
                    self.send_error(404)
                    return
                data = path.read_bytes()
                self.send_response(200)
                self.send_header("Content-Type", "application/gzip")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        self.server = ThreadingHTTPServer((host, 0), Handler)
        self.server.daemon_threads = True
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()
        host_bound, port = self.server.server_address[:2]
        self.base_url = f"http://{host_bound}:{port}"

    def stop(self) -> None:
        self.server.shutdown()
        self.server.server_close()


class Orchestrator:
    """Coordinates jobs end-to-end and exposes their status.

    Jobs persist as append-only JSONL snapshots under the work directory so
    status survives a restart. Multiple jobs may run concurrently; within
    one job the four phases are strictly sequential because each is timed.
    """

    SELECTORS = ("topsis", "random")

    def __init__(
        self,
        work_dir: Path | str | None = None,
        fixture_dir: Path | str | None = None,
        ack_timeout: float = 60.0,
        compresslevel: int = 6,
        host: str = "127.0.0.1",
    ) -> None:
        self.work_dir = Path(work_dir) if work_dir else make_scratch_dir("sensedeploy-")
        self.store_dir = self.work_dir / "store"
        self.archives_dir = self.work_dir / "archives"
        self.jobs_log = self.work_dir / "jobs.log"
        self.store_dir.mkdir(parents=True, exist_ok=True)
        self.archives_dir.mkdir(parents=True, exist_ok=True)
        self.fixture_dir = fixture_dir
        self.ack_timeout = ack_timeout
        self.compresslevel = compresslevel
        self.host = host
        self._jobs: dict[str, DeployJob] = {}
        self._restored: dict[str, dict[str, Any]] = {}
        self._lock = threading.Lock()
        self._log_lock = threading.Lock()
        self._artifacts: _ArtifactServer | None = None
        self._load_job_log()

    # -- lifecycle -------------------------------------------------------

    def close(self) -> None:
        if self._artifacts is not None:
            self._artifacts.stop()
            self._artifacts = None

    def __enter__(self) -> "Orchestrator":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    @property
    def artifact_base_url(self) -> str:
        with self._lock:
            if self._artifacts is None:
                self._artifacts = _ArtifactServer(self.archives_dir, host=self.host)
            return self._artifacts.base_url

    # -- job API -----------------------------------------------------------

    def create_job(
        self,
        region: Region,
        count: int,
        targets: Sequence[str],
        selector: str = "topsis",
        criteria: Sequence[CriterionSpec] | None = None,
        per_device_limit: int | None = None,
        source: str = "synthetic",
        seed: int = 0,
        measurement_type: str = "temperature",
        history_hours: int = 168,
        priority: int = 10,
        sampling_rate: int = 1,
        start: bool = True,
    ) -> DeployJob:
        """Validate, persist and (by default) start a job asynchronously."""
        errors: dict[str, str] = {}
        if not isinstance(region, Region):
            errors["region"] = "must be a Region"
        if count < 1:
            errors["count"] = f"must be >= 1, got {count}"
        if not targets:
            errors["targets"] = "needs at least one device endpoint"
        if selector not in self.SELECTORS:
            errors["selector"] = f"must be one of {self.SELECTORS}, got {selector!r}"
        if per_device_limit is not None and per_device_limit < 1:
            errors["per_device_limit"] = f"must be >= 1 when set, got {per_device_limit}"
        if measurement_type not in descriptor_mod.MEASUREMENT_TYPES:
            errors["measurement_type"] = (
                f"must be one of {descriptor_mod.MEASUREMENT_TYPES}, got {measurement_type!r}"
            )
        if history_hours < 1:
            errors["history_hours"] = f"must be >= 1, got {history_hours}"
        chosen = tuple(criteria) if criteria else DEFAULT_CRITERIA
        for c in chosen:
            if c.name not in CONTEXT_FIELDS:
                errors["criteria"] = f"unknown context property {c.name!r}"
        if errors:
            raise ValidationError(errors)

        job = DeployJob(
            id=uuid.uuid4().hex[:12],
            region=region,
            requested_count=count,
            targets=list(targets),
            selector=selector,
            criteria=chosen,
            per_device_limit=per_device_limit,
            source=source,
            seed=seed,
            measurement_type=measurement_type,
            history_hours=history_hours,
            priority=priority,
            sampling_rate=sampling_rate,
            acks={t: ACK_PENDING for t in targets},
        )
        with self._lock:
            self._jobs[job.id] = job
        self._persist(job)
        if start:
            thread = threading.Thread(target=self._run_guarded, args=(job,), daemon=True)
            thread.start()
        return job

    def job_status(self, job_id: str) -> DeployJob:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise UnknownJobError(job_id)
        return job

    def job_view(self, job_id: str) -> dict[str, Any]:
        """Status snapshot; falls back to persisted records after restart."""
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None and job_id in self._restored:
                return dict(self._restored[job_id])
        if job is None:
            raise UnknownJobError(job_id)
        return job.view()

    def wait(self, job_id: str, timeout: float = 300.0, poll: float = 0.05) -> DeployJob:
        """Block until the job reaches a terminal state."""
        deadline = time.monotonic() + timeout
        job = self.job_status(job_id)
        while job.state not in (JobState.COMPLETE, JobState.FAILED):
            if time.monotonic() > deadline:
                raise TimeoutError(f"job {job_id} still {job.state.value} after {timeout}s")
            time.sleep(poll)
            job = self.job_status(job_id)
        return job

    def preview(self, region: Region, source: str = "fixture", limit: int | None = None):
        """Count (and sample) the sensors available in a region."""
        adapter = self._adapter(source, seed=0, count=limit)
        query = repository_mod.RepositoryQuery(
            region=region, limit=limit if source == "synthetic" else None, source=source
        )
        batch = adapter.send(query)
        result = repository_mod.unmarshal(batch)
        sensors = result.sensors
        return len(sensors), sensors[: limit if limit is not None else len(sensors)]

    # -- pipeline ----------------------------------------------------------

    def run_pipeline(self, job: DeployJob) -> DeployJob:
        """Execute a created job to a terminal state (synchronously)."""
        if job.state != JobState.CREATED:
            raise ValueError(f"job {job.id} is {job.state.value}, expected created")
        phase = "fetch"
        try:
            self._transition(job, JobState.FETCHING)
            adapter = self._adapter(job.source, seed=job.seed, count=job.requested_count)
            query = repository_mod.RepositoryQuery(
                region=job.region,
                limit=job.requested_count if job.source == "synthetic" else None,
                source=job.source,
            )
            t0 = time.perf_counter()
            batch = adapter.send(query)
            job.fetch_ms = (time.perf_counter() - t0) * 1000.0

            phase = "unmarshal"
            t0 = time.perf_counter()
            result = repository_mod.unmarshal(batch)
            job.timings.unmarshal_ms = (time.perf_counter() - t0) * 1000.0
            sensors = result.sensors
            job.available = len(sensors)

            phase = "select"
            self._transition(job, JobState.SELECTING)
            t0 = time.perf_counter()
            if job.selector == "topsis":
                selected = selector_mod.select_top(sensors, job.criteria, job.requested_count)
            else:
                selected = selector_mod.select_random(sensors, job.requested_count, job.seed)
            job.timings.select_ms = (time.perf_counter() - t0) * 1000.0

            phase = "marshal"
            self._transition(job, JobState.MARSHALING)
            t0 = time.perf_counter()
            descriptors = descriptor_mod.marshal_batch(
                selected,
                job.measurement_type,
                history_hours=job.history_hours,
                store_dir=self.store_dir / job.id,
                priority=job.priority,
                sampling_rate=job.sampling_rate,
            )
            job.timings.marshal_ms = (time.perf_counter() - t0) * 1000.0

            phase = "partition"
            shares, dropped = partition(descriptors, job.targets, job.per_device_limit)
            job.dropped = dropped
            job.descriptor_count = sum(len(s) for s in shares)

            phase = "deploy"
            self._transition(job, JobState.DEPLOYING)
            t0 = time.perf_counter()
            self._deploy(job, shares)
            job.timings.deploy_ms = (time.perf_counter() - t0) * 1000.0

            if all(status == ACK_OK for status in job.acks.values()):
                self._transition(job, JobState.COMPLETE)
            else:
                bad = {t: s for t, s in job.acks.items() if s != ACK_OK}
                self._fail(job, f"deploy: devices did not acknowledge: {bad}")
        except Exception as exc:  # any phase error fails the job with its phase name
            self._fail(job, f"{phase}: {exc}")
            logger.exception("job %s failed in %s", job.id, phase)
        return job

    def _run_guarded(self, job: DeployJob) -> None:
        try:
            self.run_pipeline(job)
        except Exception:
            logger.exception("job %s crashed outside the pipeline", job.id)

    def _adapter(self, source: str, seed: int, count: int | None):
        return repository_mod.get_adapter(source, seed=seed, fixture_dir=self.fixture_dir)

    def _deploy(self, job: DeployJob, shares: list[list[VirtualSensorDescriptor]]) -> None:
        """Compress, publish and notify per device, pipelined across devices.

        Each device's archive is compressed, written to the artifact store,
        and its manifest delivered, all inside one worker task — so agents
        start pulling and unpacking while later archives are still being
        compressed. Archive bytes depend only on the share contents, never
        on worker scheduling.
        """
        base = self.artifact_base_url
        job_dir = self.archives_dir / job.id
        job_dir.mkdir(parents=True, exist_ok=True)
        manifests: list[DeployManifest] = []
        sizes: list[int] = []
        futures = []
        with ThreadPoolExecutor(max_workers=len(shares)) as pool:
            for index, (target, share) in enumerate(zip(job.targets, shares)):
                data, digest = compress(share, compresslevel=self.compresslevel)
                file_name = f"{index}.tar.gz"
                with open(job_dir / file_name, "wb") as fh:
                    fh.write(data)
                manifest = DeployManifest(
                    job_id=job.id,
                    device=target,
                    archive_uri=f"{base}/artifacts/{job.id}/{file_name}",
                    archive_digest=digest,
                    descriptor_count=len(share),
                )
                manifests.append(manifest)
                sizes.append(len(data))
                futures.append(pool.submit(self._deliver, manifest))
            for manifest, future in zip(manifests, futures):
                job.acks[manifest.device] = future.result()
        job.manifests = manifests
        job.archive_bytes = sizes

    def _deliver(self, manifest: DeployManifest) -> str:
        """POST one manifest to its device; map failures to ack reasons."""
        request = urllib.request.Request(
            manifest.device.rstrip("/") + "/deploy",
            data=json.dumps(manifest.to_dict()).encode("utf-8"),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(request, timeout=self.ack_timeout) as response:
                ack = json.loads(response.read())
        except TimeoutError:
            return "failed(timeout)"
        except urllib.error.URLError as exc:
            if isinstance(getattr(exc, "reason", None), TimeoutError):
                return "failed(timeout)"
            return "failed(unreachable)"
        except (OSError, json.JSONDecodeError) as exc:
            return f"failed({exc.__class__.__name__})"
        if ack.get("status") == "ok":
            return ACK_OK
        return f"failed({ack.get('reason', 'unknown')})"

    # -- state/persistence ---------------------------------------------------

    def _transition(self, job: DeployJob, state: JobState) -> None:
        current = _STATE_ORDER.index(job.state)
        target = _STATE_ORDER.index(state)
        if target != current + 1:
            raise ValueError(f"illegal transition {job.state.value} -> {state.value}")
        job.state = state
        self._persist(job)

    def _fail(self, job: DeployJob, message: str) -> None:
        job.state = JobState.FAILED
        job.error = message
        self._persist(job)

    def _persist(self, job: DeployJob) -> None:
        record = json.dumps({"ts": time.time(), "job": job.view()}, separators=(",", ":"))
        with self._log_lock:
            with open(self.jobs_log, "a", encoding="utf-8") as fh:
                fh.write(record + "\n")

    def _load_job_log(self) -> None:
        if not self.jobs_log.exists():
            return
        for line in self.jobs_log.read_text("utf-8").splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                view = json.loads(line)["job"]
                self._restored[view["id"]] = view
            except (json.JSONDecodeError, KeyError):
                logger.warning("skipping corrupt job log line")
