"""Target-device agents: download, verify, unpack and acknowledge.

An agent stands in for a middleware host. It accepts a deploy manifest over
HTTP, pulls the referenced archive, checks the SHA-256 digest *before*
touching the archive contents, extracts into a staging directory, validates
every descriptor as well-formed XML, then atomically renames staging into
place and acknowledges. Any failure yields a failed acknowledgement with a
machine-readable reason and leaves no partial job directory behind.
"""

from __future__ import annotations

import gzip
import hashlib
import io
import json
import logging
import os
import shutil
import tarfile
import threading
import time
import zlib
import urllib.error
import urllib.request
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any
from xml.parsers import expat

from ._fileio import FileWriter as _FileWriter

logger = logging.getLogger(__name__)

ACK_OK = "ok"
ACK_FAILED = "failed"

REASON_DOWNLOAD = "download-failed"
REASON_DIGEST = "digest-mismatch"
REASON_EXTRACTION = "extraction-failed"
REASON_COUNT = "count-mismatch"
REASON_XML = "xml-invalid"


class PortInUseError(OSError):
    """Requested agent port is already bound."""


@dataclass(frozen=True, slots=True)
class Ack:
    """Synchronous deployment acknowledgement."""

    status: str
    files: int = 0
    elapsed_ms: float = 0.0
    reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == ACK_OK

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status,
            "files": self.files,
            "elapsed_ms": self.elapsed_ms,
            "reason": self.reason,
        }


@dataclass
class AgentState:
    """What an agent knows about itself."""

    deploy_dir: Path
    deployed_jobs: dict[str, int] = field(default_factory=dict)
    busy: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "deploy_dir": str(self.deploy_dir),
            "deployed_jobs": dict(self.deployed_jobs),
            "busy": self.busy,
        }


class DeviceAgent:
    """A single target device listening for deploy manifests.

    One deployment runs at a time; concurrent manifests queue FIFO on the
    internal lock so elapsed times stay attributable to one job.
    """

    def __init__(
        self,
        deploy_dir: Path | str,
        host: str = "127.0.0.1",
        port: int = 0,
        download_timeout: float = 60.0,
    ) -> None:
        self.state = AgentState(deploy_dir=Path(deploy_dir))
        self.state.deploy_dir.mkdir(parents=True, exist_ok=True)
        self.download_timeout = download_timeout
        self._lock = threading.Lock()
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None
        self._host = host
        self._port = port

    # -- deployment ----------------------------------------------------

    def receive_manifest(self, manifest: dict[str, Any]) -> Ack:
        """Run one deployment end-to-end and acknowledge synchronously.

        Verification order matters: the digest check runs before any
        extraction, so a corrupted archive never reaches the filesystem.
        Re-delivering a manifest is idempotent; the job directory is
        rebuilt through staging and atomically swapped in.
        """
        with self._lock:
            self.state.busy = True
            try:
                return self._deploy(manifest)
            finally:
                self.state.busy = False

    def _deploy(self, manifest: dict[str, Any]) -> Ack:
        started = time.perf_counter()
        job_id = str(manifest["job_id"])
        expected_count = int(manifest["descriptor_count"])
        expected_digest = str(manifest["archive_digest"])
        uri = str(manifest["archive_uri"])

        def failed(reason: str) -> Ack:
            elapsed = (time.perf_counter() - started) * 1000.0
            logger.warning("deploy %s failed: %s", job_id, reason)
            return Ack(status=ACK_FAILED, reason=reason, elapsed_ms=elapsed)

        try:
            with urllib.request.urlopen(uri, timeout=self.download_timeout) as response:
                archive = response.read()
        except (urllib.error.URLError, OSError, ValueError):
            return failed(REASON_DOWNLOAD)

        if hashlib.sha256(archive).hexdigest() != expected_digest:
            return failed(REASON_DIGEST)

        final_dir = self.state.deploy_dir / job_id
        staging = self.state.deploy_dir / f".staging-{job_id}-{uuid.uuid4().hex}"
        staging.mkdir(parents=True)
        count = 0
        try:
            writer = _FileWriter(str(staging))
            try:
                raw = gzip.decompress(archive)
                with tarfile.open(fileobj=io.BytesIO(raw), mode="r:") as tar:
                    for member in tar:
                        if not member.isfile():
                            continue
                        data = raw[member.offset_data : member.offset_data + member.size]
                        try:
                            parser = expat.ParserCreate()
                            parser.Parse(data, True)
                        except expat.ExpatError:
                            return failed(REASON_XML)
                        writer.put(os.path.basename(member.name), data)
                        count += 1
                writer.finish()
            except (tarfile.TarError, OSError, EOFError, zlib.error):
                return failed(REASON_EXTRACTION)
            finally:
                writer.abort()
            if count != expected_count:
                return failed(REASON_COUNT)
            if final_dir.exists():
                shutil.rmtree(final_dir)
            os.replace(staging, final_dir)
        finally:
            shutil.rmtree(staging, ignore_errors=True)

        self.state.deployed_jobs[job_id] = count
        elapsed = (time.perf_counter() - started) * 1000.0
        logger.info("deployed %s: %d descriptors in %.1f ms", job_id, count, elapsed)
        return Ack(status=ACK_OK, files=count, elapsed_ms=elapsed)

    # -- HTTP surface ----------------------------------------------------

    def start(self) -> "DeviceAgent":
        agent = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, fmt, *args):  # quiet the default stderr chatter
                logger.debug("agent %s: " + fmt, agent.endpoint, *args)

            def _send_json(self, code: int, body: dict[str, Any]) -> None:
                data = json.dumps(body).encode("utf-8")
                self.send_response(code)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def do_POST(self):
                if self.path != "/deploy":
                    self._send_json(404, {"error": "unknown path"})
                    return
                length = int(self.headers.get("Content-Length", 0))
                try:
                    manifest = json.loads(self.rfile.read(length))
                    ack = agent.receive_manifest(manifest)
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    self._send_json(400, {"error": f"malformed manifest: {exc}"})
                    return
                self._send_json(200, ack.to_dict())

            def do_GET(self):
                if self.path == "/health":
                    self._send_json(200, agent.state.to_dict())
                else:
                    self._send_json(404, {"error": "unknown path"})

        try:
            self._server = ThreadingHTTPServer((self._host, self._port), Handler)
        except OSError as exc:
            raise PortInUseError(f"cannot bind {self._host}:{self._port}: {exc}") from exc
        self._server.daemon_threads = True
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    @property
    def endpoint(self) -> str:
        if self._server is None:
            raise RuntimeError("agent is not started")
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None


class AgentFleet:
    """A set of independent agents, each with an isolated deploy directory."""

    def __init__(
        self,
        endpoints: list[str],
        root_dir: Path | None = None,
        agents: list[DeviceAgent] | None = None,
        processes: list | None = None,
    ) -> None:
        self.endpoints = endpoints
        self.root_dir = root_dir
        self.agents = agents or []
        self.processes = processes or []

    def close(self, remove_dirs: bool = False) -> None:
        for agent in self.agents:
            agent.stop()
        for process in self.processes:
            process.terminate()
        for process in self.processes:
            process.join(timeout=10.0)
        self.agents = []
        self.processes = []
        if remove_dirs and self.root_dir is not None:
            shutil.rmtree(self.root_dir, ignore_errors=True)

    def __enter__(self) -> "AgentFleet":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def __len__(self) -> int:
        return len(self.endpoints)


def _agent_process_main(deploy_dir: str, host: str, port: int, pipe) -> None:
    agent = DeviceAgent(deploy_dir=deploy_dir, host=host, port=port)
    try:
        agent.start()
    except Exception as exc:  # report bind failures back to the parent
        pipe.send(("error", f"{exc.__class__.__name__}: {exc}"))
        return
    pipe.send(("ok", agent.endpoint))
    pipe.close()
    threading.Event().wait()  # serve until terminated


def spawn_fleet(
    count: int,
    base_port: int = 0,
    root_dir: Path | str | None = None,
    host: str = "127.0.0.1",
    mode: str = "thread",
) -> AgentFleet:
    """Start ``count`` agents and return the fleet handle.

    ``base_port`` 0 picks ephemeral ports; a positive base assigns
    ``base_port + i`` per agent and raises :class:`PortInUseError` when a
    port is taken. Each agent gets its own deploy directory under
    ``root_dir`` (a fresh temp directory by default).

    ``mode='thread'`` runs agents as server threads in this process —
    cheap, easy to inspect in tests. ``mode='process'`` forks one child
    per agent so deployments run truly in parallel; the bench harness
    uses this to keep agent work off the orchestrator's interpreter.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1: {count}")
    if mode not in ("thread", "process"):
        raise ValueError(f"mode must be 'thread' or 'process': {mode!r}")
    if root_dir is None:
        import tempfile

        from ._scratch import scratch_base

        root = Path(tempfile.mkdtemp(prefix="agents-", dir=scratch_base()))
    else:
        root = Path(root_dir)
        root.mkdir(parents=True, exist_ok=True)

    if mode == "thread":
        agents: list[DeviceAgent] = []
        try:
            for i in range(count):
                port = 0 if base_port == 0 else base_port + i
                agent = DeviceAgent(deploy_dir=root / f"device-{i}", host=host, port=port)
                agents.append(agent.start())
        except Exception:
            for agent in agents:
                agent.stop()
            raise
        return AgentFleet([a.endpoint for a in agents], root_dir=root, agents=agents)

    import multiprocessing

    ctx = multiprocessing.get_context("fork")
    processes = []
    endpoints = []
    try:
        for i in range(count):
            port = 0 if base_port == 0 else base_port + i
            parent_conn, child_conn = ctx.Pipe()
            process = ctx.Process(
                target=_agent_process_main,
                args=(str(root / f"device-{i}"), host, port, child_conn),
                daemon=True,
            )
            process.start()
            child_conn.close()
            if not parent_conn.poll(30.0):
                raise RuntimeError(f"agent process {i} did not report its endpoint")
            status, payload = parent_conn.recv()
            if status != "ok":
                if "PortInUseError" in payload:
                    raise PortInUseError(payload)
                raise RuntimeError(f"agent process {i} failed to start: {payload}")
            endpoints.append(payload)
            processes.append(process)
    except Exception:
        for process in processes:
            process.terminate()
        raise
    return AgentFleet(endpoints, root_dir=root, processes=processes)
