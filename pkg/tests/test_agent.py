import gzip
import hashlib
import io
import json
import tarfile
import threading
import urllib.request
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from sensedeploy.agent import Ack, DeviceAgent, PortInUseError, spawn_fleet
from sensedeploy.descriptor import marshal_batch
from sensedeploy.orchestrator import compress
from sensedeploy.repository import NAMED_REGIONS, generate_synthetic


@pytest.fixture
def archive_server():
    """Tiny HTTP server handing out registered byte blobs."""
    blobs = {}

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def do_GET(self):
            data = blobs.get(self.path)
            if data is None:
                self.send_error(404)
                return
            self.send_response(200)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]

    class Handle:
        base = f"http://{host}:{port}"

        @staticmethod
        def publish(path: str, data: bytes) -> str:
            blobs[path] = data
            return f"{Handle.base}{path}"

    yield Handle
    server.shutdown()
    server.server_close()


def make_archive(count=10, seed=1):
    sensors = generate_synthetic(count, NAMED_REGIONS["europe"], seed=seed)
    descriptors = marshal_batch(sensors, "temperature")
    data, digest = compress(descriptors)
    return data, digest, len(descriptors)


def manifest_for(uri, digest, count, job_id="job-a"):
    return {
        "job_id": job_id,
        "device": "http://localhost:0",
        "archive_uri": uri,
        "archive_digest": digest,
        "descriptor_count": count,
    }


class TestReceiveManifest:
    def test_successful_deploy(self, tmp_path, archive_server):
        data, digest, count = make_archive()
        uri = archive_server.publish("/a.tar.gz", data)
        agent = DeviceAgent(deploy_dir=tmp_path)
        ack = agent.receive_manifest(manifest_for(uri, digest, count))
        assert ack.ok and ack.files == count
        assert ack.elapsed_ms > 0
        job_dir = tmp_path / "job-a"
        assert len(list(job_dir.glob("*.xml"))) == count
        assert agent.state.deployed_jobs == {"job-a": count}

    def test_digest_mismatch_leaves_nothing(self, tmp_path, archive_server):
        data, digest, count = make_archive()
        uri = archive_server.publish("/a.tar.gz", data)
        bad_digest = "0" * 64
        agent = DeviceAgent(deploy_dir=tmp_path)
        ack = agent.receive_manifest(manifest_for(uri, bad_digest, count))
        assert not ack.ok and ack.reason == "digest-mismatch"
        assert not (tmp_path / "job-a").exists()
        assert list(tmp_path.iterdir()) == []  # no staging leftovers either

    def test_flipped_byte_detected(self, tmp_path, archive_server):
        data, digest, count = make_archive()
        tampered = bytearray(data)
        tampered[len(tampered) // 2] ^= 0xFF
        uri = archive_server.publish("/t.tar.gz", bytes(tampered))
        agent = DeviceAgent(deploy_dir=tmp_path)
        ack = agent.receive_manifest(manifest_for(uri, digest, count))
        assert ack.reason == "digest-mismatch"

    def test_download_failure(self, tmp_path):
        agent = DeviceAgent(deploy_dir=tmp_path, download_timeout=2.0)
        ack = agent.receive_manifest(
            manifest_for("http://127.0.0.1:9/ghost.tar.gz", "0" * 64, 1)
        )
        assert not ack.ok and ack.reason == "download-failed"
        assert not (tmp_path / "job-a").exists()

    def test_count_mismatch(self, tmp_path, archive_server):
        data, digest, count = make_archive(count=5)
        uri = archive_server.publish("/c.tar.gz", data)
        agent = DeviceAgent(deploy_dir=tmp_path)
        ack = agent.receive_manifest(manifest_for(uri, digest, count + 1))
        assert ack.reason == "count-mismatch"
        assert not (tmp_path / "job-a").exists()

    def test_invalid_xml_member(self, tmp_path, archive_server):
        buffer = io.BytesIO()
        gz = gzip.GzipFile(fileobj=buffer, mode="wb", mtime=0)
        with tarfile.open(fileobj=gz, mode="w|") as tar:
            payload = b"<virtual-sensor>unclosed"
            info = tarfile.TarInfo(name="bad.xml")
            info.size = len(payload)
            tar.addfile(info, io.BytesIO(payload))
        gz.close()
        data = buffer.getvalue()
        digest = hashlib.sha256(data).hexdigest()
        uri = archive_server.publish("/bad.tar.gz", data)
        agent = DeviceAgent(deploy_dir=tmp_path)
        ack = agent.receive_manifest(manifest_for(uri, digest, 1))
        assert ack.reason == "xml-invalid"
        assert not (tmp_path / "job-a").exists()

    def test_not_a_gzip_archive(self, tmp_path, archive_server):
        data = b"definitely not gzip"
        digest = hashlib.sha256(data).hexdigest()
        uri = archive_server.publish("/n.tar.gz", data)
        agent = DeviceAgent(deploy_dir=tmp_path)
        ack = agent.receive_manifest(manifest_for(uri, digest, 1))
        assert ack.reason == "extraction-failed"

    def test_redelivery_is_idempotent(self, tmp_path, archive_server):
        data, digest, count = make_archive()
        uri = archive_server.publish("/a.tar.gz", data)
        agent = DeviceAgent(deploy_dir=tmp_path)
        first = agent.receive_manifest(manifest_for(uri, digest, count))
        listing_before = sorted(p.name for p in (tmp_path / "job-a").iterdir())
        second = agent.receive_manifest(manifest_for(uri, digest, count))
        listing_after = sorted(p.name for p in (tmp_path / "job-a").iterdir())
        assert first.ok and second.ok
        assert listing_before == listing_after
        assert agent.state.deployed_jobs == {"job-a": count}


class TestAgentHttp:
    def test_deploy_and_health_over_http(self, tmp_path, archive_server):
        data, digest, count = make_archive()
        uri = archive_server.publish("/a.tar.gz", data)
        agent = DeviceAgent(deploy_dir=tmp_path).start()
        try:
            request = urllib.request.Request(
                agent.endpoint + "/deploy",
                data=json.dumps(manifest_for(uri, digest, count)).encode(),
                headers={"Content-Type": "application/json"},
                method="POST",
            )
            with urllib.request.urlopen(request, timeout=30) as response:
                ack = json.loads(response.read())
            assert ack["status"] == "ok"
            assert ack["files"] == count

            with urllib.request.urlopen(agent.endpoint + "/health", timeout=10) as response:
                health = json.loads(response.read())
            assert health["deployed_jobs"] == {"job-a": count}
            assert health["busy"] is False
        finally:
            agent.stop()

    def test_malformed_manifest_is_400(self, tmp_path):
        agent = DeviceAgent(deploy_dir=tmp_path).start()
        try:
            request = urllib.request.Request(
                agent.endpoint + "/deploy",
                data=b'{"job_id": "x"}',
                headers={"Content-Type": "application/json"},
                method="POST",
            )
            with pytest.raises(urllib.error.HTTPError) as info:
                urllib.request.urlopen(request, timeout=10)
            assert info.value.code == 400
        finally:
            agent.stop()

    def test_unknown_paths_404(self, tmp_path):
        agent = DeviceAgent(deploy_dir=tmp_path).start()
        try:
            with pytest.raises(urllib.error.HTTPError) as info:
                urllib.request.urlopen(agent.endpoint + "/nope", timeout=10)
            assert info.value.code == 404
        finally:
            agent.stop()


class TestFleet:
    def test_sixteen_agents_distinct(self, tmp_path):
        fleet = spawn_fleet(16, root_dir=tmp_path)
        try:
            assert len(fleet.endpoints) == 16
            assert len(set(fleet.endpoints)) == 16
            dirs = sorted(p.name for p in tmp_path.iterdir())
            assert dirs == sorted(f"device-{i}" for i in range(16))
        finally:
            fleet.close()

    def test_count_must_be_positive(self):
        with pytest.raises(ValueError):
            spawn_fleet(0)

    def test_port_in_use(self, tmp_path):
        first = spawn_fleet(1, base_port=0, root_dir=tmp_path / "a")
        try:
            taken = int(first.endpoints[0].rsplit(":", 1)[1])
            with pytest.raises(PortInUseError):
                spawn_fleet(1, base_port=taken, root_dir=tmp_path / "b")
        finally:
            first.close()

    def test_process_fleet_deploys(self, tmp_path, archive_server):
        data, digest, count = make_archive()
        uri = archive_server.publish("/a.tar.gz", data)
        fleet = spawn_fleet(2, root_dir=tmp_path, mode="process")
        try:
            for endpoint in fleet.endpoints:
                request = urllib.request.Request(
                    endpoint + "/deploy",
                    data=json.dumps(manifest_for(uri, digest, count)).encode(),
                    headers={"Content-Type": "application/json"},
                    method="POST",
                )
                with urllib.request.urlopen(request, timeout=60) as response:
                    ack = json.loads(response.read())
                assert ack["status"] == "ok"
            for i in range(2):
                files = list((tmp_path / f"device-{i}" / "job-a").glob("*.xml"))
                assert len(files) == count
        finally:
            fleet.close()

    def test_process_fleet_port_in_use(self, tmp_path):
        first = spawn_fleet(1, root_dir=tmp_path / "a")
        try:
            taken = int(first.endpoints[0].rsplit(":", 1)[1])
            with pytest.raises(PortInUseError):
                spawn_fleet(1, base_port=taken, root_dir=tmp_path / "b", mode="process")
        finally:
            first.close()


class TestAck:
    def test_to_dict_round_trip(self):
        ack = Ack(status="failed", reason="digest-mismatch", elapsed_ms=12.5)
        assert ack.to_dict() == {
            "status": "failed",
            "files": 0,
            "elapsed_ms": 12.5,
            "reason": "digest-mismatch",
        }
        assert not ack.ok
