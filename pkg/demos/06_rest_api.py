"""Drive a deployment through the REST API, the way the console does.

Starts the API server and a two-agent fleet in-process, previews a region,
submits a job over HTTP, polls its status to completion, and re-downloads
the published archive to check its digest.
"""

import hashlib
import json
import shutil
import tempfile
import threading
import time
import urllib.request

import uvicorn

from sensedeploy.agent import spawn_fleet
from sensedeploy.api import create_app
from sensedeploy.orchestrator import Orchestrator

PORT = 8765
BASE = f"http://127.0.0.1:{PORT}"


def get(path):
    with urllib.request.urlopen(f"{BASE}{path}", timeout=30) as response:
        return json.loads(response.read())


def post(path, body):
    request = urllib.request.Request(
        f"{BASE}{path}",
        data=json.dumps(body).encode(),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    with urllib.request.urlopen(request, timeout=30) as response:
        return json.loads(response.read())


fleet = spawn_fleet(2)
work_dir = tempfile.mkdtemp(prefix="demo-api-")
orchestrator = Orchestrator(work_dir=work_dir)
server = uvicorn.Server(
    uvicorn.Config(create_app(orchestrator), host="127.0.0.1", port=PORT, log_level="warning")
)
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.05)

try:
    preview = get("/regions/sensors?min_lon=-30&max_lon=30&min_lat=40&max_lat=80&limit=2")
    print(f"Europe preview: {preview['count']} sensors available")

    created = post("/jobs", {
        "region": {"min_lon": -30, "max_lon": 30, "min_lat": 40, "max_lat": 80},
        "count": 130,
        "targets": fleet.endpoints,
        "selector": "topsis",
        "source": "fixture",
    })
    job_id = created["id"]
    print(f"created job {job_id}")

    while True:
        view = get(f"/jobs/{job_id}")
        print(f"  state={view['state']}")
        if view["state"] in ("complete", "failed"):
            break
        time.sleep(0.2)

    print(f"timings: { {k: round(v, 1) for k, v in view['timings'].items()} }")
    print(f"acks: {view['acks']}")

    manifest = view["manifests"][0]
    with urllib.request.urlopen(f"{BASE}/artifacts/{job_id}/0.tar.gz", timeout=30) as response:
        archive = response.read()
    digest = hashlib.sha256(archive).hexdigest()
    print(f"re-downloaded archive: {len(archive)} bytes, digest match: "
          f"{digest == manifest['archive_digest']}")
finally:
    server.should_exit = True
    fleet.close(remove_dirs=True)
    orchestrator.close()
    shutil.rmtree(work_dir, ignore_errors=True)
