"""Run a full deployment: fetch, rank, marshal, archive, push to agents.

Stands up three local device agents, deploys 130 fixture sensors across
them, and prints the per-phase timings and acknowledgements.
"""

import shutil
import tempfile

from sensedeploy.agent import spawn_fleet
from sensedeploy.orchestrator import Orchestrator
from sensedeploy.repository import NAMED_REGIONS

fleet = spawn_fleet(3)
work_dir = tempfile.mkdtemp(prefix="demo-deploy-")
orchestrator = Orchestrator(work_dir=work_dir)
try:
    print("agents:", ", ".join(fleet.endpoints))

    job = orchestrator.create_job(
        region=NAMED_REGIONS["europe"],
        count=130,
        targets=fleet.endpoints,
        selector="topsis",
        source="fixture",
        measurement_type="humidity",
        start=False,
    )
    orchestrator.run_pipeline(job)

    print(f"\njob {job.id}: {job.state.value}")
    print(f"available sensors: {job.available}, deployed: {job.descriptor_count}")
    timings = job.timings
    print(f"  unmarshal {timings.unmarshal_ms:8.1f} ms")
    print(f"  select    {timings.select_ms:8.1f} ms")
    print(f"  marshal   {timings.marshal_ms:8.1f} ms")
    print(f"  deploy    {timings.deploy_ms:8.1f} ms")
    print(f"  setup     {timings.setup_ms:8.1f} ms (sum of the four)")

    print("\nper-device manifests and acks:")
    for manifest in job.manifests:
        ack = job.acks[manifest.device]
        print(
            f"  {manifest.device}: {manifest.descriptor_count} descriptors, "
            f"digest {manifest.archive_digest[:12]}…, ack {ack}"
        )

    agent = fleet.agents[0]
    print(f"\nfirst agent state: {agent.state.to_dict()}")
finally:
    fleet.close(remove_dirs=True)
    orchestrator.close()
    shutil.rmtree(work_dir, ignore_errors=True)
