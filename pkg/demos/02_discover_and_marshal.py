"""Discover sensors in a region fixture and marshal the best into XML.

Covers the front half of the pipeline: region query, unmarshal into
generic sensors, ranking, and virtual-sensor descriptor generation.
"""

from sensedeploy.descriptor import marshal
from sensedeploy.repository import (
    NAMED_REGIONS,
    FixtureRepository,
    RepositoryQuery,
    unmarshal,
)
from sensedeploy.selector import DEFAULT_CRITERIA, select_top

repo = FixtureRepository()
europe = NAMED_REGIONS["europe"]

batch = repo.send(RepositoryQuery(region=europe))
print(f"raw batch: {len(batch.payload)} bytes, media type {batch.media_type}")

result = unmarshal(batch)
print(f"unmarshaled {len(result.sensors)} sensors ({result.skipped} skipped)")

best = select_top(result.sensors, DEFAULT_CRITERIA, k=3)
print("\ntop three sensors by context trade-off:")
for sensor in best:
    c = sensor.context
    print(
        f"  {sensor.name} (id {sensor.id}) at ({sensor.location.latitude:.2f}, "
        f"{sensor.location.longitude:.2f}): battery {c.battery:.0f}%, "
        f"price {c.price:.1f}, response {c.response_time:.0f} ms"
    )

descriptor = marshal(best[0], "temperature", history_hours=168)
print(f"\ndescriptor {descriptor.file_name} ({len(descriptor.content)} bytes):\n")
print(descriptor.content.decode())
