"""Repository-neutral sensor domain types shared by every other module.

All types here are immutable value objects and may be shared freely across
threads. The canonical interchange encoding for a sensor is the JSON object
produced by :func:`sensor_to_dict` (used by the orchestrator API, the
synthetic repository and test fixtures).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable


def _require_finite(value: float, name: str) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True, slots=True)
class GeoPoint:
    """A WGS84 coordinate pair in decimal degrees."""

    latitude: float
    longitude: float

    def __post_init__(self) -> None:
        # The closed-range comparisons reject NaN and infinities too.
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude out of range [-90, 90]: {self.latitude}")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude out of range [-180, 180]: {self.longitude}")


@dataclass(frozen=True, slots=True)
class Region:
    """A closed latitude/longitude bounding box.

    ``initial`` is the north-west corner, ``final`` the south-east corner.
    Regions never wrap the antimeridian; a caller wanting a wrapping search
    issues two region queries.
    """

    initial: GeoPoint
    final: GeoPoint

    def __post_init__(self) -> None:
        if self.initial.latitude < self.final.latitude:
            raise ValueError(
                "initial (north-west) latitude must be >= final (south-east) "
                f"latitude: {self.initial.latitude} < {self.final.latitude}"
            )
        if self.initial.longitude > self.final.longitude:
            raise ValueError(
                "initial (north-west) longitude must be <= final (south-east) "
                f"longitude: {self.initial.longitude} > {self.final.longitude}"
            )

    def contains(self, p: GeoPoint) -> bool:
        """True iff ``p`` lies inside the closed bounding box."""
        return (
            self.final.latitude <= p.latitude <= self.initial.latitude
            and self.initial.longitude <= p.longitude <= self.final.longitude
        )

    def intersects(self, other: "Region") -> bool:
        """True iff the two closed boxes share at least one point."""
        return not (
            other.initial.latitude < self.final.latitude
            or self.initial.latitude < other.final.latitude
            or other.final.longitude < self.initial.longitude
            or self.final.longitude < other.initial.longitude
        )


def region_contains(region: Region, p: GeoPoint) -> bool:
    """Closed-box containment test (total function over valid inputs)."""
    return region.contains(p)


#: Conventional ranges for the six context properties. The upstream data
#: sources never publish units for these, so the platform fixes one
#: convention and the synthetic generator draws uniformly from it.
CONTEXT_RANGES: dict[str, tuple[float, float]] = {
    "battery": (0.0, 100.0),          # percent
    "price": (0.0, 100.0),            # currency units
    "drift": (0.0, 1.0),              # unit fraction
    "frequency": (0.1, 10.0),         # hertz, strictly positive
    "energy_consumption": (0.0, 1000.0),  # milliwatts
    "response_time": (1.0, 1000.0),   # milliseconds
}

CONTEXT_FIELDS = tuple(CONTEXT_RANGES)


@dataclass(frozen=True, slots=True)
class ContextVector:
    """The six context properties every candidate sensor is ranked on."""

    battery: float
    price: float
    drift: float
    frequency: float
    energy_consumption: float
    response_time: float

    def __post_init__(self) -> None:
        # Two-sided checks reject NaN on their own; the one-sided fields
        # need the explicit finiteness test. Batches run six figures deep,
        # so the happy path is one combined comparison chain.
        if not (
            0.0 <= self.battery <= 100.0
            and self.price >= 0.0
            and self.drift >= 0.0
            and self.frequency > 0.0
            and self.energy_consumption >= 0.0
            and self.response_time >= 0.0
            and math.isfinite(self.price)
            and math.isfinite(self.drift)
            and math.isfinite(self.frequency)
            and math.isfinite(self.energy_consumption)
            and math.isfinite(self.response_time)
        ):
            for name in CONTEXT_FIELDS:
                _require_finite(getattr(self, name), name)
            raise ValueError(
                f"context out of range: battery={self.battery} price={self.price} "
                f"drift={self.drift} frequency={self.frequency} "
                f"energy_consumption={self.energy_consumption} "
                f"response_time={self.response_time}"
            )


@dataclass(frozen=True, slots=True)
class Measurements:
    """Weather measurements attached to a sensor record.

    ``temperature`` is kelvin end-to-end; converting to other scales is a
    display concern. ``sea_level`` is optional because most station feeds
    omit it.
    """

    city: str
    country: str
    base: str
    temperature: float
    pressure: float
    humidity: float
    sea_level: float | None = None

    def __post_init__(self) -> None:
        if not (
            self.temperature > 0.0
            and math.isfinite(self.temperature)
            and self.pressure > 0.0
            and math.isfinite(self.pressure)
            and 0.0 <= self.humidity <= 100.0
        ):
            raise ValueError(
                f"measurements out of range: temperature={self.temperature} K "
                f"pressure={self.pressure} humidity={self.humidity}"
            )
        if self.sea_level is not None and not (
            self.sea_level > 0.0 and math.isfinite(self.sea_level)
        ):
            raise ValueError(f"sea_level must be > 0 when present: {self.sea_level}")


@dataclass(frozen=True, slots=True)
class GenericSensor:
    """A repository-neutral sensor record.

    ``source_url`` is the repository query that refreshes this sensor; the
    target descriptor embeds it, so it must be non-empty. ``observed_at``
    is unix epoch seconds and lets the case study and the bench harness
    window readings in time.
    """

    id: int
    name: str
    location: GeoPoint
    measurements: Measurements
    context: ContextVector
    source_url: str
    observed_at: float

    def __post_init__(self) -> None:
        if not self.source_url:
            raise ValueError("source_url must be non-empty")


def sensor_to_dict(sensor: GenericSensor) -> dict[str, Any]:
    """Canonical JSON-safe encoding of a sensor."""
    m = sensor.measurements
    c = sensor.context
    return {
        "id": sensor.id,
        "name": sensor.name,
        "location": {
            "latitude": sensor.location.latitude,
            "longitude": sensor.location.longitude,
        },
        "measurements": {
            "city": m.city,
            "country": m.country,
            "base": m.base,
            "temperature": m.temperature,
            "sea_level": m.sea_level,
            "pressure": m.pressure,
            "humidity": m.humidity,
        },
        "context": {
            "battery": c.battery,
            "price": c.price,
            "drift": c.drift,
            "frequency": c.frequency,
            "energy_consumption": c.energy_consumption,
            "response_time": c.response_time,
        },
        "source_url": sensor.source_url,
        "observed_at": sensor.observed_at,
    }


def sensor_from_dict(data: dict[str, Any]) -> GenericSensor:
    """Decode the canonical encoding, validating every field.

    Positional construction, field order as declared; this path decodes
    six-figure batches so it avoids keyword overhead.
    """
    loc = data["location"]
    m = data["measurements"]
    c = data["context"]
    sea_level = m.get("sea_level")
    return GenericSensor(
        int(data["id"]),
        str(data["name"]),
        GeoPoint(float(loc["latitude"]), float(loc["longitude"])),
        Measurements(
            str(m["city"]),
            str(m["country"]),
            str(m["base"]),
            float(m["temperature"]),
            float(m["pressure"]),
            float(m["humidity"]),
            None if sea_level is None else float(sea_level),
        ),
        ContextVector(
            float(c["battery"]),
            float(c["price"]),
            float(c["drift"]),
            float(c["frequency"]),
            float(c["energy_consumption"]),
            float(c["response_time"]),
        ),
        str(data["source_url"]),
        float(data["observed_at"]),
    )


def encode_sensors(sensors: Iterable[GenericSensor]) -> bytes:
    """Newline-delimited canonical JSON, one sensor per line."""
    lines = [json.dumps(sensor_to_dict(s), separators=(",", ":")) for s in sensors]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def decode_sensors(payload: bytes) -> list[GenericSensor]:
    """Inverse of :func:`encode_sensors`."""
    out = []
    for line in payload.decode("utf-8").splitlines():
        line = line.strip()
        if line:
            out.append(sensor_from_dict(json.loads(line)))
    return out
