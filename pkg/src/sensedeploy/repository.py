"""Cloud repository adapters: fetch raw sensor metadata and unmarshal it.

Three adapters share one interface (``send(query) -> RawBatch``):

* ``FixtureRepository`` replays shipped files of newline-delimited weather
  records (one JSON object per line, in the station-feed shape) and is the
  default for tests and demos — deterministic, no network.
* ``SyntheticRepository`` fabricates sensors with seeded uniform draws; the
  same (seed, count, region) always yields byte-identical payloads.
* ``LiveRepository`` talks to a real OpenWeatherMap-style endpoint. It is
  optional, disabled unless configured, and nothing in the test suite
  depends on it.
"""

from __future__ import annotations

import json
import logging
import random
import struct
import time
import urllib.request
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .model import (
    CONTEXT_RANGES,
    ContextVector,
    GenericSensor,
    GeoPoint,
    Measurements,
    Region,
    encode_sensors,
    region_contains,
    sensor_from_dict,
)

logger = logging.getLogger(__name__)

#: Query-by-id URL template of the upstream weather API; descriptors embed
#: the expanded form so the target middleware can refresh the sensor.
QUERY_BY_ID_URL = "http://api.openweathermap.org/data/2.5/weather?id={id}"
QUERY_BY_COORD_URL = "http://api.openweathermap.org/data/2.5/weather?lat={lat}&lon={lon}"

#: Bounding boxes of the two built-in search regions (NW corner, SE corner).
NAMED_REGIONS: dict[str, Region] = {
    "europe": Region(GeoPoint(80.0, -30.0), GeoPoint(40.0, 30.0)),
    "north-america": Region(GeoPoint(70.0, -170.0), GeoPoint(30.0, -60.0)),
}

NDJSON_MEDIA_TYPE = "application/x-ndjson"
JSON_MEDIA_TYPE = "application/json"

_CONTEXT_SALT = 0x5EED_C0DE


class NoFixtureForRegionError(LookupError):
    """No shipped fixture covers the queried region."""


class UnparseablePayloadError(ValueError):
    """Zero records could be decoded from a payload."""


class RepositoryUnreachableError(ConnectionError):
    """The live repository endpoint could not be reached."""


class MalformedMediaTypeError(ValueError):
    """A live response arrived with a media type no decoder understands."""


@dataclass(frozen=True, slots=True)
class RepositoryQuery:
    """A region-scoped sensor metadata request."""

    region: Region
    limit: int | None = None
    source: str = "fixture"

    def __post_init__(self) -> None:
        if self.limit is not None and self.limit < 1:
            raise ValueError(f"limit must be >= 1 when present: {self.limit}")


@dataclass(frozen=True, slots=True)
class RawBatch:
    """An undecoded repository response."""

    payload: bytes
    media_type: str
    fetched_at: float

    def __post_init__(self) -> None:
        if not self.payload:
            raise ValueError("payload must be non-empty")


@dataclass(frozen=True, slots=True)
class UnmarshalResult:
    """Decoded sensors plus the count of records that failed validation."""

    sensors: list[GenericSensor]
    skipped: int

    @property
    def records_in(self) -> int:
        return len(self.sensors) + self.skipped


def _context_for_station(sensor_id: int) -> ContextVector:
    """Deterministic context properties for a station that publishes none.

    Station feeds carry no battery/price/drift metadata, so the adapter
    synthesizes the six properties from the station id under a fixed salt;
    the same station always gets the same context.
    """
    rng = random.Random((_CONTEXT_SALT << 64) | (sensor_id & (2**64 - 1)))
    values = {
        name: rng.uniform(lo, hi) for name, (lo, hi) in CONTEXT_RANGES.items()
    }
    return ContextVector(**values)


def _sensor_from_station_record(record: dict[str, Any], fetched_at: float) -> GenericSensor:
    coord = record["coord"]
    main = record["main"]
    sensor_id = int(record["id"])
    sea_level = main.get("sea_level")
    return GenericSensor(
        id=sensor_id,
        name=str(record["name"]),
        location=GeoPoint(latitude=float(coord["lat"]), longitude=float(coord["lon"])),
        measurements=Measurements(
            city=str(record["name"]),
            country=str(record.get("sys", {}).get("country", "")),
            base=str(record.get("base", "")),
            temperature=float(main["temp"]),
            pressure=float(main["pressure"]),
            humidity=float(main["humidity"]),
            sea_level=None if sea_level is None else float(sea_level),
        ),
        context=_context_for_station(sensor_id),
        source_url=QUERY_BY_ID_URL.format(id=sensor_id),
        observed_at=float(record.get("dt", fetched_at)),
    )


def _iter_records(batch: RawBatch) -> list[Any]:
    text = batch.payload.decode("utf-8")
    if batch.media_type.startswith(NDJSON_MEDIA_TYPE):
        records = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError:
                records.append(None)  # counts as one skipped record
        return records
    try:
        decoded = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UnparseablePayloadError(f"payload is not valid JSON: {exc}") from exc
    return decoded if isinstance(decoded, list) else [decoded]


def unmarshal(batch: RawBatch) -> UnmarshalResult:
    """Decode a raw batch into generic sensors.

    Accepts station-feed records (single object or array, or one object per
    line) and the canonical sensor encoding emitted by the synthetic
    adapter. Individual records that fail validation are skipped and
    counted rather than aborting the batch; a batch where *nothing* decodes
    raises :class:`UnparseablePayloadError`.
    """
    records = _iter_records(batch)
    sensors: list[GenericSensor] = []
    skipped = 0
    for record in records:
        if not isinstance(record, dict):
            skipped += 1
            continue
        try:
            if "coord" in record:
                sensors.append(_sensor_from_station_record(record, batch.fetched_at))
            elif "location" in record:
                sensors.append(sensor_from_dict(record))
            else:
                raise ValueError("record is neither station-shaped nor canonical")
        except (KeyError, TypeError, ValueError) as exc:
            skipped += 1
            logger.debug("skipping malformed record: %s", exc)
    if records and not sensors and skipped == len(records):
        raise UnparseablePayloadError(f"all {skipped} records failed to decode")
    if skipped:
        logger.warning("unmarshal skipped %d of %d records", skipped, len(records))
    return UnmarshalResult(sensors=sensors, skipped=skipped)


def _stream_seed(seed: int, count: int, region: Region) -> np.random.SeedSequence:
    """Independent, stable RNG stream per (seed, count, region)."""
    coords = (
        region.initial.latitude,
        region.initial.longitude,
        region.final.latitude,
        region.final.longitude,
    )
    packed = struct.unpack("<8I", struct.pack("<4d", *coords))
    return np.random.SeedSequence([seed & 0xFFFFFFFF, count, *packed])


_SYNTH_COUNTRIES = ("US", "CA", "MX", "BR", "DE", "FR", "ES", "IT", "FI", "EE", "JP", "AU")
_SYNTH_EPOCH = 1_423_267_200  # 2015-02-07T00:00:00Z, start of the case-study window


def generate_synthetic(count: int, region: Region, seed: int) -> list[GenericSensor]:
    """Fabricate ``count`` sensors uniformly inside ``region``.

    Coordinates are uniform in the bounding box; each context property is
    drawn uniformly from its documented range. The output is a pure
    function of (count, region, seed).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1: {count}")
    rng = np.random.default_rng(_stream_seed(seed, count, region))
    lats = rng.uniform(region.final.latitude, region.initial.latitude, count).tolist()
    lons = rng.uniform(region.initial.longitude, region.final.longitude, count).tolist()
    ctx = {
        name: rng.uniform(lo, hi, count).tolist()
        for name, (lo, hi) in CONTEXT_RANGES.items()
    }
    temps = rng.uniform(230.0, 310.0, count).tolist()
    pressures = rng.uniform(870.0, 1085.0, count).tolist()
    humidities = rng.uniform(0.0, 100.0, count).tolist()
    countries = rng.integers(0, len(_SYNTH_COUNTRIES), count).tolist()
    observed = (rng.integers(0, 72 * 3600, count) + _SYNTH_EPOCH).tolist()

    sensors = []
    for i in range(count):
        sensor_id = 5_000_000 + i
        name = f"synth-{i:06d}"
        sensors.append(
            GenericSensor(
                id=sensor_id,
                name=name,
                location=GeoPoint(latitude=lats[i], longitude=lons[i]),
                measurements=Measurements(
                    city=name,
                    country=_SYNTH_COUNTRIES[countries[i]],
                    base="synthetic",
                    temperature=temps[i],
                    pressure=pressures[i],
                    humidity=humidities[i],
                ),
                context=ContextVector(
                    battery=ctx["battery"][i],
                    price=ctx["price"][i],
                    drift=ctx["drift"][i],
                    frequency=ctx["frequency"][i],
                    energy_consumption=ctx["energy_consumption"][i],
                    response_time=ctx["response_time"][i],
                ),
                source_url=QUERY_BY_ID_URL.format(id=sensor_id),
                observed_at=float(observed[i]),
            )
        )
    return sensors


def packaged_fixture_dir() -> Path:
    """Directory of the fixture files shipped with the package."""
    return Path(str(resources.files("sensedeploy").joinpath("fixtures")))


class FixtureRepository:
    """Replays shipped ``<region-slug>.owm.ndjson`` fixture files.

    Queries are answered by loading every fixture whose declared region
    intersects the queried one and post-filtering records with the closed
    bounding-box test (the single-station feed format has no bbox
    parameter, so filtering happens adapter-side). Identical queries yield
    identical payload bytes.
    """

    def __init__(
        self,
        fixture_dir: Path | str | None = None,
        regions: dict[str, Region] | None = None,
    ) -> None:
        self.fixture_dir = Path(fixture_dir) if fixture_dir else packaged_fixture_dir()
        self.regions = dict(regions) if regions is not None else dict(NAMED_REGIONS)

    def _fixture_path(self, slug: str) -> Path:
        return self.fixture_dir / f"{slug}.owm.ndjson"

    def send(self, query: RepositoryQuery) -> RawBatch:
        matching = [
            slug
            for slug, region in sorted(self.regions.items())
            if region.intersects(query.region) and self._fixture_path(slug).exists()
        ]
        if not matching:
            raise NoFixtureForRegionError(
                f"no fixture covers region {query.region}; have {sorted(self.regions)}"
            )
        lines: list[str] = []
        for slug in matching:
            for line in self._fixture_path(slug).read_text("utf-8").splitlines():
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                point = GeoPoint(
                    latitude=float(record["coord"]["lat"]),
                    longitude=float(record["coord"]["lon"]),
                )
                if region_contains(query.region, point):
                    lines.append(line)
                    if query.limit is not None and len(lines) >= query.limit:
                        break
            if query.limit is not None and len(lines) >= query.limit:
                break
        if not lines:
            raise NoFixtureForRegionError(
                f"fixtures {matching} contain no sensors inside {query.region}"
            )
        return RawBatch(
            payload=("\n".join(lines) + "\n").encode("utf-8"),
            media_type=NDJSON_MEDIA_TYPE,
            fetched_at=time.time(),
        )


class SyntheticRepository:
    """Fabricates sensor batches on demand (see :func:`generate_synthetic`)."""

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def send(self, query: RepositoryQuery) -> RawBatch:
        if query.limit is None:
            raise ValueError("synthetic queries must set a limit (the generated count)")
        sensors = generate_synthetic(query.limit, query.region, self.seed)
        return RawBatch(
            payload=encode_sensors(sensors),
            media_type=NDJSON_MEDIA_TYPE,
            fetched_at=time.time(),
        )


class LiveRepository:
    """Minimal live adapter for an OpenWeatherMap-compatible endpoint.

    Fetches the single station nearest the region center via the
    coordinate-query URL. Disabled by default: construct it explicitly with
    an API key to opt in. Shipped fixtures cover everything the test suite
    needs, so nothing here runs during tests.
    """

    def __init__(self, api_key: str, base_url: str = "http://api.openweathermap.org") -> None:
        self.api_key = api_key
        self.base_url = base_url.rstrip("/")

    def send(self, query: RepositoryQuery) -> RawBatch:
        center_lat = (query.region.initial.latitude + query.region.final.latitude) / 2.0
        center_lon = (query.region.initial.longitude + query.region.final.longitude) / 2.0
        template = QUERY_BY_COORD_URL.replace(
            "http://api.openweathermap.org", self.base_url, 1
        )
        url = template.format(lat=center_lat, lon=center_lon) + f"&appid={self.api_key}"
        try:
            with urllib.request.urlopen(url, timeout=30.0) as response:
                payload = response.read()
                media_type = response.headers.get_content_type()
        except OSError as exc:
            raise RepositoryUnreachableError(f"cannot reach {self.base_url}: {exc}") from exc
        if media_type not in (JSON_MEDIA_TYPE, "text/json"):
            raise MalformedMediaTypeError(f"unexpected media type {media_type!r}")
        return RawBatch(payload=payload, media_type=JSON_MEDIA_TYPE, fetched_at=time.time())


def get_adapter(source: str, seed: int = 0, fixture_dir: Path | str | None = None):
    """Adapter factory keyed by source name ('fixture' or 'synthetic')."""
    if source == "fixture":
        return FixtureRepository(fixture_dir=fixture_dir)
    if source == "synthetic":
        return SyntheticRepository(seed=seed)
    raise ValueError(f"unknown source {source!r} (live adapters are constructed explicitly)")
