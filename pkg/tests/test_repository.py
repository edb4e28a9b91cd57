import json

import pytest

from sensedeploy.model import CONTEXT_RANGES, GeoPoint, Region, encode_sensors, region_contains
from sensedeploy.repository import (
    JSON_MEDIA_TYPE,
    NAMED_REGIONS,
    NDJSON_MEDIA_TYPE,
    FixtureRepository,
    NoFixtureForRegionError,
    RawBatch,
    RepositoryQuery,
    SyntheticRepository,
    UnparseablePayloadError,
    generate_synthetic,
    get_adapter,
    unmarshal,
)

# The station-feed record shape every adapter must understand.
STATION_RECORD = {
    "coord": {"lon": 139, "lat": 35},
    "sys": {"country": "JP", "sunrise": 1369769524, "sunset": 1369821049},
    "weather": [
        {"id": 804, "main": "clouds", "description": "overcast_clouds", "icon": "04n"}
    ],
    "main": {
        "temp": 289.5,
        "humidity": 89,
        "pressure": 1013,
        "temp_min": 287.04,
        "temp_max": 292.04,
    },
    "wind": {"speed": 7.31, "deg": 187.002},
    "rain": {"3h": 0},
    "clouds": {"all": 92},
    "dt": 1369824698,
    "id": 1851632,
    "name": "Shuzenji",
    "cod": 200,
}


def batch_of(payload, media_type=JSON_MEDIA_TYPE):
    if isinstance(payload, (dict, list)):
        payload = json.dumps(payload).encode()
    return RawBatch(payload=payload, media_type=media_type, fetched_at=1_000_000.0)


class TestUnmarshal:
    def test_station_record_fields(self):
        result = unmarshal(batch_of(STATION_RECORD))
        assert result.skipped == 0
        (s,) = result.sensors
        assert s.id == 1851632
        assert s.name == "Shuzenji"
        assert s.location == GeoPoint(35.0, 139.0)
        assert s.measurements.temperature == 289.5
        assert s.measurements.humidity == 89.0
        assert s.measurements.pressure == 1013.0
        assert s.measurements.country == "JP"
        assert s.source_url.endswith("weather?id=1851632")
        assert s.observed_at == 1369824698.0

    def test_context_synthesized_deterministically(self):
        a = unmarshal(batch_of(STATION_RECORD)).sensors[0]
        b = unmarshal(batch_of(STATION_RECORD)).sensors[0]
        assert a.context == b.context
        for name, (lo, hi) in CONTEXT_RANGES.items():
            assert lo <= getattr(a.context, name) <= hi

    def test_empty_array(self):
        result = unmarshal(batch_of([]))
        assert result.sensors == [] and result.skipped == 0

    def test_array_of_three(self):
        records = []
        for i in (1, 2, 3):
            record = json.loads(json.dumps(STATION_RECORD))
            record["id"] = i
            records.append(record)
        result = unmarshal(batch_of(records))
        assert {s.id for s in result.sensors} == {1, 2, 3}

    def test_bad_records_skipped_and_counted(self):
        good = STATION_RECORD
        bad = json.loads(json.dumps(STATION_RECORD))
        bad["main"]["humidity"] = 400  # out of range
        result = unmarshal(batch_of([good, bad, good]))
        assert len(result.sensors) == 2
        assert result.skipped == 1
        assert result.records_in == 3

    def test_totally_unparseable_payload(self):
        with pytest.raises(UnparseablePayloadError):
            unmarshal(batch_of(b"this is not json"))

    def test_all_records_invalid(self):
        with pytest.raises(UnparseablePayloadError):
            unmarshal(batch_of([{"nope": 1}, {"also": 2}]))

    def test_ndjson_lines(self):
        lines = "\n".join(json.dumps(STATION_RECORD) for _ in range(4))
        result = unmarshal(batch_of(lines.encode(), NDJSON_MEDIA_TYPE))
        assert len(result.sensors) == 4

    def test_canonical_records_decoded(self):
        sensors = generate_synthetic(3, NAMED_REGIONS["europe"], seed=1)
        result = unmarshal(batch_of(encode_sensors(sensors), NDJSON_MEDIA_TYPE))
        assert result.sensors == sensors

    def test_rawbatch_rejects_empty_payload(self):
        with pytest.raises(ValueError):
            RawBatch(payload=b"", media_type=JSON_MEDIA_TYPE, fetched_at=0.0)


class TestGenerateSynthetic:
    def test_deterministic(self):
        region = NAMED_REGIONS["north-america"]
        a = generate_synthetic(500, region, seed=42)
        b = generate_synthetic(500, region, seed=42)
        assert a == b
        assert encode_sensors(a) == encode_sensors(b)

    def test_single_sensor_inside_region(self):
        region = NAMED_REGIONS["europe"]
        (s,) = generate_synthetic(1, region, seed=9)
        assert region_contains(region, s.location)

    def test_context_fields_within_documented_ranges(self):
        region = NAMED_REGIONS["europe"]
        sensors = generate_synthetic(20_000, region, seed=7)
        assert len(sensors) == 20_000
        for s in sensors:
            assert region_contains(region, s.location)
            for name, (lo, hi) in CONTEXT_RANGES.items():
                value = getattr(s.context, name)
                assert lo <= value <= hi, f"{name}={value}"

    def test_seed_changes_output(self):
        region = NAMED_REGIONS["europe"]
        assert generate_synthetic(10, region, 1) != generate_synthetic(10, region, 2)

    def test_count_must_be_positive(self):
        with pytest.raises(ValueError):
            generate_synthetic(0, NAMED_REGIONS["europe"], 1)

    def test_ids_unique_within_batch(self):
        sensors = generate_synthetic(1000, NAMED_REGIONS["europe"], seed=3)
        assert len({s.id for s in sensors}) == 1000


class TestFixtureRepository:
    def test_europe_fixture_has_5184_records(self):
        repo = FixtureRepository()
        batch = repo.send(RepositoryQuery(region=NAMED_REGIONS["europe"]))
        lines = [l for l in batch.payload.decode().splitlines() if l.strip()]
        assert len(lines) == 5184

    def test_north_america_fixture_has_2862_records(self):
        repo = FixtureRepository()
        batch = repo.send(RepositoryQuery(region=NAMED_REGIONS["north-america"]))
        lines = [l for l in batch.payload.decode().splitlines() if l.strip()]
        assert len(lines) == 2862

    def test_referential_transparency(self):
        repo = FixtureRepository()
        query = RepositoryQuery(region=NAMED_REGIONS["europe"])
        assert repo.send(query).payload == repo.send(query).payload

    def test_region_without_fixture_rejected(self):
        repo = FixtureRepository()
        southern = Region(GeoPoint(-10.0, 100.0), GeoPoint(-40.0, 160.0))
        with pytest.raises(NoFixtureForRegionError):
            repo.send(RepositoryQuery(region=southern))

    def test_sub_region_post_filtering(self):
        repo = FixtureRepository()
        sub = Region(GeoPoint(60.0, -10.0), GeoPoint(50.0, 10.0))
        batch = repo.send(RepositoryQuery(region=sub))
        result = unmarshal(batch)
        assert result.sensors, "sub-region of Europe should have sensors"
        for s in result.sensors:
            assert region_contains(sub, s.location)

    def test_limit_truncates(self):
        repo = FixtureRepository()
        batch = repo.send(RepositoryQuery(region=NAMED_REGIONS["europe"], limit=10))
        assert len(batch.payload.decode().splitlines()) == 10

    def test_unmarshal_full_fixture(self):
        repo = FixtureRepository()
        result = unmarshal(repo.send(RepositoryQuery(region=NAMED_REGIONS["europe"])))
        assert len(result.sensors) == 5184
        assert result.skipped == 0


class TestSyntheticRepository:
    def test_limit_required(self):
        repo = SyntheticRepository(seed=0)
        with pytest.raises(ValueError):
            repo.send(RepositoryQuery(region=NAMED_REGIONS["europe"]))

    def test_limit_produces_exact_count(self):
        repo = SyntheticRepository(seed=0)
        batch = repo.send(RepositoryQuery(region=NAMED_REGIONS["europe"], limit=1000))
        result = unmarshal(batch)
        assert len(result.sensors) == 1000
        assert result.skipped == 0

    def test_get_adapter_factory(self):
        assert isinstance(get_adapter("fixture"), FixtureRepository)
        assert isinstance(get_adapter("synthetic", seed=1), SyntheticRepository)
        with pytest.raises(ValueError):
            get_adapter("carrier-pigeon")


class TestRepositoryQuery:
    def test_limit_must_be_positive(self):
        with pytest.raises(ValueError):
            RepositoryQuery(region=NAMED_REGIONS["europe"], limit=0)
