"""Regenerate the shipped region fixture files.

Each fixture is newline-delimited JSON in the station-feed shape, one
record per line, with coordinates inside the region's bounding box. Counts
match the documented availability of the two built-in regions (5184 for
Europe, 2862 for North America). Deterministic: rerunning this script
reproduces the files byte for byte.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from sensedeploy.repository import NAMED_REGIONS  # noqa: E402

FIXTURE_COUNTS = {"europe": 5184, "north-america": 2862}
FIXTURE_COUNTRIES = {
    "europe": ["DE", "FR", "ES", "IT", "FI", "EE", "NO", "SE", "PL", "GB", "AL", "SJ"],
    "north-america": ["US", "CA", "MX", "BM"],
}
SEED = 20150207
EPOCH = 1_423_267_200  # 2015-02-07T00:00:00Z
ID_BASE = {"europe": 600_000, "north-america": 4_000_000}


def station_record(rng, slug: str, index: int) -> dict:
    region = NAMED_REGIONS[slug]
    lat = round(rng.uniform(region.final.latitude, region.initial.latitude), 6)
    lon = round(rng.uniform(region.initial.longitude, region.final.longitude), 6)
    countries = FIXTURE_COUNTRIES[slug]
    temp = round(rng.uniform(233.0, 294.0), 2)
    return {
        "coord": {"lon": lon, "lat": lat},
        "sys": {"country": countries[int(rng.integers(0, len(countries)))]},
        "weather": [{"id": 800, "main": "clear", "description": "clear_sky", "icon": "01d"}],
        "base": "stations",
        "main": {
            "temp": temp,
            "humidity": round(rng.uniform(10.0, 100.0), 0),
            "pressure": round(rng.uniform(940.0, 1045.0), 1),
            "temp_min": round(temp - rng.uniform(0.0, 3.0), 2),
            "temp_max": round(temp + rng.uniform(0.0, 3.0), 2),
        },
        "wind": {"speed": round(rng.uniform(0.0, 20.0), 2), "deg": round(rng.uniform(0, 360), 1)},
        "clouds": {"all": int(rng.integers(0, 101))},
        "dt": int(EPOCH + rng.integers(0, 72 * 3600)),
        "id": ID_BASE[slug] + index,
        "name": f"{slug.replace('-', '')}{index:04d}",
        "cod": 200,
    }


def main() -> None:
    out_dir = Path(__file__).resolve().parents[1] / "src" / "sensedeploy" / "fixtures"
    out_dir.mkdir(parents=True, exist_ok=True)
    for slug, count in FIXTURE_COUNTS.items():
        rng = np.random.default_rng([SEED, len(slug)])
        lines = [
            json.dumps(station_record(rng, slug, i), separators=(",", ":"))
            for i in range(count)
        ]
        path = out_dir / f"{slug}.owm.ndjson"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"{path}: {count} records")


if __name__ == "__main__":
    main()
