"""Weather-suitability city rankings for rheumatic-condition planning.

Three condition profiles translate the qualitative clinical correlations
(cold worsens everything; damp worsens osteoarthritis and arthritis; high
pressure worsens arthritis and fibromyalgia) into ranking criteria:

* osteoarthritis:  warmer is better, drier is better (pressure ignored)
* arthritis:       warmer, drier and lower pressure are all better
* fibromyalgia:    warmer is better, lower pressure is better (humidity ignored)

``rank_cities`` min-max rescales each criterion column to [0, 1] while
building the decision matrix — kelvin temperatures share a large common
offset that would otherwise mute the column under vector normalization —
and then delegates the actual ranking to :mod:`sensedeploy.selector`, the
single source of ranking truth.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .model import _require_finite
from .selector import MAXIMIZE, MINIMIZE, CriterionSpec, DecisionMatrix, rank

WEATHER_FIELDS = ("temperature", "humidity", "pressure")


class EmptyReadingsError(ValueError):
    """Raised when a ranking is requested over zero readings."""


class DuplicateCityError(ValueError):
    """Raised when two readings share a city name."""


@dataclass(frozen=True, slots=True)
class CityReading:
    """One city's (possibly averaged) weather state."""

    city: str
    country: str
    temperature: float
    pressure: float
    humidity: float

    def __post_init__(self) -> None:
        for name in ("temperature", "pressure", "humidity"):
            _require_finite(getattr(self, name), name)
        if not 0.0 <= self.humidity <= 100.0:
            raise ValueError(f"humidity out of range [0, 100]: {self.humidity}")


@dataclass(frozen=True, slots=True)
class WeatherSample:
    """A timestamped reading, before windowing."""

    city: str
    country: str
    temperature: float
    pressure: float
    humidity: float
    observed_at: float


@dataclass(frozen=True, slots=True)
class DiseaseProfile:
    """A condition name plus the weather criteria it cares about."""

    disease: str
    criteria: tuple[CriterionSpec, ...]

    def __post_init__(self) -> None:
        for c in self.criteria:
            if c.name not in WEATHER_FIELDS:
                raise ValueError(f"criterion {c.name!r} is not a weather field {WEATHER_FIELDS}")


DISEASE_PROFILES: dict[str, DiseaseProfile] = {
    "osteoarthritis": DiseaseProfile(
        "osteoarthritis",
        (CriterionSpec("temperature", MAXIMIZE), CriterionSpec("humidity", MINIMIZE)),
    ),
    "arthritis": DiseaseProfile(
        "arthritis",
        (
            CriterionSpec("temperature", MAXIMIZE),
            CriterionSpec("humidity", MINIMIZE),
            CriterionSpec("pressure", MINIMIZE),
        ),
    ),
    "fibromyalgia": DiseaseProfile(
        "fibromyalgia",
        (CriterionSpec("temperature", MAXIMIZE), CriterionSpec("pressure", MINIMIZE)),
    ),
}


def _rescale_columns(values: np.ndarray) -> np.ndarray:
    """Min-max rescale each column to [0, 1]; constant columns become 0.5."""
    lo = values.min(axis=0)
    hi = values.max(axis=0)
    span = hi - lo
    safe = np.where(span == 0.0, 1.0, span)
    scaled = (values - lo) / safe
    return np.where(span == 0.0, 0.5, scaled)


def rank_cities(
    readings: Sequence[CityReading], profile: DiseaseProfile
) -> list[tuple[str, float]]:
    """Rank cities best-first for one condition profile.

    Returns ``(city, closeness)`` pairs in ranked order.
    """
    if not readings:
        raise EmptyReadingsError("need at least one reading")
    cities = [r.city for r in readings]
    if len(set(cities)) != len(cities):
        seen = {c for c in cities if cities.count(c) > 1}
        raise DuplicateCityError(f"duplicate city names: {sorted(seen)}")
    raw = np.array(
        [[getattr(r, c.name) for c in profile.criteria] for r in readings], dtype=np.float64
    )
    matrix = DecisionMatrix(tuple(cities), profile.criteria, _rescale_columns(raw))
    result = rank(matrix)
    return [(cities[i], float(result.closeness[i])) for i in result.order]


def windowed_means(
    samples: Iterable[WeatherSample], start: float, end: float
) -> list[CityReading]:
    """Per-city arithmetic means over samples inside the closed window.

    Cities with zero in-window samples are excluded. Output is ordered by
    first appearance of each city.
    """
    if not start < end:
        raise ValueError(f"window start must precede end: {start} >= {end}")
    sums: dict[str, list[float]] = {}
    countries: dict[str, str] = {}
    order: list[str] = []
    for s in samples:
        if not start <= s.observed_at <= end:
            continue
        if s.city not in sums:
            sums[s.city] = [0.0, 0.0, 0.0, 0.0]
            countries[s.city] = s.country
            order.append(s.city)
        acc = sums[s.city]
        acc[0] += s.temperature
        acc[1] += s.pressure
        acc[2] += s.humidity
        acc[3] += 1.0
    return [
        CityReading(
            city=city,
            country=countries[city],
            temperature=sums[city][0] / sums[city][3],
            pressure=sums[city][1] / sums[city][3],
            humidity=sums[city][2] / sums[city][3],
        )
        for city in order
    ]


def read_city_csv(text: str) -> list[CityReading]:
    """Parse the reading-table CSV (city,country,temp_k,pressure_hpa,humidity_pct)."""
    reader = csv.DictReader(io.StringIO(text))
    readings = []
    for row in reader:
        readings.append(
            CityReading(
                city=row["city"],
                country=row["country"],
                temperature=float(row["temp_k"]),
                pressure=float(row["pressure_hpa"]),
                humidity=float(row["humidity_pct"]),
            )
        )
    return readings


def load_city_fixture() -> list[CityReading]:
    """The shipped 12-city reference table (EU and NA temperature extremes)."""
    path = resources.files("sensedeploy").joinpath("fixtures/city_weather.csv")
    return read_city_csv(path.read_text("utf-8"))


def ranking_csv(ranking: Sequence[tuple[str, float]]) -> str:
    """Render a ranking as CSV with a header row."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["rank", "city", "closeness"])
    for position, (city, closeness) in enumerate(ranking, start=1):
        writer.writerow([position, city, f"{closeness:.6f}"])
    return out.getvalue()
