"""Rank cities by weather suitability for three rheumatic conditions.

Uses the shipped 12-city reference table (EU and NA temperature extremes,
early February) and prints the full ranking per condition.
"""

from sensedeploy.analysis import DISEASE_PROFILES, load_city_fixture, rank_cities

readings = load_city_fixture()
print(f"{len(readings)} cities loaded:")
for r in readings:
    print(
        f"  {r.city:14s} {r.country}  T={r.temperature:6.2f} K  "
        f"P={r.pressure:7.2f} hPa  H={r.humidity:5.1f} %"
    )

for disease, profile in DISEASE_PROFILES.items():
    wants = ", ".join(f"{c.direction} {c.name}" for c in profile.criteria)
    print(f"\n=== {disease} (wants {wants}) ===")
    for position, (city, closeness) in enumerate(rank_cities(readings, profile), start=1):
        marker = " <- best conditions" if position == 1 else ""
        print(f"  {position:2d}. {city:14s} closeness {closeness:.4f}{marker}")
