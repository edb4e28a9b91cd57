import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sensedeploy.model import ContextVector, GenericSensor, GeoPoint, Measurements


def make_sensor(
    sensor_id: int = 1,
    name: str = "station",
    lat: float = 45.0,
    lon: float = 10.0,
    battery: float = 50.0,
    price: float = 10.0,
    drift: float = 0.1,
    frequency: float = 1.0,
    energy: float = 100.0,
    response: float = 200.0,
    temperature: float = 283.0,
    pressure: float = 1013.0,
    humidity: float = 60.0,
) -> GenericSensor:
    return GenericSensor(
        id=sensor_id,
        name=name,
        location=GeoPoint(lat, lon),
        measurements=Measurements(
            city=name,
            country="EE",
            base="stations",
            temperature=temperature,
            pressure=pressure,
            humidity=humidity,
        ),
        context=ContextVector(
            battery=battery,
            price=price,
            drift=drift,
            frequency=frequency,
            energy_consumption=energy,
            response_time=response,
        ),
        source_url=f"http://api.openweathermap.org/data/2.5/weather?id={sensor_id}",
        observed_at=1_423_267_200.0,
    )


@pytest.fixture
def sensor():
    return make_sensor()
