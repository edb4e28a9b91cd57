"""Marshal generic sensors into target-middleware virtual-sensor XML.

The emitted descriptor is the bridge-class XML the GSN middleware deploys:
an output structure naming the weather fields, addressing predicates with
the sensor's coordinates, a storage window, and a single stream whose
wrapper polls the sensor's source URL. Descriptors are deterministic byte
streams (UTF-8, LF endings, shortest round-trip decimals) so archives built
from them are reproducible.
"""

from __future__ import annotations

import json
import re
import shutil
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from ._fileio import FileWriter
from .model import GenericSensor

MEASUREMENT_TYPES = ("temperature", "humidity", "pressure")

#: Field (name, type) pairs of the descriptor output structure, in order.
OUTPUT_FIELDS = (
    ("city", "varchar(255)"),
    ("country", "varchar(255)"),
    ("base", "varchar(255)"),
    ("temp", "double"),
    ("sea_level", "double"),
    ("pressure", "double"),
    ("humidity", "double"),
)

_SOURCE_QUERY = "Select city, country, base, sea_level, temp, humidity, pressure from wrapper"
_STREAM_QUERY = "Select * from source1"
_WHITESPACE = re.compile(r"\s+")


class InvalidMeasurementTypeError(ValueError):
    """Raised for measurement types the wrapper cannot poll."""


class DescriptorStructureError(ValueError):
    """A descriptor does not match the shipped structure description."""


@dataclass(frozen=True, slots=True)
class VirtualSensorDescriptor:
    """A named, serialized virtual-sensor definition.

    Invariant (checked by :func:`verify`, not per construction — marshaling
    is a hot path): ``content`` is well-formed XML whose root is
    ``virtual-sensor`` with a ``name`` attribute equal to ``name``.
    """

    name: str
    file_name: str
    content: bytes

    def verify(self) -> None:
        root = ET.fromstring(self.content)
        if root.tag != "virtual-sensor":
            raise ValueError(f"root element must be 'virtual-sensor', got {root.tag!r}")
        if root.get("name") != self.name:
            raise ValueError(
                f"descriptor name {self.name!r} does not match root attribute {root.get('name')!r}"
            )


def format_decimal(value: float) -> str:
    """Shortest round-trip decimal text, never exponent notation."""
    value = float(value)
    if value == int(value):
        return str(int(value))
    text = repr(value)
    if "e" in text or "E" in text:
        text = format(value, ".17f").rstrip("0").rstrip(".")
    return text


def descriptor_name(sensor: GenericSensor) -> str:
    """Sensor name + id with all whitespace stripped."""
    return _WHITESPACE.sub("", f"{sensor.name}{sensor.id}")


_TEMPLATE = """<?xml version="1.0" encoding="UTF-8" standalone="no"?>
<virtual-sensor name="{name}" priority="{priority}">
  <processing-class>
    <class-name>gsn.vsensor.BridgeVirtualSensor</class-name>
    <init-params/>
    <output-structure>
{fields}
    </output-structure>
  </processing-class>
  <description/>
  <addressing>
    <predicate key="geographical">{geographical}</predicate>
    <predicate key="LATITUDE">{latitude}</predicate>
    <predicate key="LONGITUDE">{longitude}</predicate>
  </addressing>
  <storage history-size="{history}h"/>
  <streams>
    <stream name="stream1">
      <source alias="source1" sampling-rate="{sampling_rate}" storage-size="{history}h">
        <address wrapper="openweathermap">
          <predicate key="url">{url}</predicate>
          <predicate key="type">{measurement_type}</predicate>
        </address>
        <query>{source_query}</query>
      </source>
      <query>{stream_query}</query>
    </stream>
  </streams>
</virtual-sensor>
"""

_FIELDS_XML = "\n".join(
    f'      <field name="{name}" type="{escape(ftype, {chr(34): "&quot;"})}"/>'
    for name, ftype in OUTPUT_FIELDS
)


def _render(
    name: str,
    sensor: GenericSensor,
    measurement_type: str,
    history_hours: int,
    priority: int,
    sampling_rate: int,
) -> bytes:
    quoted = {'"': "&quot;"}
    text = _TEMPLATE.format(
        name=escape(name, quoted),
        priority=priority,
        fields=_FIELDS_XML,
        geographical=escape(f"{sensor.name} {sensor.id}"),
        latitude=format_decimal(sensor.location.latitude),
        longitude=format_decimal(sensor.location.longitude),
        history=history_hours,
        sampling_rate=sampling_rate,
        url=escape(sensor.source_url),
        measurement_type=escape(measurement_type),
        source_query=escape(_SOURCE_QUERY),
        stream_query=escape(_STREAM_QUERY),
    )
    return text.encode("utf-8")


def marshal(
    sensor: GenericSensor,
    measurement_type: str,
    history_hours: int = 168,
    priority: int = 10,
    sampling_rate: int = 1,
) -> VirtualSensorDescriptor:
    """Serialize one sensor into a virtual-sensor descriptor.

    ``history_hours`` sets both the storage window and the stream source's
    storage size. ``priority`` and ``sampling_rate`` are fixed defaults
    (10 and 1) that jobs may override but nothing auto-derives.
    """
    if measurement_type not in MEASUREMENT_TYPES:
        raise InvalidMeasurementTypeError(
            f"measurement_type must be one of {MEASUREMENT_TYPES}: {measurement_type!r}"
        )
    if history_hours <= 0:
        raise ValueError(f"history_hours must be > 0: {history_hours}")
    name = descriptor_name(sensor)
    content = _render(name, sensor, measurement_type, history_hours, priority, sampling_rate)
    return VirtualSensorDescriptor(name=name, file_name=f"{name}.xml", content=content)


def marshal_batch(
    sensors: Sequence[GenericSensor],
    measurement_type: str,
    history_hours: int = 168,
    store_dir: Path | str | None = None,
    priority: int = 10,
    sampling_rate: int = 1,
) -> list[VirtualSensorDescriptor]:
    """Marshal many sensors, optionally persisting each into a store directory.

    Output order matches input order. Duplicate descriptor names get an
    index suffix (``-1``, ``-2``, ...). Any per-sensor failure aborts the
    whole batch and removes files already written: a deploy job is
    all-or-nothing.
    """
    if not sensors:
        raise ValueError("marshal_batch requires at least one sensor")
    if measurement_type not in MEASUREMENT_TYPES:
        raise InvalidMeasurementTypeError(
            f"measurement_type must be one of {MEASUREMENT_TYPES}: {measurement_type!r}"
        )
    if history_hours <= 0:
        raise ValueError(f"history_hours must be > 0: {history_hours}")

    target = Path(store_dir) if store_dir is not None else None
    writer = None
    if target is not None:
        target.mkdir(parents=True, exist_ok=True)
        writer = FileWriter(str(target))
    seen: dict[str, int] = {}
    descriptors: list[VirtualSensorDescriptor] = []
    try:
        for sensor in sensors:
            base = descriptor_name(sensor)
            count = seen.get(base, 0)
            seen[base] = count + 1
            name = base if count == 0 else f"{base}-{count}"
            content = _render(name, sensor, measurement_type, history_hours, priority, sampling_rate)
            descriptor = VirtualSensorDescriptor(
                name=name, file_name=f"{name}.xml", content=content
            )
            if writer is not None:
                writer.put(descriptor.file_name, content)
            descriptors.append(descriptor)
        if writer is not None:
            writer.finish()
    except Exception:
        if writer is not None:
            writer.abort()
        if target is not None:
            shutil.rmtree(target, ignore_errors=True)
        raise
    return descriptors


@dataclass(frozen=True, slots=True)
class ParsedDescriptor:
    """Fields recovered from descriptor XML (round-trip checks, tooling)."""

    name: str
    priority: int
    latitude: float
    longitude: float
    geographical: str
    url: str
    measurement_type: str
    history_hours: int
    sampling_rate: int
    output_fields: tuple[tuple[str, str], ...]


def parse_descriptor(content: bytes) -> ParsedDescriptor:
    """Parse descriptor XML back into its addressing and stream fields."""
    root = ET.fromstring(content)
    addressing = {p.get("key"): (p.text or "") for p in root.findall("addressing/predicate")}
    source = root.find("streams/stream/source")
    if source is None:
        raise DescriptorStructureError("descriptor has no stream source")
    address = {p.get("key"): (p.text or "") for p in source.findall("address/predicate")}
    storage = root.find("storage")
    if storage is None or not (storage.get("history-size") or "").endswith("h"):
        raise DescriptorStructureError("descriptor has no hour-valued storage history")
    fields = tuple(
        (f.get("name") or "", f.get("type") or "")
        for f in root.findall("processing-class/output-structure/field")
    )
    return ParsedDescriptor(
        name=root.get("name") or "",
        priority=int(root.get("priority") or 0),
        latitude=float(addressing["LATITUDE"]),
        longitude=float(addressing["LONGITUDE"]),
        geographical=addressing.get("geographical", ""),
        url=address["url"],
        measurement_type=address["type"],
        history_hours=int((storage.get("history-size") or "0h")[:-1]),
        sampling_rate=int(source.get("sampling-rate") or 0),
        output_fields=fields,
    )


def _load_structure_schema() -> dict:
    path = resources.files("sensedeploy").joinpath("fixtures/descriptor_structure.json")
    return json.loads(path.read_text("utf-8"))


def validate_structure(content: bytes, schema: dict | None = None) -> None:
    """Check a descriptor against the shipped structure description.

    Raises :class:`DescriptorStructureError` on the first divergence;
    returns None when the descriptor conforms.
    """
    if schema is None:
        schema = _load_structure_schema()
    try:
        root = ET.fromstring(content)
    except ET.ParseError as exc:
        raise DescriptorStructureError(f"not well-formed XML: {exc}") from exc
    if root.tag != schema["root"]:
        raise DescriptorStructureError(f"root element is {root.tag!r}, want {schema['root']!r}")
    for attr in schema["root_attributes"]:
        if root.get(attr) is None:
            raise DescriptorStructureError(f"root lacks required attribute {attr!r}")
    for path in schema["required_paths"]:
        if root.find(path) is None:
            raise DescriptorStructureError(f"missing required element {path!r}")
    fields = [
        (f.get("name"), f.get("type"))
        for f in root.findall("processing-class/output-structure/field")
    ]
    expected = [tuple(pair) for pair in schema["output_fields"]]
    if fields != expected:
        raise DescriptorStructureError(f"output fields {fields} != {expected}")
    keys = {p.get("key") for p in root.findall("addressing/predicate")}
    if not set(schema["addressing_keys"]) <= keys:
        raise DescriptorStructureError(
            f"addressing keys {sorted(keys)} lack {schema['addressing_keys']}"
        )
    source = root.find("streams/stream/source")
    address = source.find("address") if source is not None else None
    if address is None or address.get("wrapper") != schema["wrapper"]:
        raise DescriptorStructureError(f"stream address wrapper must be {schema['wrapper']!r}")
    address_keys = {p.get("key") for p in address.findall("predicate")}
    if not set(schema["address_keys"]) <= address_keys:
        raise DescriptorStructureError(
            f"address keys {sorted(address_keys)} lack {schema['address_keys']}"
        )
    storage = root.find("storage")
    if storage is None or not re.fullmatch(r"\d+h", storage.get("history-size") or ""):
        raise DescriptorStructureError("storage history-size must match <hours>h")
