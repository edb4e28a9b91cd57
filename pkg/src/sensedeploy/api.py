"""REST surface for the orchestrator (consumed by the console UI and CLI).

Endpoints:

* ``POST /jobs`` — create a deployment job; 201 with its id.
* ``GET /jobs/{id}`` — job status view (state, phase timings, ACKs).
* ``GET /regions/sensors`` — preview available sensors in a bbox.
* ``GET /artifacts/{job}/{device}.tar.gz`` — published archive bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .model import GeoPoint, Region, sensor_to_dict
from .orchestrator import Orchestrator, UnknownJobError, ValidationError
from .repository import NoFixtureForRegionError
from .selector import CriterionSpec


class BBox(BaseModel):
    """Rectangle in the exact shape of the preview query parameters."""

    min_lon: float
    max_lon: float
    min_lat: float
    max_lat: float

    def to_region(self) -> Region:
        return Region(
            initial=GeoPoint(latitude=self.max_lat, longitude=self.min_lon),
            final=GeoPoint(latitude=self.min_lat, longitude=self.max_lon),
        )


class CriterionIn(BaseModel):
    name: str
    direction: Literal["max", "min"]


class JobRequest(BaseModel):
    region: BBox
    count: int = Field(ge=1)
    targets: list[str] = Field(min_length=1)
    selector: Literal["topsis", "random"] = "topsis"
    criteria: list[CriterionIn] | None = None
    per_device_limit: int | None = Field(default=None, ge=1)
    source: str = "fixture"
    seed: int = 0
    measurement_type: Literal["temperature", "humidity", "pressure"] = "temperature"
    history_hours: int = Field(default=168, ge=1)


def create_app(orchestrator: Orchestrator) -> FastAPI:
    """Build the API app around one orchestrator instance."""
    app = FastAPI(title="sensedeploy", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.orchestrator = orchestrator

    @app.post("/jobs", status_code=201)
    def create_job(request: JobRequest):
        try:
            region = request.region.to_region()
        except ValueError as exc:
            raise HTTPException(status_code=400, detail={"region": str(exc)})
        if request.source == "fixture":
            # Re-validate requested <= available server-side; the UI count may be stale.
            try:
                available, _ = orchestrator.preview(region, source="fixture", limit=None)
            except NoFixtureForRegionError as exc:
                raise HTTPException(status_code=400, detail={"region": str(exc)})
            if request.count > available:
                raise HTTPException(
                    status_code=400,
                    detail={"count": f"requested {request.count} > available {available}"},
                )
        criteria = None
        if request.criteria is not None:
            criteria = [CriterionSpec(c.name, c.direction) for c in request.criteria]
        try:
            job = orchestrator.create_job(
                region=region,
                count=request.count,
                targets=request.targets,
                selector=request.selector,
                criteria=criteria,
                per_device_limit=request.per_device_limit,
                source=request.source,
                seed=request.seed,
                measurement_type=request.measurement_type,
                history_hours=request.history_hours,
            )
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=exc.errors)
        return {"id": job.id}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        try:
            return orchestrator.job_view(job_id)
        except UnknownJobError:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")

    @app.get("/regions/sensors")
    def region_sensors(
        min_lon: float,
        max_lon: float,
        min_lat: float,
        max_lat: float,
        limit: int | None = Query(default=None, ge=1),
        source: str = "fixture",
    ):
        try:
            region = BBox(
                min_lon=min_lon, max_lon=max_lon, min_lat=min_lat, max_lat=max_lat
            ).to_region()
        except ValueError as exc:
            raise HTTPException(status_code=400, detail={"region": str(exc)})
        if source == "synthetic" and limit is None:
            raise HTTPException(
                status_code=400, detail={"limit": "synthetic preview requires a limit"}
            )
        try:
            count, sensors = orchestrator.preview(region, source=source, limit=limit)
        except NoFixtureForRegionError:
            return {"count": 0, "sensors": []}
        except ValueError as exc:
            raise HTTPException(status_code=400, detail={"source": str(exc)})
        return {"count": count, "sensors": [sensor_to_dict(s) for s in sensors]}

    @app.get("/artifacts/{job_id}/{archive}")
    def artifact(job_id: str, archive: str):
        path = orchestrator.archives_dir / job_id / archive
        if ".." in job_id or ".." in archive or not path.is_file():
            raise HTTPException(status_code=404, detail="no such archive")
        return Response(content=path.read_bytes(), media_type="application/gzip")

    return app


def serve(
    work_dir: Path | str | None = None,
    fixture_dir: Path | str | None = None,
    host: str = "127.0.0.1",
    port: int = 8000,
) -> None:
    """Run the API under uvicorn (blocking)."""
    import uvicorn

    orchestrator = Orchestrator(work_dir=work_dir, fixture_dir=fixture_dir, host=host)
    app = create_app(orchestrator)
    uvicorn.run(app, host=host, port=port, log_level="info")
