"""sensedeploy: discover, rank and deploy virtual sensors as a service.

The pipeline: repository adapters fetch sensor metadata for a geographic
region and unmarshal it into generic sensor objects; the selector ranks
candidates on their context properties; the marshaler renders winners into
target-middleware descriptor XML; the orchestrator archives descriptors per
device and publishes them; device agents download, verify, unpack and
acknowledge. A bench harness measures each phase and an analysis module
ranks cities by weather suitability for rheumatic conditions.
"""

from .model import (
    CONTEXT_FIELDS,
    CONTEXT_RANGES,
    ContextVector,
    GenericSensor,
    GeoPoint,
    Measurements,
    Region,
    region_contains,
)
from .selector import (
    DEFAULT_CRITERIA,
    CriterionSpec,
    DecisionMatrix,
    TopsisResult,
    rank,
    select_random,
    select_top,
)

__version__ = "0.1.0"

__all__ = [
    "CONTEXT_FIELDS",
    "CONTEXT_RANGES",
    "ContextVector",
    "GenericSensor",
    "GeoPoint",
    "Measurements",
    "Region",
    "region_contains",
    "DEFAULT_CRITERIA",
    "CriterionSpec",
    "DecisionMatrix",
    "TopsisResult",
    "rank",
    "select_random",
    "select_top",
    "__version__",
]
