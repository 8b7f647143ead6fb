"""Linear fractional difference maps whose order varies periodically in time."""

from vomap._backend import BACKEND
from vomap.errors import (
    AnalysisError,
    BracketingError,
    CapacityError,
    DomainError,
    PoleError,
    VomapError,
)
from vomap.kernel import WeightTable, binom_weight, weight_table
from vomap.simulator import (
    MapConfig,
    OrderSchedule,
    Status,
    Trajectory,
    classify,
    extract_cycle,
    simulate,
    simulate_decomposed_T2,
    simulate_decomposed_T3,
)

__version__ = "0.1.0"
