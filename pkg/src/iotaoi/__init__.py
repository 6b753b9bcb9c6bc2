"""Age of information and D2D throughput in cellular IoT networks.

Stochastic-geometry analysis of a network where devices either send status
updates to the nearest base station (within a coverage radius) or exchange
regular D2D messages, together with a slot-level simulator to check it.
"""

from .errors import IotAoiError, NumericalError, ParameterError, SimulationError
from .model import NetworkParams, check, db_to_linear, linear_to_db, validate

__all__ = [
    "IotAoiError",
    "NetworkParams",
    "NumericalError",
    "ParameterError",
    "SimulationError",
    "check",
    "db_to_linear",
    "linear_to_db",
    "validate",
]
__version__ = "0.1.0"
