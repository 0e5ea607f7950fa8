"""Top-level package for sepscope.

Multipartite entanglement measures R_m for pure states and their computable
lower bounds R~_m for mixed states. The commonly used entry points are
re-exported here; the CLI lives in `sepscope.cli`.
"""

from .measures.mixed import BoundVariant, eta_bound, lambda_bound, rm_bound
from .measures.pure import DEFAULT_CONFIG, MeasureConfig, eta_pure, rm_pure
from .states.spec_parser import parse_state

__all__ = [
    "BoundVariant",
    "DEFAULT_CONFIG",
    "MeasureConfig",
    "eta_bound",
    "eta_pure",
    "lambda_bound",
    "parse_state",
    "rm_bound",
    "rm_pure",
]
