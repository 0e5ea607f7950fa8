"""State-builder mini language used on the command line.

    ghz:4   w:3   product:0101   werner:0.5   bbo:0.2,0.3   mix:ghz:4:0.1
"""

from __future__ import annotations

import logging

import numpy as np

from ..core.tensor_core import DensityMatrix, PureState
from ..errors import MixedStateError, ParseError, UsageError
from .zoo import BBOParams, bbo_state, ghz, isotropic_mix, product_state, w_state, werner

logger = logging.getLogger(__name__)

State = PureState | DensityMatrix


def as_density(state: State) -> DensityMatrix:
    return state.projector() if isinstance(state, PureState) else state


def as_pure(state: State, spec: str = "") -> PureState:
    if isinstance(state, PureState):
        return state
    raise MixedStateError(f"'{spec}' describes a mixed state; a pure state is required")


def _floats(text: str, count: int, spec: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != count:
        raise ParseError(f"'{spec}': expected {count} comma-separated numbers")
    try:
        values = [float(x) for x in parts]
    except ValueError as exc:
        raise ParseError(f"'{spec}': {exc}") from exc
    if not all(np.isfinite(values)):
        raise ParseError(f"'{spec}': values must be finite")
    return values


def _int(text: str, spec: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ParseError(f"'{spec}': '{text}' is not an integer") from exc


def parse_state(spec: str) -> State:
    """Builds the state a spec string describes; pure forms return `PureState`."""
    spec = spec.strip()
    kind, sep, arg = spec.partition(":")
    if not sep or not arg:
        raise ParseError(f"'{spec}': expected <kind>:<arguments>")

    try:
        if kind == "ghz":
            return ghz(_int(arg, spec))
        if kind == "w":
            return w_state(_int(arg, spec))
        if kind == "product":
            if not arg.isdigit():
                raise ParseError(f"'{spec}': product labels must be digits")
            return product_state(arg, d=max(2, max(int(c) for c in arg) + 1))
        if kind == "werner":
            (w,) = _floats(arg, 1, spec)
            return werner(w)
        if kind == "bbo":
            p1, p2 = _floats(arg, 2, spec)
            return bbo_state(BBOParams(p1, p2))
        if kind == "mix":
            inner, sep, q = arg.rpartition(":")
            if not sep or not inner:
                raise ParseError(f"'{spec}': expected mix:<state>:<q>")
            (q,) = _floats(q, 1, spec)
            return isotropic_mix(as_density(parse_state(inner)), q)
    except ParseError:
        raise
    except UsageError as exc:
        raise ParseError(f"'{spec}': {exc}") from exc

    raise ParseError(f"'{spec}': unknown state kind '{kind}'")
