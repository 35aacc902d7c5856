"""Python access to the atlforge model checker and plan generator."""

from ._atlforge import (
    Error,
    Model,
    ParseError,
    count_beliefs,
    load_plans,
    replay,
    roundtrip_plans,
)

__all__ = [
    "Error",
    "Model",
    "ParseError",
    "count_beliefs",
    "load_plans",
    "replay",
    "roundtrip_plans",
]
