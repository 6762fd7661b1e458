"""Unit-distance graphs in exact arithmetic, SAT-certified chromatic bounds,
and proof-core graph shrinking."""

__version__ = "0.1.0"
