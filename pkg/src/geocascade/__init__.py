"""Cascading-failure simulator and analytic bounds for circular attacks on
random geometric networks."""

__version__ = "0.1.0"
