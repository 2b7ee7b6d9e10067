"""Neural entrainment distance toolkit."""

__version__ = "0.1.0"
