"""Figure rendering for thermovisc run artifacts (CSV in, images out)."""

__version__ = "0.1.0"
