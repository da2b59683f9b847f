"""Two-photon excitation of a diamond four-level atom by a shaped frequency comb."""
__version__ = "0.1.0"
