"""Surface-modified dissipation and decoherence of a levitated nanosphere."""

__version__ = "0.1.0"
