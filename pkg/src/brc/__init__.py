"""Rate regions of broadcast relay channels: evaluation, comparison and derivation."""

__version__ = "0.1.0"
