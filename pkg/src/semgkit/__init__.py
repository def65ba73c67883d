"""Desk-scale surface EMG toolkit.

Everything runs in software: a parametric model of an active dry-contact
bipolar sensor, a CMRR characterization bench, a deterministic synthetic
session generator, a bit-exact amplifier frame codec, and an envelope /
activation-map gesture classification pipeline.
"""

from semgkit.protocol import GestureLabel, ProtocolSpec

__version__ = "0.1.0"

__all__ = ["GestureLabel", "ProtocolSpec", "__version__"]
