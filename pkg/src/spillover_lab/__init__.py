"""Belief updating, identity distortion and strategic messaging when economic
and cultural opinions travel together."""

from .core import BinaryBelief, Message, RngStream, Stance, Tag, normalize, pearson

__version__ = "0.1.0"

__all__ = ["BinaryBelief", "Message", "RngStream", "Stance", "Tag", "normalize", "pearson", "__version__"]
