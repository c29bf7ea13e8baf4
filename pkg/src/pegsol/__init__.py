"""Peg-solitaire winning-position databases and real-time move oracles."""

from pegsol.boards import BoardGeometry, Position, decode, encode, make_geometry

__all__ = ["BoardGeometry", "Position", "decode", "encode", "make_geometry"]
__version__ = "0.1.0"
