"""Kerdock and Hankel codebooks over Z4, with list decoders and sparse approximation."""

from kerdock.field import FieldContext, is_primitive, primitive_poly

__all__ = ["FieldContext", "is_primitive", "primitive_poly"]

__version__ = "0.1.0"
