"""Errors raised while reading SMILES input."""


class SmilesError(ValueError):
    """Base class for SMILES parsing failures."""


class SmilesSyntaxError(SmilesError):
    """Malformed text: unbalanced rings, brackets or parentheses."""


class ValenceError(SmilesError):
    """Bonded valence exceeds what the element/charge allows."""


class UnsupportedFeatureError(SmilesError):
    """Valid SMILES using a feature outside the supported subset."""
