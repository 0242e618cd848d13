"""Almost-equidistant point sets: abstract graph enumeration, constructions and verification."""

__version__ = "0.1.0"
