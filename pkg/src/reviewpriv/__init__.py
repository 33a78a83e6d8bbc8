# src/reviewpriv/__init__.py

"""Post-processing for privacy-preserving release of sorted reviewer mean weights."""

__version__ = "1.0.0"
