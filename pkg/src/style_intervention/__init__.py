"""Localized attribute edits in toy style-based generators."""

__version__ = "0.1.0"
