"""Presentation layer - CLI interface and output formatting."""
