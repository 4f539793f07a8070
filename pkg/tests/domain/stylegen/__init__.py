"""Tests for the toy style-based generator."""
