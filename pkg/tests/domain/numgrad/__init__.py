"""Tests for the numgrad tensor library."""
