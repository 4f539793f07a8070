"""Tests for CLI controllers."""
