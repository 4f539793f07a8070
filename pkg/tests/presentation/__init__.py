"""Tests for presentation layer."""
