"""Tests for the style-intervention package."""
