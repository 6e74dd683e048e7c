"""Tests for the dataio package."""
