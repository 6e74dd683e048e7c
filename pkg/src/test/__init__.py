"""Tests for the synergies package."""
