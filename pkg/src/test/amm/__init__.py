"""Tests for the alternating minimization package."""
