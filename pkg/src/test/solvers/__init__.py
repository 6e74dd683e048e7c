"""Tests for the solvers package."""
