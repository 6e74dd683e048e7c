"""Tests for the core model package."""
