"""Tests for the testing-phase reconstruction package."""
