"""Tests for Superint Workbench."""
