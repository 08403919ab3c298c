"""Tests for modvoa-heisenberg."""
