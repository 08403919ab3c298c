"""Tests for modvoa-core."""
