"""Test suite for stereogan."""
