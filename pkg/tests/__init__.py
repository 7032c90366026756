"""Test suite for qqlab."""
