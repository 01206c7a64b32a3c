"""Test suite for fast-disentangle."""
