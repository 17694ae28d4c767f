"""Test suite for mfcgac."""
