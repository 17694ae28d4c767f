"""Integration tests (end-to-end runs through the CLI and run directories)."""
