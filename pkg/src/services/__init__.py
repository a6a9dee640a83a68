"""Numerical operations and pipeline orchestration."""
