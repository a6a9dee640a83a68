"""stylekit test suite."""
