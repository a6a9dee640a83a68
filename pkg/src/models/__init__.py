"""Value types and the error hierarchy."""
