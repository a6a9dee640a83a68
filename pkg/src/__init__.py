"""stylekit: rule-based signal processing for singing style conversion."""
