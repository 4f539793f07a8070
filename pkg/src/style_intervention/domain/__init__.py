"""Domain layer - generator, directions, intervention and analysis."""
