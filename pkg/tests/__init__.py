"""fading-bc test package."""
