"""fundmaint package (under construction)."""
