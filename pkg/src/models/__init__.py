"""Data models for spectra, configuration, phenology and pipeline results."""
