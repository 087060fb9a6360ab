"""Spectral preprocessing, phenology, synthetic spectra and evaluation."""
