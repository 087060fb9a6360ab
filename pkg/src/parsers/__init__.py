"""CSV readers and writers for leaf spectra and daily temperatures."""
