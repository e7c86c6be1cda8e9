"""Exact conservative Kepler propagation in KS coordinates."""
