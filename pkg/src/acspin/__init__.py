"""Driven dissipative spin-1/2 systems and zeroth-harmonic generation."""
