"""Gains, photon-number statistics and noise figures of multi-mode fiber parametric amplifiers."""

__version__ = "0.1.0"
