"""Closed-form photon-number moments, gains and noise figures."""
