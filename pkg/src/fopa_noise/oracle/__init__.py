"""Truncated Fock-space reference calculation."""
