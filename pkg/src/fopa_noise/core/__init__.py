"""Transfer matrices, ladder signatures and the built-in amplifier models."""
