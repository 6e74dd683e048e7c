"""Convolutive motor synergies: learning, testing and command-line pipeline."""
