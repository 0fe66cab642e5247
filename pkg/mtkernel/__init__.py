"""Executable M-types: rational trees, proto-coalgebras, slices and sheaves."""
