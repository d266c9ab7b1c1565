"""Finite-dimensional toolkit for Jordan algebras of nilpotent matrices."""
