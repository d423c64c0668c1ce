"""Convex bodies XC and their geometric functionals."""
