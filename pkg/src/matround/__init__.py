"""Exact iterative rounding for matroid-constrained LPs."""
