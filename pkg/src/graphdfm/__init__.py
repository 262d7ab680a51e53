"""Discrete flow matching for categorical graphs."""
