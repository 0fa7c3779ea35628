"""Unit test package for meshgcn."""
