"""src/doublet/core/__init__.py"""
