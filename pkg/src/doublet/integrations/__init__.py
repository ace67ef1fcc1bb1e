"""src/doublet/integrations/__init__.py"""
