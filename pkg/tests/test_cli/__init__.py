"""
cli tests.
"""
