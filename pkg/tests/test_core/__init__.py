"""
core tests.
"""
