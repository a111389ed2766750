"""
Test suite for fpdiff.
"""
