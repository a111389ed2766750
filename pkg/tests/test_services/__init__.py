"""
services tests.
"""
