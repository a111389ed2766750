"""
infrastructure tests.
"""
