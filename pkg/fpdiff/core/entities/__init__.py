"""
Core domain entities.
"""
