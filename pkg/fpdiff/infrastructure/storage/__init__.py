"""
File-based storage.
"""
