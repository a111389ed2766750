"""
Pydantic schemas for JSON documents.
"""
