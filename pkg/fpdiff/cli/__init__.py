"""
Command-line sub-commands.
"""
