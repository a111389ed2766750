"""
fpdiff: differential floating-point testing across GPU and host compilers.
"""
__version__ = "1.0.0"
