"""
Version for `qknh` package.
"""

version_tuple = (0, 1, 0)
__version__ = ".".join(map(str, version_tuple))
