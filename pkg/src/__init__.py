"""
LIPSCHITZ BOUNDARY TOOLKIT - Source Package
"""
__version__ = "1.0"
