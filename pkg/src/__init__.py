"""
Noisy group testing toolkit.
"""

__version__ = "0.1.0"
