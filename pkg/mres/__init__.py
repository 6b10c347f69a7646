"""
mres: Merge Resolution proof system for QBF
"""

__version__ = '0.1.0'
