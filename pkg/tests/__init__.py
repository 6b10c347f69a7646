"""
Tests for mres.
"""
