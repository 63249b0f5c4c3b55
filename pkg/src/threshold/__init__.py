"""
Containment probability and threshold estimation
"""
