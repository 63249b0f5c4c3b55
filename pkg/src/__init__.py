"""
SpanLab: desk-scale laboratory for thresholds of spanning regular subgraphs
"""

__version__ = "1.0.0"
__author__ = "SpanLab Team"
__description__ = "Expansion certification, subgraph census, fragmentation experiments and threshold estimation for spanning regular graphs"
