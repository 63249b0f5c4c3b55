"""
Structural analysis: automorphisms, expansion, subgraph census and counting bounds
"""
