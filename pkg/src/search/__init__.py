"""
Spanning-copy search: exact backtracking and anchored local search over cyclic orders
"""
