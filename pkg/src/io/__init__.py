"""
Edge-list codec and result emitters
"""
