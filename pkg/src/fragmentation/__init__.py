"""
Fragmentation machinery: diamonds, piece cutting, smoothing, reconstruction, counting and schedules
"""
