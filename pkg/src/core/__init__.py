"""
Core functionality for SpanLab: configuration, errors, logging and seeding
"""
