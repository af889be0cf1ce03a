"""
Process settings and the logging configuration file.
"""
