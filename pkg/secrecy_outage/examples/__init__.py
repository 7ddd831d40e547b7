"""
Example scripts for the secrecy outage toolkit.
"""
