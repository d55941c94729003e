"""Twinsight - digital-twin enterprise analytics toolkit."""

__version__ = "1.0.0"
