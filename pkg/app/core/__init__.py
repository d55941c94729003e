"""Core module - configuration, logging, metrics and errors."""
