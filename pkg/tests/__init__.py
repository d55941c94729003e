"""Twinsight test suite."""
