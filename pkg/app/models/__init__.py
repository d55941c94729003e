"""Models module - domain types and pydantic schemas."""
