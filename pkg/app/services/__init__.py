"""Services module - ingestion, engines, reports and validation."""
