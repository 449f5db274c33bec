"""Pydantic schemas: run configuration, data containers and records."""
