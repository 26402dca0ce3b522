"""Pydantic schemas for reports, run configuration and API payloads."""
