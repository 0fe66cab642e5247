"""Pydantic models of the kernel."""
