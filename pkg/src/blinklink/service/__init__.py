"""HTTP face of the toolkit: pydantic schemas and the FastAPI app factory."""

from .app import create_app

__all__ = ["create_app"]
