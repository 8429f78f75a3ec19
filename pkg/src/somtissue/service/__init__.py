"""FastAPI service exposing tissue sessions, plus a small httpx client."""
from .app import create_app

__all__ = ["create_app"]
