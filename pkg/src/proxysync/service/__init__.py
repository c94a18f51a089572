"""HTTP service exposing scenario runs, oracles, the codec and replica sessions."""

from .app import create_app

__all__ = ["create_app"]
