"""REST + websocket service exposing videos, live annotation sessions and
analyses to the UI and to scripts."""

from .app import create_app

__all__ = ["create_app"]
