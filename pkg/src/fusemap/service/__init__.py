from .live import LiveSession, ReplaySession
from .api import create_app

__all__ = ["LiveSession", "ReplaySession", "create_app"]
