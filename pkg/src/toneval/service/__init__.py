"""Listening-test service: study loading, sessions, persistence, HTTP API."""

from .study import Stimulus, Study, load_study
from .core import EvalServer, SessionState
from .app import create_app

__all__ = [
    "Stimulus",
    "Study",
    "load_study",
    "EvalServer",
    "SessionState",
    "create_app",
]
