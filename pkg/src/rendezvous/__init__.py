"""Two-robot rendezvous with visible lights: exact simulator, adversary
schedules, and bounded model checking."""

from __future__ import annotations

__version__ = "0.1.0"
