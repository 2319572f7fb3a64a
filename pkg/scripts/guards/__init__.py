from __future__ import annotations

__all__ = ["pattern_guard"]
