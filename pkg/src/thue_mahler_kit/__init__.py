from __future__ import annotations

__all__ = [
    "FieldElement",
    "NumberField",
    "ReportClient",
    "SContext",
    "ThueMahlerError",
    "create_app",
    "s_context",
]

from .app import create_app
from .client import ReportClient
from .errors import ThueMahlerError
from .number_field import FieldElement, NumberField
from .s_arithmetic import SContext, s_context
