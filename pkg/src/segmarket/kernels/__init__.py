"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-Python twin is
used otherwise.  Set SEGMARKET_BACKEND=python (or =compiled) to force a
choice, e.g. for the backend benchmark or for debugging.
"""

from __future__ import annotations

import importlib
import os

from . import python_backend
from .pack import PackedMarket, pack

_forced = os.environ.get("SEGMARKET_BACKEND", "").strip().lower()

_compiled = None
if _forced != "python":
    try:
        _compiled = importlib.import_module("._compiled", __package__)
    except ImportError as exc:
        if _forced == "compiled":
            raise ImportError(
                "SEGMARKET_BACKEND=compiled but the extension is not built; "
                "reinstall with a C toolchain or unset the variable") from exc

_backend = _compiled if _compiled is not None else python_backend

BACKEND_NAME: str = _backend.NAME

eval_profile = _backend.eval_profile
deviation_context = _backend.deviation_context
profit_batch = _backend.profit_batch


def available_backends() -> list[str]:
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name: str):
    """Return a backend module by name (for benchmarks and equivalence tests)."""
    if name == "python":
        return python_backend
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel backend is not available")
        return _compiled
    raise ValueError(f"unknown backend '{name}'")


__all__ = [
    "PackedMarket", "pack", "eval_profile", "deviation_context", "profit_batch",
    "BACKEND_NAME", "available_backends", "get_backend",
]
