"""Top-level package for pa_multigraph."""
from __future__ import annotations

__version__ = "0.1.0"
__all__ = ["GrowthTable", "Multigraph", "run", "run_ensemble"]

_LAZY = {
    "GrowthTable": "growth",
    "Multigraph": "multigraph",
    "run": "pa_engine",
    "run_ensemble": "harness",
}


def __getattr__(name):  # type: ignore[override]
    if name in _LAZY:
        from importlib import import_module

        return getattr(import_module(f".{_LAZY[name]}", __name__), name)
    raise AttributeError(name)
