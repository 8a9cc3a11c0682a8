"""pa_multigraph.utils

Utility helpers shared across the pa_multigraph package.
"""
from __future__ import annotations

import logging
import re
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import ConfigError

__all__ = [
    "setup_logger",
    "parse_rational",
    "rational_str",
    "run_seed_sequence",
    "make_rng",
    "GENERATOR_NAME",
]

GENERATOR_NAME = "numpy.random.PCG64"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

_rational_re = re.compile(r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)(\s*/\s*\d+)?\s*$")

RationalLike = Union[str, int, Fraction]


def setup_logger(name: str = "pa_multigraph", level: Union[int, str] = logging.INFO) -> logging.Logger:
    """Attach a single stream handler to the package logger (idempotent)."""
    logger = logging.getLogger(name)
    if not logger.handlers:
        h = logging.StreamHandler()
        h.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(h)
        logger.propagate = False
    logger.setLevel(level.upper() if isinstance(level, str) else level)
    return logger


def parse_rational(value: RationalLike) -> Fraction:
    """Parse ``"3/4"``, ``"0.5"`` or an int exactly; floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise ConfigError(f"rational must be given as a string or int, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str) or not _rational_re.match(value):
        raise ConfigError(f"not a rational literal: {value!r}")
    try:
        return Fraction(value.replace(" ", ""))
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"not a rational literal: {value!r}") from e


def rational_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def run_seed_sequence(master_seed: int, run_index: int, stream: int = 0) -> np.random.SeedSequence:
    """Stream split rule: run i of master seed s draws from SeedSequence(s, spawn_key=(i,)).

    Auxiliary streams of the same run (e.g. coverage sampling) use spawn_key=(i, stream).
    """
    key = (run_index,) if stream == 0 else (run_index, stream)
    return np.random.SeedSequence(master_seed, spawn_key=key)


def make_rng(master_seed: int, run_index: int = 0, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(run_seed_sequence(master_seed, run_index, stream)))
