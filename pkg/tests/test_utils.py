from fractions import Fraction

import numpy as np
import pytest

from pa_multigraph.errors import ConfigError
from pa_multigraph.utils import make_rng, parse_rational, rational_str, run_seed_sequence, setup_logger


def test_parse_rational_fraction_string():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational(" 3 / 4 ") == Fraction(3, 4)


def test_parse_rational_decimal_is_exact():
    assert parse_rational("0.1") == Fraction(1, 10)
    assert parse_rational(7) == Fraction(7)


def test_parse_rational_refuses_floats_and_bools():
    with pytest.raises(ConfigError):
        parse_rational(0.5)
    with pytest.raises(ConfigError):
        parse_rational(True)


def test_parse_rational_rejects_garbage():
    for bad in ("abc", "1/0", "", "1e3"):
        with pytest.raises(ConfigError):
            parse_rational(bad)


def test_rational_str():
    assert rational_str(Fraction(3, 4)) == "3/4"
    assert rational_str(Fraction(2)) == "2"


def test_make_rng_is_reproducible_per_run_index():
    a = make_rng(7, 0).integers(0, 2**32, size=8)
    b = make_rng(7, 0).integers(0, 2**32, size=8)
    c = make_rng(7, 1).integers(0, 2**32, size=8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_auxiliary_stream_differs_from_main_stream():
    main = make_rng(3, 2).integers(0, 2**32, size=8)
    aux = make_rng(3, 2, stream=1).integers(0, 2**32, size=8)
    assert not np.array_equal(main, aux)
    assert run_seed_sequence(3, 2).spawn_key == (2,)
    assert run_seed_sequence(3, 2, stream=1).spawn_key == (2, 1)


def test_setup_logger_is_idempotent():
    logger = setup_logger("pa_multigraph.tests.logger", level="debug")
    setup_logger("pa_multigraph.tests.logger")
    assert len(logger.handlers) == 1
    assert logger.propagate is False
