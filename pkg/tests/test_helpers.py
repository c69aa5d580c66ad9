from fractions import Fraction

import pytest
import sympy

from polycert.libs.config import Config
from polycert.utils.helpers import (
    bitsize,
    get_command_config,
    get_config_data,
    get_value_from_dicts,
    rational_nullspace,
    run_in_pool,
    solve_rational_system,
    to_fraction,
)


@pytest.mark.parametrize(
    "value, expected",
    [
        (3, Fraction(3)),
        ("2/6", Fraction(1, 3)),
        (0.5, Fraction(1, 2)),
        (sympy.Rational(3, 4), Fraction(3, 4)),
    ],
)
def test_to_fraction(value, expected):
    assert to_fraction(value) == expected


@pytest.mark.parametrize("value", [True, float("nan"), object()])
def test_to_fraction_rejects(value):
    with pytest.raises((TypeError, ValueError)):
        to_fraction(value)


def test_value_precedence():
    assert get_value_from_dicts(primary_dict={"tol": 1}, secondary_dict={"tol": 2}, key="tol") == 1
    assert get_value_from_dicts(primary_dict={"tol": None}, secondary_dict={"tol": 2}, key="tol") == 2
    assert get_value_from_dicts(primary_dict={}, secondary_dict={}, key="tol", return_on_none=3) == 3


def test_config_reads_env_dir(config_dir):
    config = Config()
    assert config.data["iters"] == 5
    assert config.get_command(command_name="nash-solve") == {"iters": 3}
    assert config.get_command(command_name="bench") == {}


def test_missing_config_is_not_fatal(tmp_path):
    with pytest.raises(FileNotFoundError):
        Config(data_dir=str(tmp_path))
    assert get_config_data(data_dir=str(tmp_path)) == {}
    assert get_command_config(command_name="classify", data_dir=str(tmp_path)) == {}


def test_rational_nullspace():
    basis = rational_nullspace([[1, 1], [2, 2]])
    assert basis == [[Fraction(-1), Fraction(1)]]


def test_solve_rational_system():
    assert solve_rational_system(lhs=[[2, 0], [0, 3]], rhs=[1, 1]) == [Fraction(1, 2), Fraction(1, 3)]
    assert solve_rational_system(lhs=[[1, 1], [1, 1]], rhs=[1, 2]) is None
    assert solve_rational_system(lhs=[[1, 1]], rhs=[1]) is None


def test_bitsize():
    assert bitsize(1) == 1
    assert bitsize(8) == 4
    with pytest.raises(ValueError):
        bitsize(0)


def test_run_in_pool_keeps_order_and_drops_failures():
    def _invert(value):
        return 1 / value

    assert run_in_pool(func=_invert, items=[1, 0, 4], jobs=2, log_prefix="test") == [1.0, None, 0.25]
