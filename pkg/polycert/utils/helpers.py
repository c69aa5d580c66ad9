from concurrent.futures import ThreadPoolExecutor, as_completed
from fractions import Fraction
from numbers import Integral, Rational
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import shortuuid
import sympy
from colorama import Fore
from pyhelper_utils.general import ignore_exceptions

from polycert.libs.config import Config
from polycert.utils.constants import (
    INACCURATE_STR,
    INFEASIBLE_STR,
    LOGGER,
    OPTIMAL_STR,
    UNBOUNDED_STR,
)


def get_value_from_dicts(
    primary_dict: Dict[Any, Any], secondary_dict: Dict[Any, Any], key: str, return_on_none: Optional[Any] = None
) -> Any:
    """
    Get value from two dictionaries.

    If value is not found (or is None) in primary_dict, try to get it from secondary_dict, otherwise return
    return_on_none.
    """
    value = primary_dict.get(key)
    if value is None:
        value = secondary_dict.get(key)

    return return_on_none if value is None else value


@ignore_exceptions(logger=LOGGER, return_on_error={})
def get_config_data(data_dir=None):
    return Config(data_dir=data_dir).data


@ignore_exceptions(logger=LOGGER, return_on_error={})
def get_command_config(command_name, data_dir=None):
    return Config(data_dir=data_dir).get_command(command_name=command_name)


def new_log_prefix(name: str) -> str:
    return f"{Fore.CYAN}{name}{Fore.RESET}({shortuuid.uuid()[:5]})"


def colored_status(status: str) -> str:
    if status == OPTIMAL_STR:
        return f"{Fore.GREEN}{status}{Fore.RESET}"
    elif status == INACCURATE_STR:
        return f"{Fore.YELLOW}{status}{Fore.RESET}"
    elif status in (INFEASIBLE_STR, UNBOUNDED_STR):
        return f"{Fore.RED}{status}{Fore.RESET}"
    return status


def run_in_pool(func: Callable[..., Any], items: Sequence[Any], jobs: Optional[int], log_prefix: str) -> List[Any]:
    """
    Run `func(item)` for every item on a thread pool and return the results in input order.

    Failed items are logged and come back as None.
    """
    results: List[Any] = [None] * len(items)
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        futures = {executor.submit(func, item): index for index, item in enumerate(items)}

        for result in as_completed(futures):
            index = futures[result]
            if result.exception():
                LOGGER.error(f"{log_prefix} item {index} failed: {result.exception()}")
                continue
            results[index] = result.result()

    LOGGER.info(f"{log_prefix} finished {len(items)} items")
    return results


def to_fraction(value: Any) -> Fraction:
    """Convert ints, rationals, 'p/q' strings, floats and sympy numbers to an exact Fraction."""
    if isinstance(value, Fraction):
        return value

    if isinstance(value, bool):
        raise TypeError(f"Cannot convert boolean {value} to a rational")

    if isinstance(value, (Integral, np.integer)):
        return Fraction(int(value))

    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))

    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)

    if isinstance(value, str):
        return Fraction(value.strip())

    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            raise ValueError(f"Cannot convert non-finite value {value} to a rational")
        return Fraction(float(value))

    raise TypeError(f"Cannot convert {value!r} to a rational")


def is_exact_scalar(value: Any) -> bool:
    return isinstance(value, (Fraction, Integral, np.integer, sympy.Rational)) and not isinstance(value, bool)


def to_sympy_rational(value: Any) -> sympy.Rational:
    fraction = to_fraction(value)
    return sympy.Rational(fraction.numerator, fraction.denominator)


def to_sympy_matrix(rows: Sequence[Sequence[Any]]) -> sympy.Matrix:
    return sympy.Matrix([[to_sympy_rational(val) for val in row] for row in rows])


def sympy_vector_to_fractions(vector: sympy.Matrix) -> List[Fraction]:
    return [to_fraction(val) for val in vector]


def rational_nullspace(rows: Sequence[Sequence[Any]]) -> List[List[Fraction]]:
    if not rows or not rows[0]:
        return []

    return [sympy_vector_to_fractions(vector) for vector in to_sympy_matrix(rows).nullspace()]


def rational_columnspace(rows: Sequence[Sequence[Any]]) -> List[List[Fraction]]:
    if not rows or not rows[0]:
        return []

    return [sympy_vector_to_fractions(vector) for vector in to_sympy_matrix(rows).columnspace()]


def solve_rational_system(lhs: Sequence[Sequence[Any]], rhs: Sequence[Any]) -> Optional[List[Fraction]]:
    """
    Solve lhs @ x = rhs exactly.

    Returns None when the system has no solution or more than one.
    """
    matrix = to_sympy_matrix(lhs)
    vector = to_sympy_matrix([[val] for val in rhs])
    try:
        solution, params = matrix.gauss_jordan_solve(vector)
    except ValueError:
        return None

    if params.shape[0]:
        return None

    return sympy_vector_to_fractions(solution)


def bitsize(value: int) -> int:
    """Number of bits of a positive integer, bit(1) == 1."""
    if value < 1:
        raise ValueError(f"bitsize is defined for positive integers, got {value}")
    return int(value).bit_length()
