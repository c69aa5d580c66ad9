from fractions import Fraction

import pytest
import yaml

from polycert.libs.games import normalize_game, random_game
from polycert.libs.polynomial import Polynomial


def poly(nvars, terms):
    """Build a polynomial from {exps: coeff} with string or int coefficients."""
    return Polynomial(nvars, {tuple(exps): Fraction(coeff) for exps, coeff in terms.items()})


@pytest.fixture
def x1_squared_x2():
    return poly(2, {(2, 1): 1})


@pytest.fixture
def x2_squared_minus_x1_squared_x2():
    return poly(2, {(0, 2): 1, (2, 1): -1})


@pytest.fixture
def cubic_with_root_two():
    # x³ − 6x, local minimum at √2
    return poly(1, {(3,): 1, (1,): -6})


@pytest.fixture
def pure_cube():
    return poly(1, {(3,): 1})


@pytest.fixture
def quartic_not_toc():
    return poly(2, {(4, 0): 2, (2, 1): 2, (0, 2): 1})


@pytest.fixture
def prisoners_dilemma():
    A = [[3, 0], [5, 1]]
    return normalize_game(A=A, B=[list(row) for row in zip(*A)])


@pytest.fixture
def matching_pennies():
    return normalize_game(A=[[1, -1], [-1, 1]], B=[[-1, 1], [1, -1]])


@pytest.fixture
def coordination_game():
    return normalize_game(A=[[1, 0], [0, 1]], B=[[1, 0], [0, 1]])


@pytest.fixture
def seeded_games():
    return [random_game(m=5, n=5, seed=seed) for seed in range(5)]


@pytest.fixture
def config_dir(tmp_path, monkeypatch):
    data = {
        "tol": 1e-7,
        "iters": 5,
        "commands": {"nash-solve": {"iters": 3}, "classify": {"tol": 1e-9}},
    }
    (tmp_path / "config.yaml").write_text(yaml.safe_dump(data))
    monkeypatch.setenv("POLYCERT_DATA_DIR", str(tmp_path))
    return tmp_path
