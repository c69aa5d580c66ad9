from fractions import Fraction

import numpy as np
import pytest

from polycert.libs.games import (
    BimatrixGame,
    EnumerationLimitError,
    GameFormatError,
    Normalization,
    NotSymmetricGameError,
    check_simplex,
    enumerate_nash_small,
    epsilon_of,
    normalize_game,
    persistent_sets,
    random_game,
    random_strictly_competitive_game,
    random_symmetric_game,
    random_zero_sum_game,
    strictly_competitive_scalars,
    symmetric_equilibria,
    symmetrize,
    to_simplex,
)
from polycert.utils.constants import GRIESMER_STR, JURG_STR

HALF = Fraction(1, 2)


def _profiles(enumeration):
    return {(eq.x, eq.y) for eq in enumeration.equilibria}


def test_normalize_game_maps_each_player_onto_unit_interval():
    A = np.arange(-5, 6).reshape(1, 11)
    game = normalize_game(A=A, B=2 * A)
    assert game.A == pytest.approx((A + 5) / 10)
    assert game.B == pytest.approx((A + 5) / 10)
    assert game.normalization.c == pytest.approx(0.1)
    assert game.raw_b() == pytest.approx(2 * A)


def test_constant_payoffs_are_only_shifted():
    game = normalize_game(A=[[3, 3]], B=[[0, 0]])
    assert game.A.tolist() == [[0.0, 0.0]]
    assert game.normalization.c == 1.0
    assert game.raw_a().tolist() == [[3.0, 3.0]]


@pytest.mark.parametrize(
    "data",
    [
        {"A": [[1]]},
        {"A": [[1, "x"]], "B": [[1, 2]]},
        {"A": [[1, 2]], "B": [[1], [2]]},
        {"A": [], "B": []},
        {"A": [[1, float("inf")]], "B": [[1, 2]]},
        [[1, 2]],
    ],
)
def test_malformed_game_json(data):
    with pytest.raises(GameFormatError):
        BimatrixGame.from_json(data)


def test_normalization_scales_must_be_positive():
    with pytest.raises(GameFormatError):
        Normalization(c=0.0)


def test_random_games():
    game = random_game(m=2, n=3, seed=7)
    assert game.A.shape == (2, 3)
    assert game.normalization.is_identity
    assert np.array_equal(game.A, random_game(m=2, n=3, seed=7).A)
    symmetric = random_symmetric_game(n=4, seed=1)
    assert symmetric.is_symmetric()
    assert np.all(np.diag(symmetric.A) <= 0.5)


def test_strictly_competitive_detection(prisoners_dilemma):
    assert strictly_competitive_scalars(random_zero_sum_game(m=3, n=4, seed=0)) is not None
    c, d, e, f = strictly_competitive_scalars(random_strictly_competitive_game(m=3, n=3, seed=2))
    assert c > 0 and e > 0
    assert strictly_competitive_scalars(prisoners_dilemma) is None


def test_epsilon_of_matching_pennies(matching_pennies):
    assert epsilon_of(game=matching_pennies, x=[0.5, 0.5], y=[0.5, 0.5]).epsilon == pytest.approx(0.0)
    report = epsilon_of(game=matching_pennies, x=[1, 0], y=[1, 0])
    assert report.eps_a == pytest.approx(0.0)
    assert report.eps_b == pytest.approx(1.0)
    assert report.best_response_b == 1


def test_epsilon_of_rejects_non_distributions(matching_pennies):
    with pytest.raises(GameFormatError):
        epsilon_of(game=matching_pennies, x=[0.5, 0.6], y=[0.5, 0.5])
    with pytest.raises(GameFormatError):
        epsilon_of(game=matching_pennies, x=[1.0], y=[0.5, 0.5])
    with pytest.raises(GameFormatError):
        check_simplex(vector=[1.5, -0.5], size=2, name="x")


def test_to_simplex_clips_and_renormalizes():
    assert to_simplex([0.5, -1e-9, 0.5]) == pytest.approx([0.5, 0.0, 0.5])
    with pytest.raises(GameFormatError):
        to_simplex([0.0, -1.0])


def test_prisoners_dilemma_has_unique_equilibrium(prisoners_dilemma):
    enumeration = enumerate_nash_small(game=prisoners_dilemma)
    assert _profiles(enumeration) == {((0, 1), (0, 1))}
    assert not enumeration.degenerate


def test_matching_pennies_mixed_equilibrium(matching_pennies):
    enumeration = enumerate_nash_small(game=matching_pennies)
    assert _profiles(enumeration) == {((HALF, HALF), (HALF, HALF))}
    assert enumeration.to_json()["equilibria"] == [{"x": ["1/2", "1/2"], "y": ["1/2", "1/2"]}]


def test_coordination_game_equilibria(coordination_game):
    enumeration = enumerate_nash_small(game=coordination_game)
    assert _profiles(enumeration) == {((1, 0), (1, 0)), ((0, 1), (0, 1)), ((HALF, HALF), (HALF, HALF))}


def test_enumeration_finds_equilibria_of_random_games(seeded_games):
    for game in seeded_games:
        for eq in enumerate_nash_small(game=game).equilibria:
            x, y = eq.as_floats()
            assert epsilon_of(game=game, x=x, y=y).epsilon <= 1e-9


def test_zero_game_is_degenerate():
    enumeration = enumerate_nash_small(game=normalize_game(A=np.zeros((2, 2)), B=np.zeros((2, 2))))
    assert enumeration.degenerate
    assert len(enumeration.equilibria) == 4


def test_enumeration_size_caps():
    game = random_game(m=6, n=6, seed=0)
    with pytest.raises(EnumerationLimitError):
        enumerate_nash_small(game=game)
    with pytest.raises(EnumerationLimitError):
        enumerate_nash_small(game=game, max_support=4)
    assert enumerate_nash_small(game=game, max_support=1).max_support == 1


def test_symmetric_equilibria_and_persistent_sets(prisoners_dilemma, coordination_game):
    assert [eq.x for eq in symmetric_equilibria(game=prisoners_dilemma)] == [(0, 1)]
    assert persistent_sets(game=prisoners_dilemma) == [(1,)]
    assert persistent_sets(game=coordination_game) == []
    assert persistent_sets(game=coordination_game, size=2) == [(0, 1)]


def test_symmetric_helpers_need_symmetric_game(matching_pennies):
    with pytest.raises(NotSymmetricGameError):
        symmetric_equilibria(game=matching_pennies)


def test_griesmer_counterexample():
    eps = 0.1
    game = normalize_game(A=[[eps, 0], [1, 1]], B=[[eps**2, 0], [0, 1]])
    sym = symmetrize(game=game, method=GRIESMER_STR, shift=False)
    z = np.array([1 / (1 + eps), 0, eps / (1 + eps), 0])
    assert epsilon_of(game=sym.game, x=z, y=z).epsilon == pytest.approx(eps * (1 - eps) / (1 + eps))
    x, y = sym.pullback(z)
    assert epsilon_of(game=game, x=x, y=y).epsilon == pytest.approx(1 - eps)


def test_jurg_counterexample():
    eps = 0.2
    game = normalize_game(A=[[0, 0], [0, 1]], B=[[-1, 0], [-1, 0]])
    sym = symmetrize(game=game, method=JURG_STR, shift=False)
    assert sym.game.A.shape == (5, 5)
    z = np.array([eps, 0, 1 - eps, 0, 0])
    assert epsilon_of(game=sym.game, x=z, y=z).epsilon == pytest.approx(eps * (1 - eps) / 2)
    x, y = sym.pullback(z)
    assert epsilon_of(game=game, x=x, y=y).epsilon == pytest.approx(1.0)


@pytest.mark.parametrize("method", [GRIESMER_STR, JURG_STR])
def test_push_forward_keeps_equilibria(matching_pennies, method):
    sym = symmetrize(game=matching_pennies, method=method)
    assert sym.game.is_symmetric()
    z = sym.push_forward(x=[0.5, 0.5], y=[0.5, 0.5])
    assert z.sum() == pytest.approx(1.0)
    assert epsilon_of(game=sym.game, x=z, y=z).epsilon == pytest.approx(0.0, abs=1e-12)
    x, y = sym.pullback(z)
    assert x == pytest.approx([0.5, 0.5])
    assert y == pytest.approx([0.5, 0.5])


def test_symmetrize_rejects_unknown_method(matching_pennies):
    with pytest.raises(ValueError):
        symmetrize(game=matching_pennies, method="lemke")


def test_pullback_needs_mass_on_both_blocks(matching_pennies):
    sym = symmetrize(game=matching_pennies, method=GRIESMER_STR)
    with pytest.raises(GameFormatError):
        sym.pullback([0.5, 0.5, 0, 0])
