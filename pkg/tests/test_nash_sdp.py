import numpy as np
import pytest

from polycert.libs.games import BimatrixGame, GameFormatError, normalize_game, random_zero_sum_game
from polycert.libs.nash_sdp import (
    NashSdpSolution,
    RankError,
    build_sdp2,
    check_valid_inequalities,
    complete_rank2,
    epsilon_bounds,
    epsilon_table,
    lasserre1_bound,
    lift_m_prime,
    nash_benchmark,
    rank_one_lift,
    recover_rank2,
    sdp2_objective_bound,
    solve_rank_lowering,
    strategy_exclusion,
    surrogate_value,
    welfare_bound,
    welfare_objective,
)
from polycert.utils.constants import (
    DIAGONAL_GAP_STR,
    EXACT_STR,
    FIVE_ELEVENTHS_STR,
    INCONCLUSIVE_STR,
    LP1_STR,
    LP2_STR,
    ONE_THIRD_SYMMETRIC_STR,
    PERSISTENT_CERTIFIED_STR,
    SDP3_STR,
    SDP4_STR,
    SQUARE_ROOT_STR,
    TRACE_STR,
)

E1, E2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])


@pytest.fixture
def column_game():
    # the row player is indifferent, the column player always prefers column 1
    return BimatrixGame(A=np.zeros((2, 2)), B=np.array([[0.0, 1.0], [0.0, 1.0]]))


@pytest.fixture
def diagonal_solution(column_game):
    M = complete_rank2(sigma=[0.5, 0.5], a=[E1, E2], b=[E1, E2])
    return NashSdpSolution(game=column_game, M=M)


def _assert_monotone(trace, slack):
    surrogates = [record.surrogate for record in trace]
    assert all(later <= earlier + slack for earlier, later in zip(surrogates, surrogates[1:]))


def test_solution_blocks(diagonal_solution):
    assert diagonal_solution.P == pytest.approx(np.diag([0.5, 0.5]))
    assert diagonal_solution.x == pytest.approx([0.5, 0.5])
    assert diagonal_solution.y == pytest.approx([0.5, 0.5])
    assert diagonal_solution.numerical_rank() == 2
    assert diagonal_solution.diagonal_gap() == pytest.approx(0.25)


def test_rank_one_lift_has_no_diagonal_gap():
    sol = NashSdpSolution(game=normalize_game(A=np.eye(2), B=np.eye(2)), M=rank_one_lift(x=[0.25, 0.75], y=E1))
    assert sol.diagonal_gap() == pytest.approx(0.0)
    assert sol.rank_ratio() == pytest.approx(0.0, abs=1e-12)
    assert surrogate_value(solution=sol, objective=DIAGONAL_GAP_STR) == pytest.approx(0.0, abs=1e-12)
    assert all(value <= 1e-12 for value in check_valid_inequalities(sol).values())


def test_gap_matrix_identity(diagonal_solution):
    spectral = diagonal_solution.spectral()
    assert spectral.partition_gap(tol=1e-9) == pytest.approx(0.0, abs=1e-9)
    expected = diagonal_solution.P - np.outer(diagonal_solution.x, diagonal_solution.y)
    assert spectral.reconstruct_gap_matrix() == pytest.approx(expected, abs=1e-9)


def test_lift_m_prime():
    M = rank_one_lift(x=E1, y=E2)
    lifted = lift_m_prime(M)
    assert lifted.shape == (5, 5)
    assert lifted[-1, -1] == 1
    assert lifted[:4, -1] == pytest.approx([1.0, 0.0, 0.0, 1.0])


def test_epsilon_bounds_of_hand_solution(diagonal_solution):
    bounds = epsilon_bounds(diagonal_solution)
    assert bounds.p_rank == 2
    assert bounds.nnr_bound == pytest.approx(0.5)
    assert bounds.l1_bound == pytest.approx(0.5)
    assert bounds.gap_bound == pytest.approx(1.5)
    assert bounds.eig_bound == pytest.approx(2.0)
    assert bounds.minimum() == pytest.approx(0.5)


def test_recovery_mixes_column_best_response(column_game, diagonal_solution):
    result = recover_rank2(game=column_game, sol=diagonal_solution)
    assert result.case == "mixed-column"
    assert result.guarantee == FIVE_ELEVENTHS_STR
    assert result.y == pytest.approx([1 / 3, 2 / 3])
    assert result.report.epsilon == pytest.approx(1 / 3)
    assert len(result.factors) == 2


def test_symmetric_recovery_uses_factor():
    A = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
    game = BimatrixGame(A=A, B=A.T.copy())
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    sol = NashSdpSolution(game=game, M=complete_rank2(sigma=[0.5, 0.5], a=[e1, e2], b=[e1, e2]))
    result = recover_rank2(game=game, sol=sol, symmetric_mode=True)
    assert result.case == "factor"
    assert result.guarantee == ONE_THIRD_SYMMETRIC_STR
    assert result.report.epsilon == pytest.approx(0.0, abs=1e-9)
    assert np.array_equal(result.x, result.y)


def test_rank_one_recovery_is_exact(matching_pennies):
    sol = NashSdpSolution(game=matching_pennies, M=rank_one_lift(x=[0.5, 0.5], y=[0.5, 0.5]))
    result = recover_rank2(game=matching_pennies, sol=sol)
    assert result.guarantee == EXACT_STR
    assert result.case == "rank-one"
    assert result.report.epsilon == pytest.approx(0.0)


def test_recovery_rejects_rank_three():
    game = normalize_game(A=np.eye(3), B=np.eye(3))
    basis = list(np.eye(3))
    sol = NashSdpSolution(game=game, M=complete_rank2(sigma=[1 / 3] * 3, a=basis, b=basis))
    with pytest.raises(RankError):
        recover_rank2(game=game, sol=sol)


def test_build_sdp2_psd_p_needs_square_game():
    with pytest.raises(GameFormatError):
        build_sdp2(game=normalize_game(A=np.ones((2, 3)), B=np.ones((2, 3))), with_psd_P=True)


def test_trace_objective_on_zero_sum_game_is_rank_one():
    game = random_zero_sum_game(m=3, n=3, seed=0)
    run = solve_rank_lowering(game=game, objective=TRACE_STR)
    assert len(run.trace) == 1
    assert run.report.epsilon <= 1e-4
    assert run.solution.rank_ratio() <= 1e-4


def test_diagonal_gap_on_random_games(seeded_games):
    epsilons = []
    for game in seeded_games:
        run = solve_rank_lowering(game=game, objective=DIAGONAL_GAP_STR, iters=10)
        _assert_monotone(trace=run.trace, slack=1e-6)
        bounds = epsilon_bounds(run.solution)
        assert run.report.epsilon <= bounds.minimum() + 1e-4
        epsilons.append(run.report.epsilon)
    assert np.mean(epsilons) <= 0.1


def test_square_root_surrogate_decreases(seeded_games):
    run = solve_rank_lowering(game=seeded_games[0], objective=SQUARE_ROOT_STR, iters=5)
    _assert_monotone(trace=run.trace, slack=1e-3)
    assert run.report.epsilon == min(record.epsilon for record in run.trace)


def test_rank_lowering_arguments(matching_pennies):
    with pytest.raises(ValueError):
        solve_rank_lowering(game=matching_pennies, objective="nuclear")
    with pytest.raises(ValueError):
        solve_rank_lowering(game=matching_pennies, iters=0)


@pytest.mark.parametrize("method", [LP1_STR, SDP3_STR])
def test_welfare_bound_of_prisoners_dilemma(prisoners_dilemma, method):
    bound = welfare_bound(game=prisoners_dilemma, method=method)
    assert bound.value == pytest.approx(0.2, abs=1e-6)
    assert bound.doubled == pytest.approx(0.4, abs=1e-6)


def test_welfare_bound_of_coordination_game(coordination_game):
    assert welfare_bound(game=coordination_game, method=SDP3_STR).value == pytest.approx(1.0, abs=1e-6)


def test_welfare_bound_arguments(prisoners_dilemma):
    with pytest.raises(ValueError):
        welfare_bound(game=prisoners_dilemma, method=LP2_STR)


@pytest.mark.parametrize("method", [LP2_STR, SDP4_STR])
def test_strategy_exclusion(prisoners_dilemma, method):
    defect = strategy_exclusion(game=prisoners_dilemma, strategies=[1], method=method)
    assert defect.verdict == PERSISTENT_CERTIFIED_STR
    assert defect.persistent
    cooperate = strategy_exclusion(game=prisoners_dilemma, strategies=[0], method=method)
    assert cooperate.verdict == INCONCLUSIVE_STR
    assert cooperate.value == pytest.approx(0.0, abs=1e-6)


def test_strategy_exclusion_arguments(prisoners_dilemma):
    with pytest.raises(ValueError):
        strategy_exclusion(game=prisoners_dilemma, strategies=[], method=SDP4_STR)
    with pytest.raises(ValueError):
        strategy_exclusion(game=prisoners_dilemma, strategies=[2], method=SDP4_STR)
    with pytest.raises(ValueError):
        strategy_exclusion(game=prisoners_dilemma, strategies=[0], method=SDP3_STR)


def test_lasserre_is_weaker_than_sdp2(seeded_games):
    game = seeded_games[0]
    G = np.random.default_rng(3).standard_normal((game.m + game.n + 1, 3))
    C = G @ G.T
    lasserre = lasserre1_bound(game=game, C=C)
    sdp2 = sdp2_objective_bound(game=game, C=C)
    assert lasserre.value <= sdp2.value + 1e-6


def test_lasserre_welfare_objective_on_positive_game():
    rng = np.random.default_rng(0)
    game = BimatrixGame(A=rng.uniform(1, 2, size=(2, 2)), B=rng.uniform(1, 2, size=(2, 2)))
    C = welfare_objective(game)
    assert C == pytest.approx(C.T)
    assert lasserre1_bound(game=game, C=C).value == -float("inf")


def test_objective_shape_checked(matching_pennies):
    with pytest.raises(GameFormatError):
        lasserre1_bound(game=matching_pennies, C=np.eye(4))
    with pytest.raises(GameFormatError):
        sdp2_objective_bound(game=matching_pennies, C=np.triu(np.ones((5, 5))))


def test_epsilon_table():
    assert epsilon_table([1.0, 2.0, 3.0]) == {"Max": 3.0, "Mean": 2.0, "Median": 2.0, "StDev": 1.0}
    assert epsilon_table([0.5])["StDev"] == 0.0
    with pytest.raises(ValueError):
        epsilon_table([])


def test_nash_benchmark_rows():
    rows = nash_benchmark(sizes=[2], count=2, seed=0, objective=TRACE_STR, iters=1, jobs=1)
    assert len(rows) == 1
    row = rows[0]
    assert row["size"] == "2x2"
    assert row["algorithm"] == TRACE_STR
    assert row["count"] == 2
    assert set(row) == {"size", "algorithm", "count", "Max", "Mean", "Median", "StDev"}
