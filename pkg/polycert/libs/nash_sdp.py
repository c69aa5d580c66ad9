"""
Semidefinite relaxation of Nash equilibria in bimatrix games.

The relaxation works on M = [[X, P], [Pᵀ, Y]] ⪰ 0, M ≥ 0, where P is a correlated equilibrium whose
marginals x = P1, y = Pᵀ1 are reported as the strategy pair. Rank-one solutions are exact equilibria; the
rank-lowering iterations push M toward rank one and the ε bounds quantify how far a solution is from it.
"""

import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence

import cvxpy as cp
import numpy as np

from polycert.libs.conic import ConicProgram, SolveOutcome, SolverInaccurateError, SolveStatus, solve
from polycert.libs.games import (
    BimatrixGame,
    EpsilonReport,
    GameFormatError,
    epsilon_of,
    random_game,
    to_simplex,
)
from polycert.utils.constants import (
    DEFAULT_ITERS,
    DEFAULT_TOL,
    DIAGONAL_GAP_STR,
    EXACT_STR,
    FIVE_ELEVENTHS_STR,
    GUARANTEE_VALUES,
    INCONCLUSIVE_STR,
    LOGGER,
    LP1_STR,
    LP2_STR,
    MEASURED_ONLY_STR,
    ONE_THIRD_SYMMETRIC_STR,
    PERSISTENT_CERTIFIED_STR,
    RANK_LOWERING_OBJECTIVES,
    RANK_ONE_THRESHOLD,
    RANK_TWO_THRESHOLD,
    RECOVERY_CASE_THRESHOLD,
    RESIDUAL_FACTOR,
    SDP3_STR,
    SDP4_STR,
    SQRT_WEIGHT_GUARD,
    SQUARE_ROOT_STR,
    TRACE_STR,
)
from polycert.utils.helpers import colored_status, new_log_prefix, run_in_pool

WELFARE_METHODS = (LP1_STR, SDP3_STR)
EXCLUSION_METHODS = (LP2_STR, SDP4_STR)
FACTORIZATION_TOL = 1e-6


class RankError(Exception):
    pass


@dataclass(frozen=True)
class Spectral:
    """Eigenpairs of M in decreasing order, eigenvectors split as [a_i; b_i] with s_i = 1ᵀa_i."""

    eigenvalues: np.ndarray
    a: np.ndarray
    b: np.ndarray
    s: np.ndarray

    def partition_gap(self, tol: float) -> float:
        """max |1ᵀa_i − 1ᵀb_i| over eigenpairs with λ_i > tol."""
        active = self.eigenvalues > tol
        if not np.any(active):
            return 0.0
        return float(np.max(np.abs(self.a[:, active].sum(axis=0) - self.b[:, active].sum(axis=0))))

    def reconstruct_gap_matrix(self) -> np.ndarray:
        """P − xyᵀ as Σ_{i<j} λ_iλ_j (s_j a_i − s_i a_j)(s_j b_i − s_i b_j)ᵀ."""
        result = np.zeros((self.a.shape[0], self.b.shape[0]))
        lam, a, b, s = self.eigenvalues, self.a, self.b, self.s
        for i, j in itertools.combinations(range(len(lam)), 2):
            result += lam[i] * lam[j] * np.outer(s[j] * a[:, i] - s[i] * a[:, j], s[j] * b[:, i] - s[i] * b[:, j])
        return result


@dataclass(frozen=True)
class NashSdpSolution:
    game: BimatrixGame
    M: np.ndarray
    tol: float = DEFAULT_TOL

    @property
    def m(self) -> int:
        return self.game.m

    @property
    def n(self) -> int:
        return self.game.n

    @property
    def X(self) -> np.ndarray:
        return self.M[: self.m, : self.m]

    @property
    def P(self) -> np.ndarray:
        return self.M[: self.m, self.m :]

    @property
    def Y(self) -> np.ndarray:
        return self.M[self.m :, self.m :]

    @property
    def x(self) -> np.ndarray:
        return self.P.sum(axis=1)

    @property
    def y(self) -> np.ndarray:
        return self.P.sum(axis=0)

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    def strategies(self) -> tuple:
        return to_simplex(self.x), to_simplex(self.y)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.M)[::-1]

    def spectral(self) -> Spectral:
        values, vectors = np.linalg.eigh(self.M)
        values, vectors = values[::-1], vectors[:, ::-1]
        a, b = vectors[: self.m, :], vectors[self.m :, :]
        return Spectral(eigenvalues=values, a=a, b=b, s=a.sum(axis=0))

    def rank_ratio(self, k: int = 1) -> float:
        """λ_{k+1}/λ_1, zero for a vanishing M."""
        values = np.clip(self.eigenvalues(), 0.0, None)
        if values[0] <= 0 or k >= len(values):
            return 0.0
        return float(values[k] / values[0])

    def numerical_rank(self, threshold: float = RANK_ONE_THRESHOLD) -> int:
        return _numerical_rank(values=self.eigenvalues(), threshold=threshold)

    def diagonal_gap(self) -> float:
        """max_i |M_ii − z_i²|, zero exactly for rank-one solutions."""
        return float(np.max(np.abs(np.diag(self.M) - self.z**2)))

    def to_json(self) -> Dict[str, Any]:
        x, y = self.strategies()
        return {
            "M": self.M.tolist(),
            "x": x.tolist(),
            "y": y.tolist(),
            "eigenvalues": self.eigenvalues().tolist(),
            "tol": self.tol,
        }


def _numerical_rank(values: np.ndarray, threshold: float) -> int:
    values = np.clip(np.asarray(values, dtype=float), 0.0, None)
    if not values.size or values.max() <= 0:
        return 0
    return int(np.sum(values > threshold * values.max()))


def rank_one_lift(x: Any, y: Any) -> np.ndarray:
    v = np.concatenate([np.asarray(x, dtype=float), np.asarray(y, dtype=float)])
    return np.outer(v, v)


def complete_rank2(sigma: Sequence[float], a: Sequence[Any], b: Sequence[Any]) -> np.ndarray:
    """M = Σ σ_i [a_i; b_i][a_i; b_i]ᵀ from a rank-two factorization of a correlated equilibrium."""
    return sum(weight * rank_one_lift(x=a_i, y=b_i) for weight, a_i, b_i in zip(sigma, a, b))


def lift_m_prime(M: np.ndarray) -> np.ndarray:
    """M′ = [[M, M1/2], [1ᵀM/2, 1]]."""
    column = M.sum(axis=1) / 2
    return np.block([[M, column[:, None]], [column[None, :], np.ones((1, 1))]])


def _blocks(M: cp.Variable, m: int) -> tuple:
    return M[:m, :m], M[:m, m:], M[m:, m:]


def build_sdp2(game: BimatrixGame, with_psd_P: bool = False) -> ConicProgram:
    """
    Feasibility program over the symmetric variable "M".

    Constraints: M ⪰ 0, M ≥ 0, 1ᵀP1 = 1, X1 = P1, Y1 = Pᵀ1 and the correlated equilibrium inequalities of
    both players. The McCormick bounds and the unit mass of X and Y follow from these and are left out;
    `check_valid_inequalities` reports them. `with_psd_P` (square games) adds P = Pᵀ, X = Y and P ⪰ 0.
    """
    m, n = game.m, game.n
    prog = ConicProgram(name="sdp2")
    M = prog.symmetric(name="M", size=m + n)
    X, P, Y = _blocks(M=M, m=m)
    prog.add_psd(M)
    prog.add_nonnegative(M)
    prog.add(
        cp.sum(P) == 1,
        cp.sum(X, axis=1) == cp.sum(P, axis=1),
        cp.sum(Y, axis=1) == cp.sum(P, axis=0),
    )
    for row in range(m):
        prog.add(game.A @ P[row, :] <= game.A[row, :] @ P[row, :])
    for col in range(n):
        prog.add(game.B.T @ P[:, col] <= game.B[:, col] @ P[:, col])

    if with_psd_P:
        if m != n:
            raise GameFormatError(f"P ⪰ 0 needs a square game, got {m}x{n}")
        prog.add(P == P.T, X == Y)
        prog.add_psd(P)
    return prog


def _solution(game: BimatrixGame, outcome: SolveOutcome, tol: float) -> NashSdpSolution:
    M = np.asarray(outcome.assignment["M"], dtype=float)
    return NashSdpSolution(game=game, M=(M + M.T) / 2, tol=tol)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    status: str
    objective: Optional[float]
    surrogate: float
    epsilon: float
    rank_ratio: float

    def to_json(self) -> Dict[str, Any]:
        return {
            "iteration": self.iteration,
            "status": self.status,
            "objective": self.objective,
            "surrogate": self.surrogate,
            "epsilon": self.epsilon,
            "rank_ratio": self.rank_ratio,
        }


class RankLoweringRun(NamedTuple):
    solution: NashSdpSolution
    report: EpsilonReport
    trace: List[IterationRecord]


def surrogate_value(solution: NashSdpSolution, objective: str) -> float:
    """Σ√M_ii for square_root, Tr(M) − ‖x‖² − ‖y‖² for diagonal_gap, Tr(M) for trace."""
    diagonal = np.clip(np.diag(solution.M), 0.0, None)
    if objective == SQUARE_ROOT_STR:
        return float(np.sum(np.sqrt(diagonal)))
    if objective == DIAGONAL_GAP_STR:
        return float(np.trace(solution.M) - solution.z @ solution.z)
    return float(np.trace(solution.M))


def _rank_lowering_objective(
    M: cp.Variable, m: int, objective: str, previous: Optional[NashSdpSolution]
) -> cp.Objective:
    if previous is None or objective == TRACE_STR:
        return cp.Minimize(cp.trace(M))

    if objective == SQUARE_ROOT_STR:
        weights = 1 / np.sqrt(np.maximum(np.diag(previous.M), SQRT_WEIGHT_GUARD))
        return cp.Minimize(weights @ cp.diag(M))

    _, P, _ = _blocks(M=M, m=m)
    z = cp.hstack([cp.sum(P, axis=1), cp.sum(P, axis=0)])
    return cp.Minimize(cp.trace(M) - 2 * previous.z @ z)


def solve_rank_lowering(
    game: BimatrixGame,
    objective: str = DIAGONAL_GAP_STR,
    iters: int = DEFAULT_ITERS,
    tol: float = DEFAULT_TOL,
    solver: Optional[str] = None,
    log_prefix: str = "",
) -> RankLoweringRun:
    """
    Solve SDP2 under a rank-lowering objective.

    trace solves once. square_root re-weights the diagonal by 1/√M_ii of the previous iterate and
    diagonal_gap linearizes −‖z‖² at the previous z; both start from the trace objective. Iterations stop
    once M is numerically rank one. An Inaccurate iteration ends the run with the best iterate so far.
    """
    if objective not in RANK_LOWERING_OBJECTIVES:
        raise ValueError(f"Unknown objective {objective!r}, expected one of {RANK_LOWERING_OBJECTIVES}")
    if iters < 1:
        raise ValueError(f"iters must be at least 1, got {iters}")

    log_prefix = log_prefix or new_log_prefix(name=objective)
    prog = build_sdp2(game=game)
    M = prog.variables["M"]
    trace: List[IterationRecord] = []
    previous: Optional[NashSdpSolution] = None
    best: Optional[RankLoweringRun] = None
    total = 1 if objective == TRACE_STR else iters
    for iteration in range(1, total + 1):
        outcome = solve(
            prog=prog,
            tol=tol,
            objective=_rank_lowering_objective(M=M, m=game.m, objective=objective, previous=previous),
            solver=solver,
        )
        LOGGER.debug(f"{log_prefix} iteration {iteration}: {colored_status(outcome.status.value)}")
        usable = outcome.is_optimal or (best is None and outcome.loosely_feasible)
        if not usable:
            if best is None:
                raise SolverInaccurateError(f"{log_prefix} first iteration failed: {outcome.message}")
            LOGGER.warning(f"{log_prefix} stopping at iteration {iteration}: {outcome.status.value}")
            break

        current = _solution(game=game, outcome=outcome, tol=tol)
        x, y = current.strategies()
        report = epsilon_of(game=game, x=x, y=y)
        trace.append(
            IterationRecord(
                iteration=iteration,
                status=outcome.status.value,
                objective=outcome.value,
                surrogate=surrogate_value(solution=current, objective=objective),
                epsilon=report.epsilon,
                rank_ratio=current.rank_ratio(),
            )
        )
        if best is None or report.epsilon <= best.report.epsilon:
            best = RankLoweringRun(solution=current, report=report, trace=trace)

        previous = current
        if not outcome.is_optimal:
            LOGGER.warning(f"{log_prefix} continuing no further from a loosely feasible first iterate")
            break
        if current.rank_ratio() <= RANK_ONE_THRESHOLD:
            LOGGER.debug(f"{log_prefix} rank one after {iteration} iterations")
            break

    LOGGER.info(f"{log_prefix} {game.m}x{game.n} game: ε = {best.report.epsilon:.3e} after {len(trace)} iterations")
    return RankLoweringRun(solution=best.solution, report=best.report, trace=trace)


@dataclass(frozen=True)
class EpsilonBounds:
    eig_bound: float
    gap_bound: float
    nnr_bound: float
    l1_bound: float
    p_rank: int

    def minimum(self) -> float:
        return min(self.eig_bound, self.gap_bound, self.nnr_bound, self.l1_bound)

    def to_json(self) -> Dict[str, Any]:
        return {
            "eig_bound": self.eig_bound,
            "gap_bound": self.gap_bound,
            "nnr_bound": self.nnr_bound,
            "l1_bound": self.l1_bound,
            "p_rank": self.p_rank,
        }


def epsilon_bounds(sol: NashSdpSolution) -> EpsilonBounds:
    """
    Four upper bounds on ε of (x, y) = (P1, Pᵀ1).

    The nonnegative rank of P equals its rank up to two; beyond that min(m, n) is used, an upper bound
    that keeps 1 − 1/k valid.
    """
    size = sol.m + sol.n
    values = np.clip(sol.eigenvalues(), 0.0, None)
    x, y = sol.x, sol.y
    p_rank = _numerical_rank(values=np.linalg.svd(sol.P, compute_uv=False), threshold=RANK_TWO_THRESHOLD)
    k = p_rank if p_rank <= 2 else min(sol.m, sol.n)
    return EpsilonBounds(
        eig_bound=float(size / 2 * values[1:].sum()),
        gap_bound=float(max(0.0, 3 * size / 8 * (np.trace(sol.M) - x @ x - y @ y))),
        nnr_bound=float(1 - 1 / max(k, 1)),
        l1_bound=float(np.abs(sol.P - np.outer(x, y)).sum() / 2),
        p_rank=p_rank,
    )


def check_valid_inequalities(sol: NashSdpSolution) -> Dict[str, float]:
    """Largest violation of the McCormick bounds and of the unit mass of X, P and Y."""
    z, M = sol.z, sol.M
    return {
        "mccormick_upper": float(max(0.0, np.max(M - z[:, None]))),
        "mccormick_lower": float(max(0.0, np.max(z[:, None] + z[None, :] - M - 1))),
        "distribution": float(max(abs(block.sum() - 1) for block in (sol.X, sol.P, sol.Y))),
    }


@dataclass
class RecoveryResult:
    x: np.ndarray
    y: np.ndarray
    guarantee: str
    case: str
    report: EpsilonReport
    factors: List[Dict[str, Any]] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        return {
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "guarantee": self.guarantee,
            "case": self.case,
            "report": self.report.to_json(),
            "factors": self.factors,
        }


def _extreme_pair(vectors: np.ndarray) -> tuple:
    """Indices of the two extreme rays of a pointed cone spanned by 2-D vectors (rows)."""
    norms = np.linalg.norm(vectors, axis=1)
    live = np.flatnonzero(norms > FACTORIZATION_TOL * max(1.0, norms.max()))
    center = vectors[live].sum(axis=0)
    angles = np.arctan2(
        center[0] * vectors[live, 1] - center[1] * vectors[live, 0], vectors[live] @ center
    )
    return int(live[np.argmin(angles)]), int(live[np.argmax(angles)])


def nonnegative_rank2_factors(P: np.ndarray) -> tuple:
    """
    P = W H with W (m×2) and H (2×n) nonnegative, for a nonnegative P of rank two.

    The columns of P span a pointed 2-D cone; its two extreme columns become W and every column is a
    nonnegative combination of them.
    """
    U, _, _ = np.linalg.svd(P)
    coords = (U[:, :2].T @ P).T
    left, right = _extreme_pair(vectors=coords)
    W = P[:, [left, right]]
    H = np.linalg.lstsq(coords[[left, right]].T, coords.T, rcond=None)[0]
    if np.min(H) < -FACTORIZATION_TOL:
        raise RankError(f"Columns of P fall outside the cone of columns {left} and {right}")

    H = np.clip(H, 0.0, None)
    if np.max(np.abs(W @ H - P)) > FACTORIZATION_TOL * max(1.0, float(P.max())):
        raise RankError("Nonnegative rank-two factorization does not reproduce P")
    return W, H


def cp_rank2_factors(P: np.ndarray) -> np.ndarray:
    """
    Columns w_1, w_2 ≥ 0 with P = w_1w_1ᵀ + w_2w_2ᵀ, for a symmetric nonnegative PSD P of rank two.

    The Gram rows r_i of P lie within a right angle of each other; an orthonormal frame whose first axis is
    an extreme r_i keeps every coordinate nonnegative.
    """
    values, vectors = np.linalg.eigh((P + P.T) / 2)
    values, vectors = np.clip(values[::-1][:2], 0.0, None), vectors[:, ::-1][:, :2]
    rows = vectors * np.sqrt(values)
    first, last = _extreme_pair(vectors=rows)
    axis = rows[first] / np.linalg.norm(rows[first])
    normal = np.array([-axis[1], axis[0]])
    if rows[last] @ normal < 0:
        normal = -normal

    factors = rows @ np.column_stack([axis, normal])
    if np.min(factors) < -FACTORIZATION_TOL:
        raise RankError("P is not completely positive with two factors")

    factors = np.clip(factors, 0.0, None)
    if np.max(np.abs(factors @ factors.T - P)) > FACTORIZATION_TOL * max(1.0, float(P.max())):
        raise RankError("Completely positive rank-two factorization does not reproduce P")
    return factors


def _best_response_row(game: BimatrixGame, y: np.ndarray) -> np.ndarray:
    return np.eye(game.m)[int(np.argmax(game.A @ y))]


def _best_response_col(game: BimatrixGame, x: np.ndarray) -> np.ndarray:
    return np.eye(game.n)[int(np.argmax(x @ game.B))]


def _checked(result: RecoveryResult, tol: float) -> RecoveryResult:
    bound = GUARANTEE_VALUES[result.guarantee]
    if result.report.epsilon > bound + RESIDUAL_FACTOR * tol:
        LOGGER.warning(f"Recovered ε {result.report.epsilon:.3e} exceeds the {result.guarantee} guarantee")
        result.guarantee = MEASURED_ONLY_STR
    return result


def _recover_general(game: BimatrixGame, P: np.ndarray, tol: float) -> RecoveryResult:
    W, H = nonnegative_rank2_factors(P=P)
    mass_w, mass_h = W.sum(axis=0), H.sum(axis=1)
    a, b = W / mass_w, (H.T / mass_h).T
    factors = [
        {"sigma": float(mass_w[idx] * mass_h[idx]), "a": a[:, idx].tolist(), "b": b[idx].tolist()} for idx in range(2)
    ]
    x, y = to_simplex(P.sum(axis=1)), to_simplex(P.sum(axis=0))
    report = epsilon_of(game=game, x=x, y=y)
    eps_a, eps_b = report.eps_a, report.eps_b
    threshold = RECOVERY_CASE_THRESHOLD

    if eps_a <= threshold and eps_b <= threshold:
        case = "marginals"
    elif eps_a > threshold and eps_b > threshold:
        candidates = [(a[:, idx], b[idx]) for idx in range(2)]
        x, y = min(candidates, key=lambda pair: epsilon_of(game=game, x=pair[0], y=pair[1]).epsilon)
        case = "factor"
    elif eps_a <= threshold:
        weight = 1 / (1 + eps_b - eps_a)
        y = weight * y + (1 - weight) * _best_response_col(game=game, x=x)
        case = "mixed-column"
    else:
        weight = 1 / (1 + eps_a - eps_b)
        x = weight * x + (1 - weight) * _best_response_row(game=game, y=y)
        case = "mixed-row"

    result = RecoveryResult(
        x=x, y=y, guarantee=FIVE_ELEVENTHS_STR, case=case, report=epsilon_of(game=game, x=x, y=y), factors=factors
    )
    return _checked(result=result, tol=tol)


def _recover_symmetric(game: BimatrixGame, P: np.ndarray, tol: float) -> RecoveryResult:
    if not game.is_symmetric():
        raise GameFormatError("Symmetric recovery needs a symmetric game")
    limit = RESIDUAL_FACTOR * tol
    if np.max(np.abs(P - P.T)) > limit or np.linalg.eigvalsh((P + P.T) / 2).min() < -limit:
        raise RankError("Symmetric recovery needs a symmetric P ⪰ 0")

    columns = cp_rank2_factors(P=P)
    masses = columns.sum(axis=0)
    vectors = [columns[:, idx] / masses[idx] for idx in range(2) if masses[idx] > 0]
    factors = [{"sigma": float(masses[idx] ** 2), "a": vectors[idx].tolist()} for idx in range(len(vectors))]
    x = to_simplex(P.sum(axis=1))
    report = epsilon_of(game=game, x=x, y=x)
    case = "marginals"
    if report.epsilon > GUARANTEE_VALUES[ONE_THIRD_SYMMETRIC_STR]:
        x = max(vectors, key=lambda vec: float(vec @ game.A @ vec))
        report = epsilon_of(game=game, x=x, y=x)
        case = "factor"

    result = RecoveryResult(x=x, y=x, guarantee=ONE_THIRD_SYMMETRIC_STR, case=case, report=report, factors=factors)
    return _checked(result=result, tol=tol)


def recover_rank2(game: BimatrixGame, sol: NashSdpSolution, symmetric_mode: bool = False) -> RecoveryResult:
    """
    Approximate equilibrium from a correlated equilibrium P of rank at most two.

    Rank one: P = xyᵀ is a product correlated equilibrium, hence exact. Rank two: the nonnegative (or,
    with `symmetric_mode`, completely positive) factorization drives the case split of the guarantee.
    """
    singular = np.linalg.svd(sol.P, compute_uv=False)
    if singular[0] <= 0:
        raise RankError("P vanishes")

    if singular.size < 2 or singular[1] <= RANK_ONE_THRESHOLD * singular[0]:
        x, y = sol.strategies()
        if symmetric_mode:
            y = x
        result = RecoveryResult(x=x, y=y, guarantee=EXACT_STR, case="rank-one", report=epsilon_of(game=game, x=x, y=y))
        return _checked(result=result, tol=sol.tol)

    if singular.size > 2 and singular[2] > RANK_TWO_THRESHOLD * singular[0]:
        raise RankError(f"P has numerical rank above two (σ₃/σ₁ = {singular[2] / singular[0]:.2e})")

    if symmetric_mode:
        return _recover_symmetric(game=game, P=sol.P, tol=sol.tol)
    return _recover_general(game=game, P=sol.P, tol=sol.tol)


def _symmetric_ce_program(game: BimatrixGame, with_psd: bool, name: str) -> ConicProgram:
    """Symmetric correlated equilibria P of a symmetric game; P ⪰ 0 on request."""
    game.require_symmetric()
    m = game.m
    prog = ConicProgram(name=name)
    P = prog.symmetric(name="P", size=m)
    prog.add_nonnegative(P)
    prog.add(cp.sum(P) == 1)
    for row in range(m):
        prog.add(game.A @ P[row, :] <= game.A[row, :] @ P[row, :])
    if with_psd:
        prog.add_psd(P)
    return prog


@dataclass
class WelfareBound:
    method: str
    status: str
    value: Optional[float]
    tol: float

    @property
    def doubled(self) -> Optional[float]:
        """The bound on 2xᵀAx, the welfare of both players together."""
        return None if self.value is None else 2 * self.value

    def to_json(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "status": self.status,
            "value": self.value,
            "doubled": self.doubled,
            "tol": self.tol,
        }


def welfare_bound(
    game: BimatrixGame, method: str = SDP3_STR, tol: float = DEFAULT_TOL, solver: Optional[str] = None
) -> WelfareBound:
    """max Tr(APᵀ) over symmetric correlated equilibria; an upper bound on xᵀAx at symmetric equilibria."""
    if method not in WELFARE_METHODS:
        raise ValueError(f"Unknown welfare method {method!r}, expected one of {WELFARE_METHODS}")

    prog = _symmetric_ce_program(game=game, with_psd=method == SDP3_STR, name=method)
    objective = cp.Maximize(cp.sum(cp.multiply(game.A, prog.variables["P"])))
    outcome = solve(prog=prog, tol=tol, objective=objective, solver=solver)
    LOGGER.info(f"{method}: {colored_status(outcome.status.value)} value {outcome.value}")
    value = outcome.value if outcome.loosely_feasible else None
    return WelfareBound(method=method, status=outcome.status.value, value=value, tol=tol)


@dataclass
class ExclusionResult:
    method: str
    strategies: List[int]
    verdict: str
    value: Optional[float]
    tol: float

    @property
    def persistent(self) -> bool:
        return self.verdict == PERSISTENT_CERTIFIED_STR

    def to_json(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "strategies": self.strategies,
            "verdict": self.verdict,
            "value": self.value,
            "tol": self.tol,
        }


def strategy_exclusion(
    game: BimatrixGame,
    strategies: Iterable[int],
    method: str = SDP4_STR,
    tol: float = DEFAULT_TOL,
    solver: Optional[str] = None,
) -> ExclusionResult:
    """
    min Σ_{i∈S} x_i over symmetric correlated equilibria (P ⪰ 0 for SDP4).

    A value above 10·tol certifies that S meets the support of every symmetric equilibrium. A zero value
    says nothing.
    """
    if method not in EXCLUSION_METHODS:
        raise ValueError(f"Unknown exclusion method {method!r}, expected one of {EXCLUSION_METHODS}")

    subset = sorted(set(int(idx) for idx in strategies))
    if not subset:
        raise ValueError("Strategy set must be nonempty")
    if subset[0] < 0 or subset[-1] >= game.m:
        raise ValueError(f"Strategy indices {subset} out of range for {game.m} strategies")

    prog = _symmetric_ce_program(game=game, with_psd=method == SDP4_STR, name=method)
    P = prog.variables["P"]
    outcome = solve(prog=prog, tol=tol, objective=cp.Minimize(cp.sum(P[subset, :])), solver=solver)
    value = outcome.value if outcome.is_optimal else None
    verdict = PERSISTENT_CERTIFIED_STR if value is not None and value > RESIDUAL_FACTOR * tol else INCONCLUSIVE_STR
    LOGGER.info(f"{method} on {subset}: {colored_status(outcome.status.value)} -> {verdict}")
    return ExclusionResult(method=method, strategies=subset, verdict=verdict, value=value, tol=tol)


def welfare_objective(game: BimatrixGame) -> np.ndarray:
    """C with [x; y; 1]ᵀC[x; y; 1] = −xᵀ(A + B)y."""
    m, n = game.m, game.n
    C = np.zeros((m + n + 1, m + n + 1))
    C[:m, m : m + n] = -(game.A + game.B) / 2
    C[m : m + n, :m] = C[:m, m : m + n].T
    return C


def _check_objective(game: BimatrixGame, C: Any) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    size = game.m + game.n + 1
    if C.shape != (size, size):
        raise GameFormatError(f"Objective must be {size}x{size}, got shape {C.shape}")
    if not np.allclose(C, C.T):
        raise GameFormatError("Objective matrix must be symmetric")
    return C


@dataclass
class QuadraticBound:
    """Lower bound on min [x; y; 1]ᵀC[x; y; 1] over Nash equilibria; −inf when the program is infeasible."""

    name: str
    status: str
    value: float
    tol: float

    def to_json(self) -> Dict[str, Any]:
        return {"name": self.name, "status": self.status, "value": self.value, "tol": self.tol}


def sdp2_objective_bound(
    game: BimatrixGame, C: Any, tol: float = DEFAULT_TOL, solver: Optional[str] = None
) -> QuadraticBound:
    """min Tr(CM′) over SDP2 with M′ = [[M, z], [zᵀ, 1]] and z = (P1, Pᵀ1)."""
    C = _check_objective(game=game, C=C)
    prog = build_sdp2(game=game)
    M = prog.variables["M"]
    _, P, _ = _blocks(M=M, m=game.m)
    z = cp.reshape(cp.hstack([cp.sum(P, axis=1), cp.sum(P, axis=0)]), (game.m + game.n, 1))
    M_prime = cp.bmat([[M, z], [z.T, np.ones((1, 1))]])
    outcome = solve(prog=prog, tol=tol, objective=cp.Minimize(cp.sum(cp.multiply(C, M_prime))), solver=solver)
    if not outcome.is_optimal:
        raise SolverInaccurateError(f"SDP2 objective bound: {outcome.status.value} ({outcome.message})")
    return QuadraticBound(name="sdp2", status=outcome.status.value, value=float(outcome.value), tol=tol)


def lasserre1_bound(
    game: BimatrixGame, C: Any, tol: float = DEFAULT_TOL, solver: Optional[str] = None
) -> QuadraticBound:
    """
    First level of the Lasserre hierarchy for min [x; y; 1]ᵀC[x; y; 1] over Nash equilibria.

    max γ such that f − γ − Σα_i(xᵀAy − e_iᵀAy) − Σβ_j(xᵀBy − xᵀBe_j) − χᵀx − ψᵀy − η₁(1ᵀx − 1) − η₂(1ᵀy − 1)
    is a PSD quadratic form in [x; y; 1], with α, β, χ, ψ ≥ 0.
    """
    C = _check_objective(game=game, C=C)
    m, n = game.m, game.n
    A, B = game.A, game.B
    prog = ConicProgram(name="lasserre1")
    gamma = prog.scalar(name="gamma")
    alpha, chi = prog.vector(name="alpha", size=m, nonneg=True), prog.vector(name="chi", size=m, nonneg=True)
    beta, psi = prog.vector(name="beta", size=n, nonneg=True), prog.vector(name="psi", size=n, nonneg=True)
    eta = prog.vector(name="eta", size=2)

    cross = -(cp.sum(alpha) * A + cp.sum(beta) * B) / 2
    linear_x = cp.reshape((B @ beta - chi - eta[0] * np.ones(m)) / 2, (m, 1))
    linear_y = cp.reshape((A.T @ alpha - psi - eta[1] * np.ones(n)) / 2, (n, 1))
    corner = cp.reshape(eta[0] + eta[1] - gamma, (1, 1))
    H = C + cp.bmat([
        [np.zeros((m, m)), cross, linear_x],
        [cross.T, np.zeros((n, n)), linear_y],
        [linear_x.T, linear_y.T, corner],
    ])
    prog.add_psd(H)

    outcome = solve(prog=prog, tol=tol, objective=cp.Maximize(gamma), solver=solver)
    LOGGER.info(f"lasserre1: {colored_status(outcome.status.value)} value {outcome.value}")
    if outcome.status is SolveStatus.INFEASIBLE:
        return QuadraticBound(name="lasserre1", status=outcome.status.value, value=-float("inf"), tol=tol)
    if outcome.status is SolveStatus.UNBOUNDED:
        return QuadraticBound(name="lasserre1", status=outcome.status.value, value=float("inf"), tol=tol)
    if not outcome.is_optimal:
        raise SolverInaccurateError(f"Lasserre level one: {outcome.status.value} ({outcome.message})")
    return QuadraticBound(name="lasserre1", status=outcome.status.value, value=float(outcome.value), tol=tol)


def epsilon_table(epsilons: Iterable[float]) -> Dict[str, float]:
    values = np.asarray(list(epsilons), dtype=float)
    if not values.size:
        raise ValueError("Cannot summarize an empty list of ε values")
    return {
        "Max": float(values.max()),
        "Mean": float(values.mean()),
        "Median": float(np.median(values)),
        "StDev": float(values.std(ddof=1)) if values.size > 1 else 0.0,
    }


def nash_benchmark(
    sizes: Sequence[int],
    count: int,
    seed: int,
    objective: str = DIAGONAL_GAP_STR,
    iters: int = DEFAULT_ITERS,
    tol: float = DEFAULT_TOL,
    jobs: Optional[int] = None,
    solver: Optional[str] = None,
) -> List[Dict[str, Any]]:
    """One ε summary row per size over `count` random games seeded seed, seed + 1, …"""
    rows = []
    for size in sizes:
        log_prefix = new_log_prefix(name=f"bench-{size}x{size}")

        def _run(index: int) -> float:
            game = random_game(m=size, n=size, seed=seed + index)
            return solve_rank_lowering(
                game=game, objective=objective, iters=iters, tol=tol, solver=solver, log_prefix=log_prefix
            ).report.epsilon

        results = run_in_pool(func=_run, items=list(range(count)), jobs=jobs, log_prefix=log_prefix)
        epsilons = [val for val in results if val is not None]
        if len(epsilons) < count:
            LOGGER.warning(f"{log_prefix} {count - len(epsilons)} of {count} games failed")
        rows.append(
            {"size": f"{size}x{size}", "algorithm": objective, "count": len(epsilons), **epsilon_table(epsilons)}
        )
    return rows
