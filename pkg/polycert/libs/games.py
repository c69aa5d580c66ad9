"""
Bimatrix games: payoff normalization, ε of a strategy pair, seeded random families, exact support
enumeration and the two classical symmetrizations.

Player A picks rows and is paid xᵀAy, player B picks columns and is paid xᵀBy.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from polycert.utils.constants import (
    GRIESMER_STR,
    JURG_STR,
    LOGGER,
    MAX_ENUMERATION_SIZE,
    MAX_ENUMERATION_SUPPORT,
)
from polycert.utils.helpers import solve_rational_system, to_fraction

SIMPLEX_TOL = 1e-6
FLOAT_SCREEN_TOL = 1e-9
SYMMETRIZATION_METHODS = (GRIESMER_STR, JURG_STR)


class GameFormatError(Exception):
    pass


class NotSymmetricGameError(Exception):
    pass


class EnumerationLimitError(Exception):
    pass


def _as_matrix(values: Any, name: str) -> np.ndarray:
    try:
        matrix = np.array(values, dtype=float)
    except (TypeError, ValueError) as ex:
        raise GameFormatError(f"{name} is not a numeric matrix: {ex}")

    if matrix.ndim != 2 or not matrix.size:
        raise GameFormatError(f"{name} must be a non-empty rectangular matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise GameFormatError(f"{name} has non-finite entries")
    return matrix


@dataclass(frozen=True)
class Normalization:
    """Normalized payoffs are c·A + d and e·B + f."""

    c: float = 1.0
    d: float = 0.0
    e: float = 1.0
    f: float = 0.0

    def __post_init__(self):
        if self.c <= 0 or self.e <= 0:
            raise GameFormatError(f"Normalization scales must be positive, got c={self.c}, e={self.e}")

    @property
    def is_identity(self) -> bool:
        return (self.c, self.d, self.e, self.f) == (1.0, 0.0, 1.0, 0.0)

    def to_json(self) -> Dict[str, float]:
        return {"c": self.c, "d": self.d, "e": self.e, "f": self.f}


@dataclass(frozen=True)
class BimatrixGame:
    A: np.ndarray
    B: np.ndarray
    normalization: Normalization = field(default_factory=Normalization)

    def __post_init__(self):
        if self.A.shape != self.B.shape:
            raise GameFormatError(f"Payoff shapes differ: A is {self.A.shape}, B is {self.B.shape}")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def raw_a(self) -> np.ndarray:
        return (self.A - self.normalization.d) / self.normalization.c

    def raw_b(self) -> np.ndarray:
        return (self.B - self.normalization.f) / self.normalization.e

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return self.m == self.n and bool(np.allclose(self.B, self.A.T, rtol=0, atol=tol))

    def require_symmetric(self) -> None:
        if not self.is_symmetric():
            raise NotSymmetricGameError(f"Game is not symmetric (B != Aᵀ) for shape {self.A.shape}")

    def to_json(self) -> Dict[str, Any]:
        return {"A": self.A.tolist(), "B": self.B.tolist(), "normalization": self.normalization.to_json()}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "BimatrixGame":
        """Raw {"A", "B"} payoffs; the game is always normalized on load."""
        if not isinstance(data, dict) or "A" not in data or "B" not in data:
            raise GameFormatError("Game JSON must be an object with 'A' and 'B' payoff matrices")
        return normalize_game(A=data["A"], B=data["B"])


def _affine_unit(matrix: np.ndarray) -> Tuple[float, float]:
    low, high = float(matrix.min()), float(matrix.max())
    if high == low:
        return 1.0, -low
    scale = 1.0 / (high - low)
    return scale, -low * scale


def normalize_game(A: Any, B: Any) -> BimatrixGame:
    """Rescale each player's payoffs onto [0, 1]; a constant matrix is only shifted."""
    raw_a, raw_b = _as_matrix(values=A, name="A"), _as_matrix(values=B, name="B")
    c, d = _affine_unit(matrix=raw_a)
    e, f = _affine_unit(matrix=raw_b)
    record = Normalization(c=c, d=d, e=e, f=f)
    return BimatrixGame(A=np.clip(c * raw_a + d, 0.0, 1.0), B=np.clip(e * raw_b + f, 0.0, 1.0), normalization=record)


def strictly_competitive_scalars(game: BimatrixGame, tol: float = 1e-9) -> Optional[Tuple[float, float, float, float]]:
    """(c, d, e, f) with c, e > 0 and cA + dJ = −eB + fJ, or None when the game is not strictly competitive."""
    ones = np.ones(game.A.size)
    if np.ptp(game.A) == 0:
        return (1.0, float(game.A.flat[0] + game.B.flat[0]), 1.0, 0.0) if np.ptp(game.B) == 0 else None

    design = np.column_stack([game.A.ravel(), ones])
    (alpha, beta), *_ = np.linalg.lstsq(design, game.B.ravel(), rcond=None)
    if alpha >= 0 or np.max(np.abs(design @ np.array([alpha, beta]) - game.B.ravel())) > tol:
        return None
    return float(-alpha), 0.0, 1.0, float(beta)


@dataclass(frozen=True)
class EpsilonReport:
    eps_a: float
    eps_b: float
    best_response_a: int
    best_response_b: int

    @property
    def epsilon(self) -> float:
        return max(self.eps_a, self.eps_b)

    def to_json(self) -> Dict[str, Any]:
        return {
            "eps_a": self.eps_a,
            "eps_b": self.eps_b,
            "epsilon": self.epsilon,
            "best_response_a": self.best_response_a,
            "best_response_b": self.best_response_b,
        }


def check_simplex(vector: Any, size: int, name: str, tol: float = SIMPLEX_TOL) -> np.ndarray:
    values = np.asarray(vector, dtype=float)
    if values.shape != (size,):
        raise GameFormatError(f"{name} must have {size} entries, got shape {values.shape}")
    if np.min(values) < -tol or abs(np.sum(values) - 1) > tol:
        raise GameFormatError(f"{name} is not a probability vector within {tol}: {values.tolist()}")
    return values


def epsilon_of(game: BimatrixGame, x: Any, y: Any, tol: float = SIMPLEX_TOL) -> EpsilonReport:
    """Largest gain of a pure deviation for each player; ties go to the lowest index."""
    x = check_simplex(vector=x, size=game.m, name="x", tol=tol)
    y = check_simplex(vector=y, size=game.n, name="y", tol=tol)
    row_payoffs = game.A @ y
    col_payoffs = x @ game.B
    best_a, best_b = int(np.argmax(row_payoffs)), int(np.argmax(col_payoffs))
    return EpsilonReport(
        eps_a=max(0.0, float(row_payoffs[best_a] - x @ row_payoffs)),
        eps_b=max(0.0, float(col_payoffs[best_b] - col_payoffs @ y)),
        best_response_a=best_a,
        best_response_b=best_b,
    )


def to_simplex(vector: Any) -> np.ndarray:
    """Clip tiny negatives from a numerical distribution and renormalize."""
    values = np.clip(np.asarray(vector, dtype=float), 0.0, None)
    total = values.sum()
    if total <= 0:
        raise GameFormatError("Cannot project a vector without positive mass onto the simplex")
    return values / total


def random_game(m: int, n: int, seed: int) -> BimatrixGame:
    """Independent uniform [0, 1] payoffs from numpy's default generator seeded with `seed`."""
    rng = np.random.default_rng(seed)
    return BimatrixGame(A=rng.uniform(size=(m, n)), B=rng.uniform(size=(m, n)))


def random_symmetric_game(n: int, seed: int) -> BimatrixGame:
    """B = Aᵀ with diagonal entries uniform in [0, .5] and off-diagonal entries uniform in [0, 1]."""
    rng = np.random.default_rng(seed)
    A = rng.uniform(size=(n, n))
    np.fill_diagonal(A, rng.uniform(high=0.5, size=n))
    return BimatrixGame(A=A, B=A.T.copy())


def random_zero_sum_game(m: int, n: int, seed: int) -> BimatrixGame:
    A = np.random.default_rng(seed).uniform(size=(m, n))
    return normalize_game(A=A, B=-A)


def random_strictly_competitive_game(m: int, n: int, seed: int) -> BimatrixGame:
    """B = −cA + f for random c > 0 and f, normalized."""
    rng = np.random.default_rng(seed)
    A = rng.uniform(size=(m, n))
    scale, shift = rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0)
    return normalize_game(A=A, B=-scale * A + shift)


@dataclass(frozen=True)
class Equilibrium:
    x: Tuple[Fraction, ...]
    y: Tuple[Fraction, ...]

    def as_floats(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.array([float(val) for val in self.x]), np.array([float(val) for val in self.y])

    def payoffs(self, game: BimatrixGame) -> Tuple[float, float]:
        x, y = self.as_floats()
        return float(x @ game.A @ y), float(x @ game.B @ y)

    def to_json(self) -> Dict[str, List[str]]:
        return {"x": [str(val) for val in self.x], "y": [str(val) for val in self.y]}


@dataclass
class NashEnumeration:
    equilibria: List[Equilibrium]
    degenerate: bool
    max_support: int

    def to_json(self) -> Dict[str, Any]:
        return {
            "equilibria": [eq.to_json() for eq in self.equilibria],
            "degenerate": self.degenerate,
            "max_support": self.max_support,
        }


def _indifference_system(payoff: Sequence[Sequence[Any]], rows: Sequence[int], cols: Sequence[int]) -> List[List[Any]]:
    """Rows of [payoff[I, J] | −1] followed by [1 … 1 | 0]: indifference across I, mass one on J."""
    size = len(cols)
    system = [[payoff[row][col] for col in cols] + [-1] for row in rows]
    system.append([1] * size + [0])
    return system


def _float_candidate(payoff: np.ndarray, rows: Sequence[int], cols: Sequence[int]) -> Tuple[Optional[np.ndarray], bool]:
    """(mixed strategy on cols with its value appended, singular flag) when it passes a float screen."""
    system = np.array(_indifference_system(payoff=payoff, rows=rows, cols=cols), dtype=float)
    if np.linalg.matrix_rank(system) < system.shape[1]:
        return None, True

    rhs = np.zeros(len(rows) + 1)
    rhs[-1] = 1
    solution = np.linalg.solve(system, rhs)
    strategy, value = solution[:-1], solution[-1]
    if np.min(strategy) < -FLOAT_SCREEN_TOL:
        return None, False

    full = np.zeros(payoff.shape[1])
    full[list(cols)] = strategy
    if np.max(payoff @ full) > value + FLOAT_SCREEN_TOL:
        return None, False
    return solution, False


def _exact_strategy(
    payoff: List[List[Fraction]], rows: Sequence[int], cols: Sequence[int]
) -> Optional[Tuple[Tuple[Fraction, ...], int]]:
    """Exact confirmation: (full mixed strategy, number of pure best responses) or None."""
    rhs = [Fraction(0)] * len(rows) + [Fraction(1)]
    solution = solve_rational_system(lhs=_indifference_system(payoff=payoff, rows=rows, cols=cols), rhs=rhs)
    if solution is None:
        return None

    strategy, value = solution[:-1], solution[-1]
    if any(val < 0 for val in strategy):
        return None

    full = [Fraction(0)] * len(payoff[0])
    for col, val in zip(cols, strategy):
        full[col] = val
    row_values = [sum((row[col] * full[col] for col in range(len(full))), Fraction(0)) for row in payoff]
    if any(val > value for val in row_values):
        return None
    return tuple(full), sum(1 for val in row_values if val == value)


def enumerate_nash_small(game: BimatrixGame, max_support: Optional[int] = None) -> NashEnumeration:
    """
    Support enumeration over equal-size support pairs with exact rational linear solves.

    Finds every equilibrium of a nondegenerate game whose supports fit under `max_support`. Degeneracy
    (singular indifference systems, zero mass inside a support, surplus best responses) is flagged; for a
    degenerate game only the isolated equilibria met along the way are returned.
    """
    m, n = game.m, game.n
    if max_support is None:
        if max(m, n) > MAX_ENUMERATION_SIZE:
            raise EnumerationLimitError(
                f"{m}x{n} game exceeds {MAX_ENUMERATION_SIZE}x{MAX_ENUMERATION_SIZE}; pass max_support <= "
                f"{MAX_ENUMERATION_SUPPORT}"
            )
        max_support = min(m, n)
    elif max(m, n) > MAX_ENUMERATION_SIZE and max_support > MAX_ENUMERATION_SUPPORT:
        raise EnumerationLimitError(f"max_support {max_support} is above {MAX_ENUMERATION_SUPPORT} for a {m}x{n} game")

    exact_a = [[to_fraction(val) for val in row] for row in game.A]
    exact_bt = [[to_fraction(val) for val in row] for row in game.B.T]
    degenerate = False
    found: Dict[Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]], Equilibrium] = {}
    for size in range(1, min(max_support, m, n) + 1):
        supports = itertools.product(itertools.combinations(range(m), size), itertools.combinations(range(n), size))
        for rows, cols in supports:
            y_screen, y_singular = _float_candidate(payoff=game.A, rows=rows, cols=cols)
            x_screen, x_singular = _float_candidate(payoff=game.B.T, rows=cols, cols=rows)
            degenerate = degenerate or y_singular or x_singular
            if y_screen is None or x_screen is None:
                continue

            y_exact = _exact_strategy(payoff=exact_a, rows=rows, cols=cols)
            x_exact = _exact_strategy(payoff=exact_bt, rows=cols, cols=rows)
            if y_exact is None or x_exact is None:
                continue

            (y, y_responses), (x, x_responses) = y_exact, x_exact
            if any(x[row] == 0 for row in rows) or any(y[col] == 0 for col in cols):
                degenerate = True
            if y_responses > size or x_responses > size:
                degenerate = True
            found.setdefault((x, y), Equilibrium(x=x, y=y))

    if degenerate:
        LOGGER.info(f"{m}x{n} game is degenerate, returning {len(found)} isolated equilibria")
    return NashEnumeration(equilibria=list(found.values()), degenerate=degenerate, max_support=max_support)


def symmetric_equilibria(game: BimatrixGame, max_support: Optional[int] = None) -> List[Equilibrium]:
    game.require_symmetric()
    return [eq for eq in enumerate_nash_small(game=game, max_support=max_support).equilibria if eq.x == eq.y]


def persistent_sets(game: BimatrixGame, size: int = 1, max_support: Optional[int] = None) -> List[Tuple[int, ...]]:
    """Strategy sets of `size` played with positive probability in every symmetric equilibrium."""
    equilibria = symmetric_equilibria(game=game, max_support=max_support)
    if not equilibria:
        return []
    return [
        subset
        for subset in itertools.combinations(range(game.m), size)
        if all(sum(eq.x[idx] for idx in subset) > 0 for eq in equilibria)
    ]


@dataclass
class Symmetrization:
    """
    Symmetric game (S, Sᵀ) built from a bimatrix game, normalized onto [0, 1].

    `a_matrix` and `b_matrix` are the shifted raw payoffs S was assembled from.
    """

    method: str
    game: BimatrixGame
    m: int
    n: int
    a_matrix: np.ndarray
    b_matrix: np.ndarray

    def pullback(self, z: Any) -> Tuple[np.ndarray, np.ndarray]:
        """Symmetric strategy [x; y(; t)] to the profile (x/1ᵀx, y/1ᵀy) of the original game."""
        z = np.asarray(z, dtype=float)
        x, y = z[: self.m], z[self.m : self.m + self.n]
        if x.sum() <= 0 or y.sum() <= 0:
            raise GameFormatError(f"Symmetric strategy puts no mass on one of the player blocks: {z.tolist()}")
        return x / x.sum(), y / y.sum()

    def push_forward(self, x: Any, y: Any) -> np.ndarray:
        """Image of an equilibrium (x, y) of the original game as a symmetric strategy of S."""
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        payoff_a, payoff_b = float(x @ self.a_matrix @ y), float(x @ self.b_matrix @ y)
        if self.method == GRIESMER_STR:
            total = payoff_a + payoff_b
            return np.concatenate([payoff_a / total * x, payoff_b / total * y])

        x_weight, y_weight = 1 / (2 - payoff_b), 1 / (2 + payoff_a)
        return np.concatenate([x_weight * x, y_weight * y, [1 - x_weight - y_weight]])

    def to_json(self) -> Dict[str, Any]:
        return {"method": self.method, "m": self.m, "n": self.n, "game": self.game.to_json()}


def symmetrize(game: BimatrixGame, method: str, shift: bool = True) -> Symmetrization:
    """
    Build S_AB from the raw payoffs of `game`.

    griesmer: S = [[0, A], [Bᵀ, 0]] and needs A, B > 0. jurg: S = [[0, A, −1], [Bᵀ, 0, 1], [1ᵀ, −1ᵀ, 0]] and
    needs A > 0, B < 0. With `shift` the raw payoffs are moved by constants until the sign requirement
    holds; without it they are used as given.
    """
    if method not in SYMMETRIZATION_METHODS:
        raise ValueError(f"Unknown symmetrization {method!r}, expected one of {SYMMETRIZATION_METHODS}")

    m, n = game.m, game.n
    A, B = game.raw_a(), game.raw_b()
    if method == GRIESMER_STR:
        low = min(float(A.min()), float(B.min()))
        if shift and low <= 0:
            A, B = A + 1 - low, B + 1 - low
        S = np.block([[np.zeros((m, m)), A], [B.T, np.zeros((n, n))]])
    else:
        if shift and A.min() <= 0:
            A = A + 1 - A.min()
        if shift and B.max() >= 0:
            B = B - 1 - B.max()
        S = np.block([
            [np.zeros((m, m)), A, -np.ones((m, 1))],
            [B.T, np.zeros((n, n)), np.ones((n, 1))],
            [np.ones((1, m)), -np.ones((1, n)), np.zeros((1, 1))],
        ])

    LOGGER.debug(f"{method} symmetrization of a {m}x{n} game into {S.shape[0]}x{S.shape[0]}")
    return Symmetrization(method=method, game=normalize_game(A=S, B=S.T), m=m, n=n, a_matrix=A, b_matrix=B)
