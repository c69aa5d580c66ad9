"""
Instance generators built from NP-hardness reductions, each shipped with brute-force ground truth.

Generators are pure; ground truth is computed by explicit enumeration at generation time and the size caps
are enforced rather than approximated.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from polycert.libs.polynomial import CubicCanonical, Point, Polynomial, to_cubic_canonical
from polycert.utils.constants import (
    CRITICAL_CUBIC_STR,
    LOGGER,
    MAX_BRUTE_FORCE_SIZE,
    MAX_EXPONENTIAL_FAMILY_SIZE,
    SAT_VARIANTS,
    SECOND_ORDER_QUARTIC_STR,
)
from polycert.utils.helpers import new_log_prefix, rational_columnspace, rational_nullspace, run_in_pool, to_fraction

Matrix = List[List[Fraction]]

EQ_STR = "=="
GE_STR = ">="
GT_STR = ">"
RELATIONS = (EQ_STR, GE_STR, GT_STR)

NOT_STABLY_COMPACT_STR = "not-stably-compact"
NOT_ARCHIMEDEAN_STR = "not-archimedean"


class InstanceSizeError(Exception):
    pass


class UnknownVariantError(Exception):
    pass


class InstanceArgumentError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    adjacency: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.adjacency) != self.n or any(len(row) != self.n for row in self.adjacency):
            raise ValueError(f"Adjacency matrix must be {self.n}x{self.n}")
        for i, j in itertools.product(range(self.n), repeat=2):
            if self.adjacency[i][j] not in (0, 1):
                raise ValueError(f"Adjacency entry ({i}, {j}) must be 0 or 1")
            if self.adjacency[i][j] != self.adjacency[j][i]:
                raise ValueError(f"Adjacency matrix is not symmetric at ({i}, {j})")
        if any(self.adjacency[i][i] for i in range(self.n)):
            raise ValueError("Adjacency matrix must have a zero diagonal")

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[Tuple[int, int]]) -> "Graph":
        rows = [[0] * n for _ in range(n)]
        for i, j in edges:
            rows[i][j] = rows[j][i] = 1
        return cls(n=n, adjacency=tuple(tuple(row) for row in rows))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls.from_edges(n=n, edges=list(itertools.combinations(range(n), 2)))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls.from_edges(n=n, edges=[])

    def edges(self) -> List[Tuple[int, int]]:
        return [(i, j) for i, j in itertools.combinations(range(self.n), 2) if self.adjacency[i][j]]

    def complement(self) -> "Graph":
        return Graph.from_edges(
            n=self.n, edges=[(i, j) for i, j in itertools.combinations(range(self.n), 2) if not self.adjacency[i][j]]
        )

    def to_json(self) -> Dict[str, Any]:
        return {"n": self.n, "adjacency": [list(row) for row in self.adjacency]}


@dataclass(frozen=True)
class SatInstance:
    """Clauses hold three nonzero signed 1-based variable indices; −j stands for ¬x_j."""

    nvars: int
    clauses: Tuple[Tuple[int, int, int], ...]

    def __post_init__(self):
        for clause in self.clauses:
            if len(clause) != 3:
                raise ValueError(f"Clause {clause} must have exactly 3 literals")
            if any(not lit or abs(lit) > self.nvars for lit in clause):
                raise ValueError(f"Clause {clause} has a literal out of range for {self.nvars} variables")

    @classmethod
    def of(cls, nvars: int, clauses: Sequence[Sequence[int]]) -> "SatInstance":
        return cls(nvars=nvars, clauses=tuple(tuple(int(lit) for lit in clause) for clause in clauses))

    def literal(self, lit: int, xs: Sequence[Polynomial]) -> Polynomial:
        return xs[abs(lit) - 1] if lit > 0 else -xs[abs(lit) - 1]

    def clause_sum(self, clause: Sequence[int], xs: Sequence[Polynomial]) -> Polynomial:
        """φ_{i1} + φ_{i2} + φ_{i3}."""
        return sum((self.literal(lit=lit, xs=xs) for lit in clause), Polynomial.zero(nvars=xs[0].nvars))

    def to_json(self) -> Dict[str, Any]:
        return {"nvars": self.nvars, "clauses": [list(clause) for clause in self.clauses]}


@dataclass
class Constraint:
    polynomial: Polynomial
    relation: str = GE_STR

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"Unknown relation {self.relation!r}, expected one of {RELATIONS}")

    def holds(self, x: Any) -> bool:
        value = self.polynomial.evaluate(x)
        if self.relation == EQ_STR:
            return value == 0
        return value > 0 if self.relation == GT_STR else value >= 0

    def to_json(self) -> Dict[str, Any]:
        return {"polynomial": self.polynomial.to_json(), "relation": self.relation}


@dataclass
class Pop:
    """min objective(x) s.t. constraints; a pure feasible set when objective is None."""

    nvars: int
    constraints: List[Constraint]
    objective: Optional[Polynomial] = None

    def feasible(self, x: Any) -> bool:
        return all(constraint.holds(x) for constraint in self.constraints)

    def to_json(self) -> Dict[str, Any]:
        return {
            "nvars": self.nvars,
            "objective": self.objective.to_json() if self.objective is not None else None,
            "constraints": [constraint.to_json() for constraint in self.constraints],
        }


Payload = Union[Polynomial, Pop, Matrix]


def _payload_json(value: Payload) -> Any:
    if isinstance(value, (Polynomial, Pop)):
        return value.to_json()
    return [[str(entry) for entry in row] for row in value]


@dataclass
class GeneratedInstance:
    name: str
    payload: Dict[str, Payload]
    ground_truth: Dict[str, Any]
    variables: List[str]
    witness: Optional[Point] = None
    provenance: Dict[str, Any] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def polynomial(self) -> Polynomial:
        return self.payload["polynomial"]

    def canonical(self) -> CubicCanonical:
        return to_cubic_canonical(self.polynomial)

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "payload": {key: _payload_json(value) for key, value in self.payload.items()},
            "ground_truth": self.ground_truth,
            "variables": self.variables,
            "witness": self.witness.to_json() if self.witness is not None else None,
            "provenance": {"reduction": self.name, **self.provenance},
            "metadata": self.metadata,
        }


def _check_size(n: int, limit: int = MAX_BRUTE_FORCE_SIZE) -> None:
    if n > limit:
        raise InstanceSizeError(f"Brute-force ground truth is capped at {limit}, got {n}")


def _names(prefix: str, count: int, start: int = 1) -> List[str]:
    return [f"{prefix}{index}" for index in range(start, start + count)]


def cut_size(G: Graph, signs: Sequence[int]) -> int:
    return sum(1 for i, j in G.edges() if signs[i] != signs[j])


def max_cut(G: Graph) -> Tuple[int, Tuple[int, ...]]:
    _check_size(G.n)
    best = (0, (1,) * G.n)
    for rest in itertools.product((1, -1), repeat=max(G.n - 1, 0)):
        signs = (1, *rest)[: G.n]
        size = cut_size(G=G, signs=signs)
        if size > best[0]:
            best = (size, signs)
    return best


def find_cut(G: Graph, k: int) -> Optional[Tuple[int, ...]]:
    """A ±1 encoding of a cut with exactly k edges, or None."""
    _check_size(G.n)
    for rest in itertools.product((1, -1), repeat=max(G.n - 1, 0)):
        signs = (1, *rest)[: G.n]
        if cut_size(G=G, signs=signs) == k:
            return signs
    return None


def stability_number(G: Graph) -> int:
    _check_size(G.n)
    edges = set(G.edges())
    for size in range(G.n, 0, -1):
        for subset in itertools.combinations(range(G.n), size):
            if not any(pair in edges for pair in itertools.combinations(subset, 2)):
                return size
    return 0


def clique_number(G: Graph) -> int:
    return stability_number(G.complement())


def one_in_three_solutions(phi: SatInstance) -> List[Tuple[int, ...]]:
    """All ±1 assignments (1 is true) with exactly one true literal per clause."""
    _check_size(phi.nvars)

    def true_count(clause: Sequence[int], signs: Sequence[int]) -> int:
        return sum(1 for lit in clause if signs[abs(lit) - 1] * (1 if lit > 0 else -1) == 1)

    return [
        signs
        for signs in itertools.product((1, -1), repeat=phi.nvars)
        if all(true_count(clause=clause, signs=signs) == 1 for clause in phi.clauses)
    ]


def maxcut_constraints(G: Graph, k: int) -> List[Polynomial]:
    """q_0 = ¼ Σ E_ij (1 − x_i x_j) − k and q_i = x_i² − 1."""
    xs = Polynomial.variables(nvars=G.n)
    q0 = Polynomial.constant(value=-k, nvars=G.n)
    for i, j in itertools.product(range(G.n), repeat=2):
        if G.adjacency[i][j]:
            q0 = q0 + Fraction(1, 4) * (1 - xs[i] * xs[j])
    return [q0, *(xi * xi - 1 for xi in xs)]


def gen_maxcut_instance(G: Graph, k: int, variant: str = CRITICAL_CUBIC_STR) -> GeneratedInstance:
    """
    critical-cubic: p = Σ y_i q_i(x) + z³ has a critical point iff G has a cut of size k.
    second-order-quartic: p = Σ (y_i² − z_i²) q_i(x) + w⁴ has a second-order point iff the same holds.
    """
    if not 0 <= k <= G.n:
        raise InstanceArgumentError(f"Cut size k must lie in [0, {G.n}], got {k}")
    if variant not in (CRITICAL_CUBIC_STR, SECOND_ORDER_QUARTIC_STR):
        raise UnknownVariantError(f"Unknown maxcut variant {variant!r}")

    n = G.n
    qs = maxcut_constraints(G=G, k=k)
    cut = find_cut(G=G, k=k)
    if variant == CRITICAL_CUBIC_STR:
        nvars = 2 * n + 2
        names = [*_names("x", n), *_names("y", n + 1, start=0), "z"]
        allvars = Polynomial.variables(nvars=nvars)
        ys, z = allvars[n : 2 * n + 1], allvars[-1]
        p = z**3
        for yi, qi in zip(ys, qs):
            p = p + yi * qi.embed(nvars=nvars)
    else:
        nvars = 3 * n + 3
        names = [*_names("x", n), *_names("y", n + 1, start=0), *_names("z", n + 1, start=0), "w"]
        allvars = Polynomial.variables(nvars=nvars)
        ys, zs, w = allvars[n : 2 * n + 1], allvars[2 * n + 1 : 3 * n + 2], allvars[-1]
        p = w**4
        for yi, zi, qi in zip(ys, zs, qs):
            p = p + (yi * yi - zi * zi) * qi.embed(nvars=nvars)

    witness = Point.of([*cut, *([0] * (nvars - n))]) if cut is not None else None
    return GeneratedInstance(
        name=f"maxcut-{variant}",
        payload={"polynomial": p},
        ground_truth={"has_cut": cut is not None, "has_point": cut is not None, "max_cut": max_cut(G)[0]},
        variables=names,
        witness=witness,
        provenance={"graph": G.to_json(), "k": k, "variant": variant},
        metadata={"cut": list(cut) if cut is not None else None},
    )


def stableset_matrix(G: Graph, k: Fraction) -> Matrix:
    """M = kA + kI − J."""
    return [
        [k * G.adjacency[i][j] + (k if i == j else 0) - 1 for j in range(G.n)]
        for i in range(G.n)
    ]


def gen_stableset_family(G: Graph, r: int, c: Any = 1, exact_bound: bool = False) -> GeneratedInstance:
    """
    With k = r − ½: p = (x²)ᵀM(x²) has a (strict) local minimum iff α(G) < k, and the orthant QP
    min xᵀMx has one under the same condition. The bounded QP stores Σx_i ≤ B as B² − (Σx_i)² ≥ 0 with
    B = 3√n, or 3cⁿ√n when `exact_bound` is set.
    """
    _check_size(G.n)
    if not 1 <= r <= G.n:
        raise InstanceArgumentError(f"r must lie in [1, {G.n}], got {r}")

    n = G.n
    k = Fraction(2 * r - 1, 2)
    M = stableset_matrix(G=G, k=k)
    xs = Polynomial.variables(nvars=n)
    q = Polynomial.zero(nvars=n)
    p = Polynomial.zero(nvars=n)
    for i, j in itertools.product(range(n), repeat=2):
        if M[i][j]:
            q = q + M[i][j] * xs[i] * xs[j]
            p = p + M[i][j] * xs[i] ** 2 * xs[j] ** 2

    orthant = [Constraint(polynomial=xi) for xi in xs]
    scale = to_fraction(c) ** n if exact_bound else Fraction(1)
    bound_squared = 9 * scale**2 * n
    total = sum(xs, Polynomial.zero(nvars=n))
    bounded = [*orthant, Constraint(polynomial=bound_squared - total * total)]

    alpha = stability_number(G)
    return GeneratedInstance(
        name="stableset-family",
        payload={
            "M": M,
            "q": q,
            "p": p,
            "orthant_qp": Pop(nvars=n, constraints=orthant, objective=q),
            "bounded_qp": Pop(nvars=n, constraints=bounded, objective=q),
        },
        ground_truth={
            "alpha": alpha,
            "omega": clique_number(G),
            "k": str(k),
            "has_local_min": alpha < k,
            "copositive": alpha <= k,
        },
        variables=_names("x", n),
        witness=Point.of([0] * n),
        provenance={"graph": G.to_json(), "r": r, "c": str(to_fraction(c)), "exact_bound": exact_bound},
        metadata={"bound_squared": str(bound_squared)},
    )


def motzkin_straus_value(G: Graph) -> Fraction:
    """max of xᵀAx over the simplex, 1 − 1/ω(G)."""
    return 1 - Fraction(1, clique_number(G))


def _simplex_grid(n: int, mesh: int):
    for bars in itertools.combinations(range(mesh + n - 1), n - 1):
        parts = np.diff(np.array([-1, *bars, mesh + n - 1])) - 1
        yield parts / mesh


def simplex_grid_extreme(matrix: Sequence[Sequence[Any]], mesh: int = 64, maximize: bool = True) -> float:
    """Extreme value of xᵀMx over the simplex grid {x ≥ 0, Σx = 1, mesh·x integral}."""
    mat = np.array([[float(val) for val in row] for row in matrix])
    values = (float(x @ mat @ x) for x in _simplex_grid(n=len(mat), mesh=mesh))
    return max(values) if maximize else min(values)


def simplex_grid_max(matrix: Sequence[Sequence[Any]], mesh: int = 64) -> float:
    return simplex_grid_extreme(matrix=matrix, mesh=mesh, maximize=True)


def _vectorized(p: Polynomial) -> Callable[[np.ndarray], np.ndarray]:
    if p.is_zero():
        return lambda points: np.zeros(len(points))
    exps = np.array(list(p.terms.keys()), dtype=float)
    coeffs = np.array([float(val) for val in p.terms.values()])
    return lambda points: np.prod(points[:, None, :] ** exps[None, :, :], axis=2) @ coeffs


def sphere_samples(nvars: int, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((samples, nvars))
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def sphere_probe_min(p: Polynomial, samples: int = 20000, seed: int = 0) -> float:
    """Sampling estimate (an upper bound) of the minimum of p on the unit sphere."""
    return float(np.min(_vectorized(p)(sphere_samples(nvars=p.nvars, samples=samples, seed=seed))))


def _top_parts(constraints: Sequence[Constraint]) -> List[Polynomial]:
    parts = []
    for constraint in constraints:
        top = constraint.polynomial.homogeneous_part(degree=int(constraint.polynomial.degree()))
        parts.append(-top)
        if constraint.relation == EQ_STR:
            parts.append(top)
    return parts


def stable_compactness_value(constraints: Sequence[Constraint], point: Any) -> Any:
    """
    max over constraints of −(top-degree part), with both signs for equalities. The set is stably compact
    iff this is positive on the unit sphere.
    """
    return max(part.evaluate(point) for part in _top_parts(constraints))


def stable_compactness_probe(constraints: Sequence[Constraint], samples: int = 20000, seed: int = 0) -> float:
    parts = _top_parts(constraints)
    points = sphere_samples(nvars=parts[0].nvars, samples=samples, seed=seed)
    return float(np.min(np.max(np.stack([_vectorized(part)(points) for part in parts]), axis=0)))


def _one_in_three_polynomial(phi: SatInstance, xs: Sequence[Polynomial]) -> Polynomial:
    """s_φ = Σ_i (φ_i1 + φ_i2 + φ_i3 + 1)² + Σ_j (1 − x_j²)²."""
    s = Polynomial.zero(nvars=xs[0].nvars)
    for clause in phi.clauses:
        s = s + (phi.clause_sum(clause=clause, xs=xs) + 1) ** 2
    for xj in xs[: phi.nvars]:
        s = s + (1 - xj * xj) ** 2
    return s


def _sat_sphi(phi: SatInstance, assignment: Optional[Tuple[int, ...]]):
    xs = Polynomial.variables(nvars=phi.nvars)
    sat = assignment is not None
    return (
        {"polynomial": _one_in_three_polynomial(phi=phi, xs=xs)},
        _names("x", phi.nvars),
        {"has_zero": sat, "attains": True},
        list(assignment) if sat else None,
    )


def _sat_pphi(phi: SatInstance, assignment: Optional[Tuple[int, ...]]):
    """p_φ = λ² s_φ(x) + (1 − λ)²(y² + (yz − 1)²) in (x, y, z, λ)."""
    n = phi.nvars
    allvars = Polynomial.variables(nvars=n + 3)
    y, z, lam = allvars[n:]
    s = _one_in_three_polynomial(phi=phi, xs=allvars[:n])
    p = lam**2 * s + (1 - lam) ** 2 * (y * y + (y * z - 1) ** 2)
    sat = assignment is not None
    return (
        {"polynomial": p},
        [*_names("x", n), "y", "z", "lambda"],
        {"attains": sat, "infimum": 0},
        [*assignment, 0, 0, 1] if sat else None,
    )


def _sat_phat(phi: SatInstance, assignment: Optional[Tuple[int, ...]]):
    """
    Quartic version in (x, y, z, λ, χ, w): every λx_j of λ²s_φ becomes χ_j, so
    ŝ_φ = Σ_i (φ_i(χ) + λ)² + Σ_j (λ − χ_j x_j)², then
    p̂ = ŝ_φ + (1 − λ)²(y² + (w − 1)²) + (w − yz)² + Σ_j (χ_j − λx_j)².
    """
    n = phi.nvars
    nvars = 2 * n + 4
    allvars = Polynomial.variables(nvars=nvars)
    xs, (y, z, lam), chis, w = allvars[:n], allvars[n : n + 3], allvars[n + 3 : 2 * n + 3], allvars[-1]

    p = (1 - lam) ** 2 * (y * y + (w - 1) ** 2) + (w - y * z) ** 2
    for clause in phi.clauses:
        p = p + (phi.clause_sum(clause=clause, xs=chis) + lam) ** 2
    for xj, chij in zip(xs, chis):
        p = p + (lam - chij * xj) ** 2 + (chij - lam * xj) ** 2

    sat = assignment is not None
    return (
        {"polynomial": p},
        [*_names("x", n), "y", "z", "lambda", *_names("chi", n), "w"],
        {"attains": sat, "infimum": 0},
        [*assignment, 0, 0, 1, *assignment, 0] if sat else None,
    )


def _sat_sphih(phi: SatInstance, assignment: Optional[Tuple[int, ...]]):
    """s_φh(x₀, x) = Σ_i x₀²(φ_i + x₀)² + Σ_j (x₀² − x_j²)²."""
    n = phi.nvars
    allvars = Polynomial.variables(nvars=n + 1)
    x0, xs = allvars[0], allvars[1:]
    p = Polynomial.zero(nvars=n + 1)
    for clause in phi.clauses:
        p = p + x0 * x0 * (phi.clause_sum(clause=clause, xs=xs) + x0) ** 2
    for xj in xs:
        p = p + (x0 * x0 - xj * xj) ** 2

    sat = assignment is not None
    return (
        {"polynomial": p},
        ["x0", *_names("x", n)],
        {"coercive": not sat},
        [1, *assignment] if sat else None,
    )


def _sat_qcqp(phi: SatInstance, assignment: Optional[Tuple[int, ...]]):
    """
    min γ over (x, χ, λ, y, z, w, γ, ζ, ψ) with one χ_i per clause:
    γ ≥ λΣχ_i + (1 − λ)(ψ + ζ), 1 − x_j² = 0, χ_i = (φ_i + 1)², ψ = y², yz = w, ζ = (w − 1)², λ(1 − λ) = 0.
    """
    n, m = phi.nvars, len(phi.clauses)
    nvars = n + m + 7
    allvars = Polynomial.variables(nvars=nvars)
    xs, chis = allvars[:n], allvars[n : n + m]
    lam, y, z, w, gamma, zeta, psi = allvars[n + m :]

    total = sum(chis, Polynomial.zero(nvars=nvars))
    constraints = [Constraint(polynomial=gamma - lam * total - (1 - lam) * (psi + zeta))]
    constraints.extend(Constraint(polynomial=1 - xj * xj, relation=EQ_STR) for xj in xs)
    constraints.extend(
        Constraint(polynomial=chi - (phi.clause_sum(clause=clause, xs=xs) + 1) ** 2, relation=EQ_STR)
        for chi, clause in zip(chis, phi.clauses)
    )
    constraints.extend([
        Constraint(polynomial=psi - y * y, relation=EQ_STR),
        Constraint(polynomial=y * z - w, relation=EQ_STR),
        Constraint(polynomial=zeta - (w - 1) ** 2, relation=EQ_STR),
        Constraint(polynomial=lam * (1 - lam), relation=EQ_STR),
    ])

    sat = assignment is not None
    return (
        {"pop": Pop(nvars=nvars, constraints=constraints, objective=gamma)},
        [*_names("x", n), *_names("chi", m), "lambda", "y", "z", "w", "gamma", "zeta", "psi"],
        {"attains": sat, "infimum": 0},
        [*assignment, *([0] * m), 1, 0, 0, 0, 0, 1, 0] if sat else None,
    )


def _clause_set(phi: SatInstance, strict_bound: bool):
    n = phi.nvars
    allvars = Polynomial.variables(nvars=n + 1)
    xs, y = allvars[:n], allvars[-1]
    constraints = [
        Constraint(polynomial=(phi.clause_sum(clause=clause, xs=xs) + 1) * y, relation=EQ_STR) for clause in phi.clauses
    ]
    constraints.extend(Constraint(polynomial=1 - xj * xj, relation=EQ_STR) for xj in xs)
    if strict_bound:
        constraints.append(Constraint(polynomial=1 - y, relation=GT_STR))
    return Pop(nvars=n + 1, constraints=constraints), [*_names("x", n), "y"]


def _sat_closedness(phi: SatInstance, assignment: Optional[Tuple[int, ...]]):
    pop, names = _clause_set(phi=phi, strict_bound=True)
    sat = assignment is not None
    return {"set": pop}, names, {"closed": not sat}, [*assignment, Fraction(1, 2)] if sat else None


def _sat_boundedness(phi: SatInstance, assignment: Optional[Tuple[int, ...]]):
    pop, names = _clause_set(phi=phi, strict_bound=False)
    sat = assignment is not None
    return {"set": pop}, names, {"bounded": not sat}, [*assignment, 1] if sat else None


def _sat_stable_compactness(phi: SatInstance, assignment: Optional[Tuple[int, ...]]):
    """T_φ = {(φ_i + x₀)² = 0, x₀² − x_j² = 0} in (x₀, x)."""
    n = phi.nvars
    allvars = Polynomial.variables(nvars=n + 1)
    x0, xs = allvars[0], allvars[1:]
    constraints = [
        Constraint(polynomial=(phi.clause_sum(clause=clause, xs=xs) + x0) ** 2, relation=EQ_STR)
        for clause in phi.clauses
    ]
    constraints.extend(Constraint(polynomial=x0 * x0 - xj * xj, relation=EQ_STR) for xj in xs)
    sat = assignment is not None
    return (
        {"set": Pop(nvars=n + 1, constraints=constraints)},
        ["x0", *_names("x", n)],
        {"stably_compact": not sat},
        [1, *assignment] if sat else None,
    )


SAT_BUILDERS = dict(
    zip(
        SAT_VARIANTS,
        (
            _sat_sphi,
            _sat_pphi,
            _sat_phat,
            _sat_sphih,
            _sat_qcqp,
            _sat_closedness,
            _sat_boundedness,
            _sat_stable_compactness,
        ),
    )
)


def gen_sat_attainment(phi: SatInstance, variant: str) -> GeneratedInstance:
    builder = SAT_BUILDERS.get(variant)
    if builder is None:
        raise UnknownVariantError(f"Unknown variant {variant!r}, expected one of {SAT_VARIANTS}")

    solutions = one_in_three_solutions(phi)
    assignment = solutions[0] if solutions else None
    payload, names, truth, witness = builder(phi, assignment)
    LOGGER.debug(f"{variant}: {len(solutions)} one-in-three assignments")
    return GeneratedInstance(
        name=f"sat-{variant}",
        payload=payload,
        ground_truth={"satisfiable": assignment is not None, **truth},
        variables=names,
        witness=Point.of(witness) if witness is not None else None,
        provenance={"formula": phi.to_json(), "variant": variant},
        metadata={"assignment": list(assignment) if assignment is not None else None},
    )


def _pencil(matrices: Sequence[Sequence[Sequence[Any]]]) -> List[Matrix]:
    if not matrices:
        raise ValueError("A pencil needs at least A_0")
    size = len(matrices[0])
    pencil = [[[to_fraction(val) for val in row] for row in mat] for mat in matrices]
    for index, mat in enumerate(pencil):
        if len(mat) != size or any(len(row) != size for row in mat):
            raise ValueError(f"A_{index} is not {size}x{size}")
        if any(mat[i][j] != mat[j][i] for i, j in itertools.product(range(size), repeat=2)):
            raise ValueError(f"A_{index} is not symmetric")
    return pencil


def reduce_pencil(matrices: Sequence[Sequence[Sequence[Any]]]) -> Tuple[List[Matrix], Optional[Matrix]]:
    """
    B_i = VᵀA_iV with V spanning the complement of ∩N(A_i). V is None (identity) when the common null
    space is trivial.
    """
    pencil = _pencil(matrices)
    size = len(pencil[0])
    stacked = [[val for mat in pencil for val in mat[row]] for row in range(size)]
    if not rational_nullspace([list(col) for col in zip(*stacked)]):
        return pencil, None

    columns = rational_columnspace(stacked)
    V = [list(row) for row in zip(*columns)]
    reduced = [
        [
            [sum(V[a][i] * mat[a][b] * V[b][j] for a in range(size) for b in range(size)) for j in range(len(columns))]
            for i in range(len(columns))
        ]
        for mat in pencil
    ]
    return reduced, V


def pencil_cubic(pencil: Sequence[Matrix]) -> Polynomial:
    """p(x, y) = yᵀ(B_0 + Σ x_i B_i)y with x first."""
    n, k = len(pencil) - 1, len(pencil[0])
    allvars = Polynomial.variables(nvars=n + k)
    xs, ys = allvars[:n], allvars[n:]
    p = Polynomial.zero(nvars=n + k)
    for i, j in itertools.product(range(k), repeat=2):
        entry = pencil[0][i][j] + sum((xs[l] * pencil[l + 1][i][j] for l in range(n)), Polynomial.zero(nvars=n + k))
        p = p + entry * ys[i] * ys[j]
    return p


def gen_spectrahedron_cubic(matrices: Sequence[Sequence[Sequence[Any]]]) -> GeneratedInstance:
    """
    Cubic whose convexity region projects onto {x : A_0 + Σx_iA_i ⪰ 0} and whose local minima project onto
    its interior.
    """
    reduced, V = reduce_pencil(matrices)
    n, k = len(reduced) - 1, len(reduced[0])
    return GeneratedInstance(
        name="spectrahedron-cubic",
        payload={"polynomial": pencil_cubic(reduced)},
        ground_truth={"pencil_size": len(matrices[0]), "reduced_size": k},
        variables=[*_names("x", n), *_names("y", k)],
        provenance={"pencil": [[[str(val) for val in row] for row in mat] for mat in _pencil(matrices)]},
        metadata={
            "projection": list(range(n)),
            "V": [[str(val) for val in row] for row in V] if V is not None else None,
        },
    )


def gen_exponential_bitsize(n: int) -> GeneratedInstance:
    """
    p_n = yᵀA_n(x)y with 2×2 diagonal blocks [[x_1, 2], [2, 1]] and [[x_i, x_{i−1}], [x_{i−1}, 1]].
    A_n(x) ⪰ 0 forces x_i ≥ 2^(2^i).
    """
    _check_size(n=n, limit=MAX_EXPONENTIAL_FAMILY_SIZE)
    if n < 1:
        raise InstanceArgumentError(f"n must be positive, got {n}")

    size = 2 * n
    pencil: List[Matrix] = [[[Fraction(0)] * size for _ in range(size)] for _ in range(n + 1)]
    for block in range(n):
        top = 2 * block
        pencil[0][top + 1][top + 1] = Fraction(1)
        pencil[block + 1][top][top] = Fraction(1)
        if block == 0:
            pencil[0][top][top + 1] = pencil[0][top + 1][top] = Fraction(2)
        else:
            pencil[block][top][top + 1] = pencil[block][top + 1][top] = Fraction(1)

    return GeneratedInstance(
        name="exponential-bitsize",
        payload={"polynomial": pencil_cubic(pencil)},
        ground_truth={"lower_bounds": [2 ** (2**i) for i in range(1, n + 1)]},
        variables=[*_names("x", n), *_names("y", size)],
        provenance={"n": n},
        metadata={"projection": list(range(n))},
    )


def gen_irrational_spectrahedron() -> GeneratedInstance:
    """A(x) = diag([[2, x], [x, 1]], [[2x, 2], [2, x]]) is PSD only at x = √2."""
    zero, one, two = Fraction(0), Fraction(1), Fraction(2)
    A0 = [[two, zero, zero, zero], [zero, one, zero, zero], [zero, zero, zero, two], [zero, zero, two, zero]]
    A1 = [[zero, one, zero, zero], [one, zero, zero, zero], [zero, zero, two, zero], [zero, zero, zero, one]]
    instance = gen_spectrahedron_cubic([A0, A1])
    instance.name = "irrational-spectrahedron"
    instance.ground_truth["convexity_region_x"] = "sqrt(2)"
    return instance


def gen_cubic_with_irrational_minimum() -> GeneratedInstance:
    x = Polynomial.variable(index=0, nvars=1)
    return GeneratedInstance(
        name="irrational-minimum",
        payload={"polynomial": x**3 - 6 * x},
        ground_truth={"local_min": "sqrt(2)", "local_min_float": math.sqrt(2)},
        variables=["x1"],
    )


def gen_set_counterexample(kind: str, n: int = 2) -> GeneratedInstance:
    """
    not-stably-compact: {1 − (x₁ − x₂)⁴ − (x₁ + x₂)² ≥ 0}, compact but not stably compact.
    not-archimedean: {x_i − ½ ≥ 0, 1 − Πx_i ≥ 0}, compact but without an Archimedean quadratic module.
    """
    if kind == NOT_STABLY_COMPACT_STR:
        x1, x2 = Polynomial.variables(nvars=2)
        constraints = [Constraint(polynomial=1 - (x1 - x2) ** 4 - (x1 + x2) ** 2)]
        truth = {"compact": True, "stably_compact": False}
        names = ["x1", "x2"]
    elif kind == NOT_ARCHIMEDEAN_STR:
        if n < 2:
            raise InstanceArgumentError(f"The non-Archimedean set needs n >= 2, got {n}")
        xs = Polynomial.variables(nvars=n)
        product = Polynomial.constant(value=1, nvars=n)
        for xi in xs:
            product = product * xi
        constraints = [*(Constraint(polynomial=xi - Fraction(1, 2)) for xi in xs), Constraint(polynomial=1 - product)]
        truth = {"compact": True, "archimedean": False}
        names = _names("x", n)
    else:
        raise UnknownVariantError(f"Unknown counterexample kind {kind!r}")

    return GeneratedInstance(
        name=kind,
        payload={"set": Pop(nvars=len(names), constraints=constraints)},
        ground_truth=truth,
        variables=names,
        witness=Point.of([Fraction(1, 2)] * len(names)) if kind == NOT_ARCHIMEDEAN_STR else Point.of([0, 0]),
        provenance={"kind": kind},
    )


def generate_batch(
    builders: Sequence[Callable[[], GeneratedInstance]], jobs: Optional[int] = None
) -> List[Optional[GeneratedInstance]]:
    """Run independent generators on a thread pool; failures come back as None."""
    return run_in_pool(func=lambda build: build(), items=builders, jobs=jobs, log_prefix=new_log_prefix("generate"))
