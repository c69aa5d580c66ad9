"""
Local minima of cubic polynomials.

Exact classification of a point (first, second and third order conditions), the SDP descriptions of the
second-order points, the SDP-driven search for a local minimum and the third-order Newton method that
uses that search as its step.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import cvxpy as cp
import numpy as np

from polycert.libs.conic import (
    AffinePolynomial,
    ConicProgram,
    EmptySetError,
    GramBlock,
    SdrSet,
    SolveOutcome,
    SolveStatus,
    SolverInaccurateError,
    gram_factors,
    new_sos_matrix,
    new_sos_polynomial,
    relint_point,
    solve,
)
from polycert.libs.polynomial import (
    CubicCanonical,
    DimensionMismatchError,
    Point,
    Polynomial,
    Scalar,
    SymmetryError,
    cubic_model_from_derivatives,
    is_symmetric,
    to_cubic_canonical,
)
from polycert.utils.constants import (
    CLASSICAL_STR,
    DEFAULT_ITERS,
    DEFAULT_TOL,
    INCONCLUSIVE_STR,
    LOCAL_MIN_STR,
    LOGGER,
    MULTIVARIATE_STR,
    NEWTON_MODES,
    NEWTON_THIRD_DERIVATIVE_FLOOR,
    NO_LOCAL_MIN_STR,
    NOT_STRICT_STR,
    POLISH_MAX_STEPS,
    RELINT_FAILS_TOC_STR,
    RESIDUAL_FACTOR,
    SNAP_MAX_DENOMINATOR,
    SOP_SET_EMPTY_STR,
    UNIVARIATE_STR,
)
from polycert.utils.helpers import new_log_prefix, rational_nullspace, to_sympy_matrix


def float_threshold(tol: float) -> float:
    return max(math.sqrt(tol), 1e-6)


def is_psd_exact(matrix: Sequence[Sequence[Any]]) -> bool:
    """Symmetric Gaussian elimination on rationals; a zero pivot must have a zero row."""
    work = [[Fraction(val) for val in row] for row in matrix]
    size = len(work)
    for k in range(size):
        pivot = work[k][k]
        if pivot < 0:
            return False
        if pivot == 0:
            if any(work[k][j] for j in range(k + 1, size)):
                return False
            continue
        for i in range(k + 1, size):
            factor = work[i][k] / pivot
            if factor:
                for j in range(k + 1, size):
                    work[i][j] -= factor * work[k][j]
    return True


def is_pd_exact(matrix: Sequence[Sequence[Any]]) -> bool:
    sym = to_sympy_matrix(matrix)
    return all(sym[:k, :k].det() > 0 for k in range(1, sym.shape[0] + 1))


def rational_nullspace_basis(H: Sequence[Sequence[Any]]) -> List[List[Fraction]]:
    if not is_symmetric(H):
        raise SymmetryError("Null space basis expects a symmetric matrix")
    return rational_nullspace(H)


@dataclass
class DescentWitness:
    """
    Certificate that a second-order point is not a local minimum.

    kind "line": p decreases along base + t·direction for small t > 0.
    kind "parabola": p decreases along base + t·direction + t²·curvature for small t ≠ 0; the sequence
    base + α_i·direction + β_i·z with α_i = alpha_scale / i and β_i = 1/i² lies on it.
    """

    kind: str
    base: List[Scalar]
    direction: List[Scalar]
    curvature: List[Scalar]
    z: List[float] = field(default_factory=list)
    alpha_scale: float = 0.0

    def point(self, t: float) -> List[float]:
        return [
            float(base) + t * float(direc) + t * t * float(curv)
            for base, direc, curv in zip(self.base, self.direction, self.curvature)
        ]

    def sequence_point(self, index: int) -> List[float]:
        alpha, beta = self.alpha_scale / index, 1 / index**2
        return [
            float(base) + alpha * float(direc) + beta * zval
            for base, direc, zval in zip(self.base, self.direction, self.z)
        ]

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "base": [str(val) for val in self.base],
            "direction": [str(val) for val in self.direction],
            "curvature": [str(val) for val in self.curvature],
            "z": self.z,
            "alpha_scale": self.alpha_scale,
        }


@dataclass
class ClassificationReport:
    point: Point
    critical: bool
    second_order: bool
    tonc_holds: bool
    toc_holds: bool
    local_min: bool
    strict_local_min: bool
    certified: bool
    nullspace: List[List[Scalar]] = field(default_factory=list)
    witness: Optional[DescentWitness] = None

    def to_json(self) -> Dict[str, Any]:
        return {
            "point": self.point.to_json(),
            "critical": self.critical,
            "second_order": self.second_order,
            "tonc_holds": self.tonc_holds,
            "toc_holds": self.toc_holds,
            "local_min": self.local_min,
            "strict_local_min": self.strict_local_min,
            "certified": self.certified,
            "nullspace": [[str(val) for val in vec] for vec in self.nullspace],
            "witness": self.witness.to_json() if self.witness else None,
        }


def _grid_combinations(size: int, span: int) -> List[Tuple[int, ...]]:
    # A nonzero form of degree < span cannot vanish on {0..span-1}^size.
    return [combo for combo in itertools.product(range(span), repeat=size) if any(combo)]


def _combine(basis: Sequence[Sequence[Any]], weights: Sequence[int]) -> List[Any]:
    return [sum(weight * vec[row] for weight, vec in zip(weights, basis)) for row in range(len(basis[0]))]


def _exact_witness(
    point: Point, cubic: Polynomial, hessian: List[List[Fraction]], basis: List[List[Fraction]], tonc: bool
) -> Optional[DescentWitness]:
    zeros = [Fraction(0)] * len(point)
    combos = _grid_combinations(size=len(basis), span=4)
    if not tonc:
        for weights in combos:
            direction = _combine(basis=basis, weights=weights)
            value = cubic.evaluate(direction)
            if value:
                direction = direction if value < 0 else [-val for val in direction]
                return DescentWitness(kind="line", base=list(point.coords), direction=direction, curvature=zeros)
        return None

    gradient = cubic.gradient()
    for weights in combos:
        direction = _combine(basis=basis, weights=weights)
        grad = [entry.evaluate(direction) for entry in gradient]
        if not any(grad):
            continue

        gg = sum(val * val for val in grad)
        ghg = sum(grad[j] * hessian[j][k] * grad[k] for j in range(len(grad)) for k in range(len(grad)))
        if ghg <= 0:
            continue
        norm = math.sqrt(gg)
        return DescentWitness(
            kind="parabola",
            base=list(point.coords),
            direction=direction,
            curvature=[-(gg / ghg) * val for val in grad],
            z=[-float(val) / norm for val in grad],
            alpha_scale=math.sqrt(float(ghg) / norm**3),
        )
    return None


def _classify_exact(p: Polynomial, c: CubicCanonical, point: Point) -> ClassificationReport:
    critical = all(entry.evaluate(point) == 0 for entry in p.gradient())
    hessian = c.hessian_at(point)
    second_order = critical and is_psd_exact(hessian)
    basis = rational_nullspace(hessian)

    cubic = p.homogeneous_part(degree=3)
    tonc = toc = True
    if basis:
        columns = [[vec[row] for vec in basis] for row in range(c.n)]
        tonc = cubic.compose_linear(columns).is_zero()
        toc = all(entry.compose_linear(columns).is_zero() for entry in cubic.gradient())

    witness = None
    if second_order and not toc:
        witness = _exact_witness(point=point, cubic=cubic, hessian=hessian, basis=basis, tonc=tonc)
    return ClassificationReport(
        point=point,
        critical=critical,
        second_order=second_order,
        tonc_holds=tonc,
        toc_holds=toc,
        local_min=second_order and toc,
        strict_local_min=critical and is_pd_exact(hessian),
        certified=True,
        nullspace=basis,
        witness=witness,
    )


def _float_witness(
    point: Point, hessians: List[np.ndarray], hessian: np.ndarray, null: np.ndarray, tonc: bool, threshold: float
) -> Optional[DescentWitness]:
    tensor = np.array(hessians)

    def cubic_value(vec: np.ndarray) -> float:
        return float(np.einsum("i,j,k,ijk->", vec, vec, vec, tensor)) / 6

    def cubic_gradient(vec: np.ndarray) -> np.ndarray:
        return np.einsum("j,k,ijk->i", vec, vec, tensor) / 2

    basis = [null[:, col] for col in range(null.shape[1])]
    zeros = [0.0] * len(point)
    for weights in _grid_combinations(size=len(basis), span=4):
        direction = np.array(_combine(basis=basis, weights=weights), dtype=float)
        if not tonc:
            value = cubic_value(direction)
            if abs(value) > threshold:
                direction = direction if value < 0 else -direction
                return DescentWitness(
                    kind="line", base=point.as_floats(), direction=direction.tolist(), curvature=zeros
                )
            continue

        grad = cubic_gradient(direction)
        norm = float(np.linalg.norm(grad))
        if norm <= threshold:
            continue
        ghg = float(grad @ hessian @ grad)
        if ghg <= 0:
            continue
        return DescentWitness(
            kind="parabola",
            base=point.as_floats(),
            direction=direction.tolist(),
            curvature=(-(norm**2 / ghg) * grad).tolist(),
            z=(-grad / norm).tolist(),
            alpha_scale=math.sqrt(ghg / norm**3),
        )
    return None


def _classify_float(p: Polynomial, c: CubicCanonical, point: Point, tol: float) -> ClassificationReport:
    threshold = float_threshold(tol=tol)
    hessians, _, _ = c.float_data()
    gradient = np.array([float(entry.evaluate(point)) for entry in p.gradient()])
    hessian = np.array(c.hessian_at(point), dtype=float)
    eigvals, eigvecs = np.linalg.eigh(hessian)

    scale = max(1.0, float(np.max(np.abs(eigvals), initial=0.0)))
    cubic_scale = max(1.0, max((float(np.max(np.abs(mat), initial=0.0)) for mat in hessians), default=0.0))
    critical = float(np.max(np.abs(gradient), initial=0.0)) <= threshold * scale
    second_order = critical and float(np.min(eigvals, initial=0.0)) >= -threshold * scale
    null = eigvecs[:, np.abs(eigvals) <= threshold * scale]

    tonc = toc = True
    if null.shape[1]:
        restricted = np.einsum("ia,jb,kc,ijk->abc", null, null, null, np.array(hessians))
        tonc = float(np.max(np.abs(restricted))) <= threshold * cubic_scale
        toc = all(float(np.max(np.abs(null.T @ mat @ null))) <= threshold * cubic_scale for mat in hessians)

    witness = None
    if second_order and not toc:
        witness = _float_witness(
            point=point, hessians=hessians, hessian=hessian, null=null, tonc=tonc, threshold=threshold * cubic_scale
        )

    return ClassificationReport(
        point=point,
        critical=critical,
        second_order=second_order,
        tonc_holds=tonc,
        toc_holds=toc,
        local_min=second_order and toc,
        strict_local_min=critical and float(np.min(eigvals, initial=0.0)) > threshold * scale,
        certified=False,
        nullspace=[null[:, col].tolist() for col in range(null.shape[1])],
        witness=witness,
    )


def classify_point(p: Polynomial, x: Any, tol: float = DEFAULT_TOL) -> ClassificationReport:
    """
    Decide criticality, second order conditions and local minimality of a point of a cubic.

    Rational points are classified exactly. Floating points go through eigenvalue tests with threshold
    max(sqrt(tol), 1e-6) and the report is marked non-certified.
    """
    c = to_cubic_canonical(p)
    point = Point.of(x)
    if len(point) != p.nvars:
        raise DimensionMismatchError(f"Point has {len(point)} coordinates, polynomial has {p.nvars} variables")

    if point.exact:
        return _classify_exact(p=p, c=c, point=point)
    return _classify_float(p=p, c=c, point=point, tol=tol)


class CubicProgram(NamedTuple):
    program: ConicProgram
    objective: Any
    small_objective: Any


def _cubic_program(c: CubicCanonical, name: str) -> CubicProgram:
    """Shared constraints: ½Tr(H_iY) + e_iᵀQy + b_i = 0, T(Y, y, z) ⪰ 0, [[Y, y], [yᵀ, 1]] ⪰ 0."""
    hessians, Q, b = c.float_data()
    size = c.n
    prog = ConicProgram(name=name)
    Y = prog.symmetric(name="Y", size=size)
    y = prog.vector(name="y", size=size)
    z = prog.scalar(name="z")

    for i in range(size):
        prog.add(0.5 * cp.trace(hessians[i] @ Y) + Q[i] @ y + b[i] == 0)

    hessian_at_y = sum(y[i] * hessians[i] for i in range(size)) + Q
    v = cp.hstack([cp.trace(hessians[i] @ Y) for i in range(size)]) + Q @ y
    column = cp.reshape(v, (size, 1), order="F")
    prog.add_psd(cp.bmat([[hessian_at_y, column], [column.T, cp.reshape(z, (1, 1), order="F")]]))

    y_column = cp.reshape(y, (size, 1), order="F")
    prog.add_psd(cp.bmat([[Y, y_column], [y_column.T, np.ones((1, 1))]]))

    return CubicProgram(
        program=prog,
        objective=0.5 * cp.trace(Q @ Y) + b @ y + z / 2,
        small_objective=cp.trace(Q @ Y) / 6 + z / 3,
    )


@dataclass
class SecondOrderSdpSolution:
    Y: np.ndarray
    y: np.ndarray
    z: float
    objective: float
    primal_residual: float

    def D(self) -> np.ndarray:
        return self.Y - np.outer(self.y, self.y)

    def d(self, c: CubicCanonical) -> np.ndarray:
        hessians, _, _ = c.float_data()
        return np.array([np.trace(mat @ self.D()) for mat in hessians])

    def delta(self, c: CubicCanonical) -> float:
        hessians, Q, _ = c.float_data()
        hessian = Q + sum(val * mat for val, mat in zip(self.y, hessians))
        d = self.d(c=c)
        return float(self.z - self.y @ hessian @ self.y - 2 * d @ self.y - d @ np.linalg.pinv(hessian) @ d)

    def to_json(self) -> Dict[str, Any]:
        return {
            "Y": self.Y.tolist(),
            "y": self.y.tolist(),
            "z": self.z,
            "objective": self.objective,
            "primal_residual": self.primal_residual,
        }


def _sdp_solution(outcome: SolveOutcome) -> SecondOrderSdpSolution:
    return SecondOrderSdpSolution(
        Y=outcome.assignment["Y"],
        y=np.atleast_1d(outcome.assignment["y"]),
        z=float(outcome.assignment["z"]),
        objective=float(outcome.value),
        primal_residual=outcome.primal_residual,
    )


def second_order_sdp(
    c: CubicCanonical, tol: float = DEFAULT_TOL, solver: Optional[str] = None
) -> Tuple[SolveOutcome, Optional[SecondOrderSdpSolution], Optional[float]]:
    """
    Solve inf ½Tr(QY) + bᵀy + z/2 over the shared constraints.

    The value is nonnegative and is 0, attained, exactly when c has a second-order point. A solution with
    objective ε yields the bound p(y) ≤ p(x) + (2/3)ε on the convexity region, returned as the third item.
    """
    cubic = _cubic_program(c=c, name="complete-cubic")
    cubic.program.minimize(cubic.objective)
    outcome = solve(prog=cubic.program, tol=tol, solver=solver)
    if not outcome.loosely_feasible:
        return outcome, None, None

    solution = _sdp_solution(outcome=outcome)
    return outcome, solution, 2 * max(solution.objective, 0.0) / 3


def small_cubic_sdp(c: CubicCanonical, tol: float = DEFAULT_TOL, solver: Optional[str] = None) -> SolveOutcome:
    """inf (1/6)Tr(QY) + z/3 over the shared constraints; its value is the negative of the sos bound γ*."""
    cubic = _cubic_program(c=c, name="small-cubic")
    cubic.program.minimize(cubic.small_objective)
    return solve(prog=cubic.program, tol=tol, solver=solver)


def second_order_set(c: CubicCanonical, tol: float = DEFAULT_TOL) -> SdrSet:
    """
    Second-order points as the projection on y of the shared constraints plus a pinned objective.

    The objective is nonnegative on the feasible set, so pinning it to zero is imposed as
    objective ≤ RESIDUAL_FACTOR·tol.
    """
    cubic = _cubic_program(c=c, name="second-order-set")
    cubic.program.add(cubic.objective <= RESIDUAL_FACTOR * tol)
    return SdrSet(program=cubic.program, coordinates="y")


@dataclass
class Spectrahedron:
    """{x : Σx_iH_i + Q ⪰ 0, A_eq·x + b_eq = 0}."""

    hessians: List[np.ndarray]
    Q: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray

    def hessian(self, x: Sequence[float]) -> np.ndarray:
        return sum(val * mat for val, mat in zip(x, self.hessians)) + self.Q

    def contains(self, point: Any, tol: float = DEFAULT_TOL) -> bool:
        x = np.array(Point.of(point).as_floats())
        threshold = float_threshold(tol=tol) * (1 + float(np.max(np.abs(x), initial=0.0)))
        if float(np.min(np.linalg.eigvalsh(self.hessian(x)), initial=0.0)) < -threshold:
            return False
        if self.A_eq.size and float(np.max(np.abs(self.A_eq @ x + self.b_eq))) > threshold:
            return False
        return True

    def to_sdr(self, name: str = "second-order-spectrahedron") -> SdrSet:
        prog = ConicProgram(name=name)
        x = prog.vector(name="x", size=len(self.hessians))
        prog.add_psd(self.hessian(x[i] for i in range(len(self.hessians))))
        if self.A_eq.size:
            prog.add(self.A_eq @ x + self.b_eq == 0)
        return SdrSet(program=prog, coordinates="x")


def convexity_region(c: CubicCanonical) -> SdrSet:
    hessians, Q, _ = c.float_data()
    region = Spectrahedron(hessians=hessians, Q=Q, A_eq=np.zeros((0, c.n)), b_eq=np.zeros(0))
    return region.to_sdr(name="convexity-region")


@dataclass
class CubicSosResult:
    outcome: SolveOutcome
    gamma: Optional[float] = None
    sigma: Optional[GramBlock] = None
    sos_matrix: Optional[GramBlock] = None
    second_order_points: Optional[Spectrahedron] = None

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"outcome": self.outcome.to_json(), "gamma": self.gamma}
        if self.second_order_points is not None:
            data["equalities"] = {
                "A": self.second_order_points.A_eq.tolist(),
                "b": self.second_order_points.b_eq.tolist(),
            }
        return data


def _second_order_points(
    c: CubicCanonical, sigma: GramBlock, sos_matrix: GramBlock, tol: float, solver: Optional[str]
) -> Spectrahedron:
    hessians, Q, _ = c.float_data()
    size = c.n
    width = size + 1
    rows: List[np.ndarray] = []
    consts: List[float] = []

    # σ* = Σ q_i² with affine q_i over the basis (1, x_1, ..., x_n)
    for weight, vec in gram_factors(gram=sigma.gram_value(), rel_tol=float_threshold(tol=tol)):
        rows.append(math.sqrt(weight) * vec[1:])
        consts.append(math.sqrt(weight) * vec[0])

    interior = relint_point(sdr=convexity_region(c=c), tol=tol, solver=solver, accept_inaccurate=True).as_floats()
    hessian_interior = Q + sum(val * mat for val, mat in zip(interior, hessians))
    for weight, vec in gram_factors(gram=sos_matrix.gram_value(), rel_tol=float_threshold(tol=tol)):
        blocks = math.sqrt(weight) * vec.reshape(size, width)
        rows.extend(hessian_interior @ blocks[:, 1:])
        consts.extend(hessian_interior @ blocks[:, 0])

    keep = [idx for idx, row in enumerate(rows) if np.linalg.norm(row) + abs(consts[idx]) > 1e-9]
    return Spectrahedron(
        hessians=hessians,
        Q=Q,
        A_eq=np.array([rows[idx] for idx in keep]).reshape(len(keep), size),
        b_eq=np.array([consts[idx] for idx in keep]),
    )


def cubic_sos_relaxation(c: CubicCanonical, tol: float = DEFAULT_TOL, solver: Optional[str] = None) -> CubicSosResult:
    """
    sup γ s.t. p − γ = σ + Tr(S·∇²p), σ a quadratic sos and S an n×n sos-matrix with quadratic entries.

    On success the second-order points are rebuilt as the spectrahedron
    {∇²p(x) ⪰ 0, q_i(x) = 0, ∇²p(ȳ)r_l(x) = 0} from the factors q_i of σ* and rows r_l of S*, with ȳ a
    relative-interior point of the convexity region.
    """
    p = c.to_polynomial()
    prog = ConicProgram(name="cubic-sos")
    gamma = prog.scalar(name="gamma")
    sigma = new_sos_polynomial(prog=prog, nvars=c.n, degree=2, name="sigma")
    sos_matrix = new_sos_matrix(prog=prog, nvars=c.n, size=c.n, degree=2, name="S")

    hessian = p.hessian()
    rhs = sigma.polynomial
    for j, k in itertools.product(range(c.n), repeat=2):
        if not hessian[j][k].is_zero():
            rhs = rhs + sos_matrix.matrix[j][k] * hessian[j][k]

    lhs = AffinePolynomial.lift(value=p, nvars=c.n) - AffinePolynomial(c.n, {(0,) * c.n: gamma})
    prog.add(*lhs.equal_to(rhs))
    prog.maximize(gamma)

    outcome = solve(prog=prog, tol=tol, solver=solver)
    if not outcome.is_optimal:
        return CubicSosResult(outcome=outcome)

    return CubicSosResult(
        outcome=outcome,
        gamma=float(outcome.value),
        sigma=sigma,
        sos_matrix=sos_matrix,
        second_order_points=_second_order_points(c=c, sigma=sigma, sos_matrix=sos_matrix, tol=tol, solver=solver),
    )


@dataclass
class LocalMinSearchResult:
    outcome: str
    point: Optional[Point] = None
    strict: bool = False
    reason: Optional[str] = None
    certified: bool = False
    epsilon_bound: Optional[float] = None
    report: Optional[ClassificationReport] = None
    residuals: Dict[str, float] = field(default_factory=dict)
    solver_calls: int = 0

    def to_json(self) -> Dict[str, Any]:
        return {
            "outcome": self.outcome,
            "point": self.point.to_json() if self.point else None,
            "strict": self.strict,
            "reason": self.reason,
            "certified": self.certified,
            "epsilon_bound": self.epsilon_bound,
            "report": self.report.to_json() if self.report else None,
            "residuals": self.residuals,
            "solver_calls": self.solver_calls,
        }


def _gradient_at(gradient: Sequence[Polynomial], x: np.ndarray) -> np.ndarray:
    return np.array([float(entry.evaluate(x.tolist())) for entry in gradient])


def polish_critical_point(p: Polynomial, c: CubicCanonical, x: Sequence[float], tol: float = DEFAULT_TOL) -> np.ndarray:
    """Pseudo-inverse Newton steps on ∇p = 0; steps stay in the column space of the Hessian."""
    gradient = p.gradient()
    current = np.array(x, dtype=float)
    current_norm = float(np.linalg.norm(_gradient_at(gradient=gradient, x=current)))
    for _ in range(POLISH_MAX_STEPS):
        if current_norm <= 1e-15:
            break
        hessian = np.array(c.hessian_at(current.tolist()), dtype=float)
        step = np.linalg.lstsq(hessian, _gradient_at(gradient=gradient, x=current), rcond=float_threshold(tol=tol))[0]
        candidate = current - step
        candidate_norm = float(np.linalg.norm(_gradient_at(gradient=gradient, x=candidate)))
        if candidate_norm >= current_norm:
            break
        current, current_norm = candidate, candidate_norm
    return current


def snap_point(x: Sequence[float]) -> Point:
    return Point.of([Fraction(float(val)).limit_denominator(SNAP_MAX_DENOMINATOR) for val in x])


def find_local_minimum(
    p: Union[Polynomial, CubicCanonical],
    want_strict: bool = False,
    tol: float = DEFAULT_TOL,
    solver: Optional[str] = None,
) -> LocalMinSearchResult:
    """
    Search a cubic for a local minimum with 2n conic solves.

    TEST1 minimizes y_1 over the second-order set (an empty set means no local minimum). The relative
    interior point of the set is recovered coordinate by coordinate, refined with pseudo-inverse Newton
    steps and snapped to nearby rationals. An exactly second-order snapped point is classified exactly
    (certified); otherwise the refined floating point is classified within tolerance.
    """
    if isinstance(p, CubicCanonical):
        c, poly = p, p.to_polynomial()
    else:
        c, poly = to_cubic_canonical(p), p

    log_prefix = new_log_prefix(name="find-local-min")
    so_set = second_order_set(c=c, tol=tol)
    epsilon_bound = 2 * RESIDUAL_FACTOR * tol / 3

    first = solve(prog=so_set.program, tol=tol, objective=cp.Minimize(so_set.variable[0]), solver=solver)
    LOGGER.info(f"{log_prefix} TEST1 {first.status.value}")
    if first.status is SolveStatus.INFEASIBLE:
        return LocalMinSearchResult(outcome=NO_LOCAL_MIN_STR, reason=SOP_SET_EMPTY_STR, certified=False, solver_calls=1)

    residuals = {"primal": first.primal_residual, "dual": first.dual_residual}
    if first.status is SolveStatus.UNBOUNDED:
        first_lower = -float("inf")
    elif first.loosely_feasible:
        first_lower = float(first.value)
    else:
        return LocalMinSearchResult(outcome=INCONCLUSIVE_STR, residuals=residuals, solver_calls=1)

    try:
        recovered = relint_point(sdr=so_set, tol=tol, first_lower=first_lower, solver=solver, accept_inaccurate=True)
    except EmptySetError:
        return LocalMinSearchResult(outcome=NO_LOCAL_MIN_STR, reason=SOP_SET_EMPTY_STR, solver_calls=2 * c.n)
    except SolverInaccurateError as ex:
        LOGGER.warning(f"{log_prefix} relint recovery failed: {ex}")
        return LocalMinSearchResult(outcome=INCONCLUSIVE_STR, residuals=residuals, solver_calls=2 * c.n)

    refined = polish_critical_point(p=poly, c=c, x=recovered.as_floats(), tol=tol)
    snapped = snap_point(x=refined)
    report = classify_point(p=poly, x=snapped, tol=tol)
    if not report.second_order:
        report = classify_point(p=poly, x=refined.tolist(), tol=tol)
    LOGGER.info(
        f"{log_prefix} recovered {report.point.to_json()} local_min={report.local_min} certified={report.certified}"
    )

    common = {"report": report, "certified": report.certified, "epsilon_bound": epsilon_bound, "solver_calls": 2 * c.n}
    if report.local_min:
        if want_strict and not report.strict_local_min:
            return LocalMinSearchResult(outcome=NO_LOCAL_MIN_STR, reason=NOT_STRICT_STR, point=report.point, **common)
        return LocalMinSearchResult(outcome=LOCAL_MIN_STR, point=report.point, strict=report.strict_local_min, **common)

    # only a second-order relint point failing TOC rules out every local minimum
    if report.second_order and not report.toc_holds and (report.certified or first.is_optimal):
        return LocalMinSearchResult(outcome=NO_LOCAL_MIN_STR, reason=RELINT_FAILS_TOC_STR, **common)
    return LocalMinSearchResult(outcome=INCONCLUSIVE_STR, residuals=residuals, **common)


class TaylorData(NamedTuple):
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    tensor: np.ndarray


DerivativeOracle = Callable[[np.ndarray], TaylorData]


def polynomial_oracle(p: Polynomial) -> DerivativeOracle:
    gradient = p.gradient()
    hessian = p.hessian()
    third = [[[hessian[j][k].partial(index=i) for k in range(p.nvars)] for j in range(p.nvars)] for i in range(p.nvars)]

    def oracle(x: np.ndarray) -> TaylorData:
        point = [float(val) for val in x]
        return TaylorData(
            value=float(p.evaluate(point)),
            gradient=np.array([float(entry.evaluate(point)) for entry in gradient]),
            hessian=np.array([[float(entry.evaluate(point)) for entry in row] for row in hessian]),
            tensor=np.array([[[float(entry.evaluate(point)) for entry in row] for row in mat] for mat in third]),
        )

    return oracle


def arctan_example(x: np.ndarray) -> TaylorData:
    """f(x) = 20x·arctan(x) − 10·log(1 + x²) + x², strongly convex with its minimum 0 at x = 0."""
    t = float(np.atleast_1d(x)[0])
    return TaylorData(
        value=20 * t * math.atan(t) - 10 * math.log1p(t * t) + t * t,
        gradient=np.array([20 * math.atan(t) + 2 * t]),
        hessian=np.array([[2 + 20 / (1 + t * t)]]),
        tensor=np.array([[[-40 * t / (1 + t * t) ** 2]]]),
    )


@dataclass
class NewtonStep:
    index: int
    x: List[float]
    value: float
    note: str = ""


@dataclass
class NewtonTrace:
    mode: str
    steps: List[NewtonStep] = field(default_factory=list)
    halted: Optional[str] = None

    @property
    def iterates(self) -> List[List[float]]:
        return [step.x for step in self.steps]

    def to_json(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "halted": self.halted,
            "steps": [{"k": step.index, "x": step.x, "f": step.value, "note": step.note} for step in self.steps],
        }


def _newton_step(data: TaylorData) -> Optional[np.ndarray]:
    try:
        return -np.linalg.solve(data.hessian, data.gradient)
    except np.linalg.LinAlgError:
        return None


def third_order_newton(
    f: Union[Polynomial, DerivativeOracle],
    x0: Any,
    iters: int = DEFAULT_ITERS,
    mode: str = UNIVARIATE_STR,
    tol: float = DEFAULT_TOL,
    solver: Optional[str] = None,
) -> NewtonTrace:
    """
    Iterate toward a minimizer using third-order information.

    univariate-closed-form: x ← x − (f″ − √(f″² − 2f′f‴))/f‴, with a plain Newton step when the
    discriminant is negative or |f‴| < 1e-12. multivariate-via-cubic-min: step to the local minimum of
    the cubic Taylor model found by `find_local_minimum`. classical: plain Newton.
    """
    if mode not in NEWTON_MODES:
        raise ValueError(f"Unknown Newton mode {mode}, expected one of {NEWTON_MODES}")

    oracle = polynomial_oracle(p=f) if isinstance(f, Polynomial) else f
    x = np.atleast_1d(np.array(x0, dtype=float))
    if mode == UNIVARIATE_STR and x.shape[0] != 1:
        raise DimensionMismatchError("Univariate closed form needs a one-dimensional starting point")

    data = oracle(x)
    trace = NewtonTrace(mode=mode, steps=[NewtonStep(index=0, x=x.tolist(), value=data.value)])
    for index in range(1, iters + 1):
        note = ""
        if mode == UNIVARIATE_STR:
            f1, f2, f3 = float(data.gradient[0]), float(data.hessian[0][0]), float(data.tensor[0][0][0])
            discriminant = f2 * f2 - 2 * f1 * f3
            if discriminant < 0 or abs(f3) < NEWTON_THIRD_DERIVATIVE_FLOOR:
                step = _newton_step(data=data)
                note = "newton-fallback"
            else:
                step = np.array([-(f2 - math.sqrt(discriminant)) / f3])
        elif mode == CLASSICAL_STR:
            step = _newton_step(data=data)
        else:
            model = cubic_model_from_derivatives(
                g=data.gradient.tolist(), H=data.hessian.tolist(), T=data.tensor.tolist()
            )
            result = find_local_minimum(p=model, tol=tol, solver=solver)
            if result.outcome != LOCAL_MIN_STR:
                trace.halted = f"model has no local minimum: {result.reason or result.outcome}"
                break
            step = np.array(result.point.as_floats())

        if step is None:
            trace.halted = "singular Hessian"
            break

        x = x + step
        data = oracle(x)
        trace.steps.append(NewtonStep(index=index, x=x.tolist(), value=data.value, note=note))
        if not np.any(step):
            break

    LOGGER.debug(f"third-order newton ({mode}) finished after {len(trace.steps) - 1} steps")
    return trace
