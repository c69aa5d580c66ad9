"""
Solver-agnostic conic programs on top of cvxpy.

A ConicProgram collects declared variables, constraints and an optional objective. `solve` runs the
configured backend and reports an E-SDP style outcome: Optimal/Infeasible/Unbounded when the backend
certifies it at the requested tolerance and the assignment replays, Inaccurate otherwise.
"""

import itertools
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from types import MappingProxyType
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import cvxpy as cp
import numpy as np
import scipy.sparse

from polycert.libs.polynomial import Exponents, Point, Polynomial, monomials_up_to
from polycert.utils.constants import (
    DEFAULT_SOLVER,
    DEFAULT_TOL,
    INACCURATE_STR,
    INFEASIBLE_STR,
    LOGGER,
    MATRIX_STR,
    OPTIMAL_STR,
    RESIDUAL_FACTOR,
    SCALAR_STR,
    SUPPORTED_SOLVERS,
    UNBOUNDED_STR,
)
from polycert.utils.helpers import colored_status


class MalformedProgramError(Exception):
    pass


class SosDegreeError(Exception):
    pass


class EmptySetError(Exception):
    pass


class SolverInaccurateError(Exception):
    pass


class SolveStatus(str, Enum):
    OPTIMAL = OPTIMAL_STR
    INFEASIBLE = INFEASIBLE_STR
    UNBOUNDED = UNBOUNDED_STR
    INACCURATE = INACCURATE_STR


@dataclass
class SolveOutcome:
    status: SolveStatus
    value: Optional[float]
    assignment: Dict[str, np.ndarray]
    primal_residual: float
    dual_residual: float
    tol: float
    message: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    @property
    def loosely_feasible(self) -> bool:
        """Optimal, or Inaccurate with a value whose replay residual is within sqrt(tol)."""
        if self.is_optimal:
            return True
        return (
            self.status is SolveStatus.INACCURATE
            and self.value is not None
            and self.primal_residual <= math.sqrt(self.tol)
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "value": self.value,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "tol": self.tol,
            "message": self.message,
        }


def get_solver_name(solver: Optional[str] = None) -> str:
    name = (solver or os.environ.get("POLYCERT_SOLVER") or DEFAULT_SOLVER).upper()
    if name not in SUPPORTED_SOLVERS:
        raise MalformedProgramError(f"Unsupported solver {name}, expected one of {SUPPORTED_SOLVERS}")
    return name


def solver_options(solver: str, tol: float) -> Dict[str, Any]:
    if solver == "SCS":
        return {"eps_abs": tol, "eps_rel": tol, "eps_infeas": tol, "max_iters": 200000}
    return {"tol_gap_abs": tol, "tol_gap_rel": tol, "tol_feas": tol, "tol_infeas_abs": tol, "tol_infeas_rel": tol}


class ConicProgram:
    """
    Declared variables, linear / PSD / nonnegativity constraints and an optional linear objective.

    Construction is single-owner. Constraints and objectives must only reference variables declared on
    this program; `solve` rejects anything else as malformed.
    """

    def __init__(self, name: str = "program"):
        self.name = name
        self._variables: Dict[str, cp.Variable] = {}
        self.constraints: List[cp.Constraint] = []
        self.objective: Optional[cp.Objective] = None
        self._aux_count = 0

    @property
    def variables(self) -> Mapping[str, cp.Variable]:
        return MappingProxyType(self._variables)

    def _declare(self, name: str, variable: cp.Variable) -> cp.Variable:
        if name in self._variables:
            raise MalformedProgramError(f"{self.name}: variable '{name}' declared twice")
        self._variables[name] = variable
        return variable

    def scalar(self, name: str, nonneg: bool = False) -> cp.Variable:
        return self._declare(name=name, variable=cp.Variable(name=name, nonneg=nonneg))

    def vector(self, name: str, size: int, nonneg: bool = False) -> cp.Variable:
        return self._declare(name=name, variable=cp.Variable(size, name=name, nonneg=nonneg))

    def symmetric(self, name: str, size: int) -> cp.Variable:
        return self._declare(name=name, variable=cp.Variable((size, size), symmetric=True, name=name))

    def add(self, *constraints: cp.Constraint) -> None:
        self.constraints.extend(constraints)

    def add_psd(self, expr: Any) -> None:
        """Constrain a square expression to be PSD; non-variable expressions go through a symmetric slack."""
        if isinstance(expr, cp.Variable) and expr.is_symmetric():
            self.constraints.append(expr >> 0)
            return

        self._aux_count += 1
        slack = self.symmetric(name=f"_psd{self._aux_count}", size=expr.shape[0])
        self.constraints.extend([slack == expr, slack >> 0])

    def add_nonnegative(self, expr: Any) -> None:
        self.constraints.append(expr >= 0)

    def minimize(self, expr: Any) -> None:
        self.objective = cp.Minimize(expr)

    def maximize(self, expr: Any) -> None:
        self.objective = cp.Maximize(expr)

    def problem(self, objective: Optional[cp.Objective] = None, extra: Sequence[cp.Constraint] = ()) -> cp.Problem:
        objective = objective or self.objective or cp.Minimize(0)
        self.check_declared(objective=objective, extra=extra)
        return cp.Problem(objective, self.constraints + list(extra))

    def check_declared(self, objective: Optional[cp.Objective] = None, extra: Sequence[cp.Constraint] = ()) -> None:
        declared = {var.id for var in self._variables.values()}
        items: List[Any] = list(self.constraints) + list(extra)
        if objective is not None:
            items.append(objective)

        for item in items:
            unknown = [var.name() for var in item.variables() if var.id not in declared]
            if unknown:
                raise MalformedProgramError(f"{self.name}: {item} references undeclared variables {unknown}")

    def to_json(self, solver: Optional[str] = None) -> Dict[str, Any]:
        return dump_program(prog=self, solver=solver)


def _max_violation(constraints: Iterable[cp.Constraint]) -> float:
    worst = 0.0
    for constraint in constraints:
        try:
            violation = np.max(np.atleast_1d(constraint.violation()))
        except (ValueError, TypeError):
            return float("inf")
        worst = max(worst, float(violation))
    return worst


def _max_dual_violation(constraints: Iterable[cp.Constraint]) -> float:
    worst = 0.0
    for constraint in constraints:
        dual = constraint.dual_value
        if dual is None or isinstance(constraint, cp.constraints.Equality):
            continue
        dual = np.atleast_1d(np.asarray(dual, dtype=float))
        if isinstance(constraint, cp.constraints.PSD):
            dual = np.linalg.eigvalsh((dual + dual.T) / 2)
        worst = max(worst, float(np.max(-dual, initial=0.0)))
    return worst


def _assignment(prog: ConicProgram) -> Dict[str, np.ndarray]:
    return {name: np.array(var.value) for name, var in prog.variables.items() if var.value is not None}


def _max_abs(values: Iterable[Any]) -> float:
    return max((float(np.max(np.abs(val), initial=0.0)) for val in values if val is not None), default=0.0)


def _unvec_triangle(vec: np.ndarray, size: int, lower: bool) -> np.ndarray:
    """Scaled column-major triangle (off-diagonals times √2) back to a symmetric matrix."""
    pairs = [(i, j) for j in range(size) for i in (range(j, size) if lower else range(j + 1))]
    matrix = np.zeros((size, size))
    for val, (i, j) in zip(vec, pairs):
        matrix[i, j] = matrix[j, i] = val if i == j else val / math.sqrt(2)
    return matrix


def cone_violation(vec: np.ndarray, dims: Any, solver: str, zero_is_free: bool) -> float:
    """
    How far `vec` is from the product cone zero × nonneg × soc × psd of the backend standard form.

    zero_is_free selects the dual cone, where the zero block is unrestricted.
    """
    if getattr(dims, "exp", 0) or getattr(dims, "p3d", None):
        return float("inf")

    vec = np.asarray(vec, dtype=float)
    worst = 0.0 if zero_is_free else float(np.max(np.abs(vec[: dims.zero]), initial=0.0))
    offset = dims.zero
    worst = max(worst, float(np.max(-vec[offset : offset + dims.nonneg], initial=0.0)))
    offset += dims.nonneg
    for size in dims.soc:
        worst = max(worst, float(np.linalg.norm(vec[offset + 1 : offset + size]) - vec[offset]))
        offset += size
    for size in dims.psd:
        length = size * (size + 1) // 2
        matrix = _unvec_triangle(vec=vec[offset : offset + length], size=size, lower=solver == "SCS")
        worst = max(worst, float(-np.min(np.linalg.eigvalsh(matrix))))
        offset += length
    return worst


def farkas_residual(data: Dict[str, Any], y: Optional[np.ndarray], solver: str) -> float:
    """
    Residual of an infeasibility certificate y (Aᵀy = 0, y in K*) normalized to bᵀy = −1.

    Relative to 1 + max|y|; inf when y is missing or bᵀy is not negative.
    """
    if y is None:
        return float("inf")
    y = np.asarray(y, dtype=float)
    gap = float(np.asarray(data["b"], dtype=float) @ y)
    if not gap < 0:
        return float("inf")

    y = y / -gap
    stationarity = float(np.max(np.abs(data["A"].T @ y), initial=0.0))
    worst = max(stationarity, cone_violation(vec=y, dims=data["dims"], solver=solver, zero_is_free=True))
    return worst / (1.0 + _max_abs([y]))


def ray_residual(data: Dict[str, Any], x: Optional[np.ndarray], solver: str) -> float:
    """Residual of an unboundedness ray x (−Ax in K, Px = 0) normalized to cᵀx = −1, relative to 1 + max|x|."""
    if x is None:
        return float("inf")
    x = np.asarray(x, dtype=float)
    gap = float(np.asarray(data["c"], dtype=float) @ x)
    if not gap < 0:
        return float("inf")

    x = x / -gap
    worst = cone_violation(vec=-(data["A"] @ x), dims=data["dims"], solver=solver, zero_is_free=False)
    if data.get("P") is not None:
        worst = max(worst, float(np.max(np.abs(data["P"] @ x), initial=0.0)))
    return worst / (1.0 + _max_abs([x]))


def _raw_vectors(raw: Any, solver: str) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
    """(primal x, dual y) of the raw backend solution; on failure statuses these hold the rays."""
    if solver == "SCS":
        x, y = raw.get("x"), raw.get("y")
    else:
        x, y = getattr(raw, "x", None), getattr(raw, "z", None)
    return (
        None if x is None else np.asarray(x, dtype=float),
        None if y is None else np.asarray(y, dtype=float),
    )


def solve(
    prog: ConicProgram,
    tol: float = DEFAULT_TOL,
    objective: Optional[cp.Objective] = None,
    extra: Sequence[cp.Constraint] = (),
    solver: Optional[str] = None,
) -> SolveOutcome:
    """
    Optimal needs primal and dual residuals within RESIDUAL_FACTOR·tol, scaled by the magnitudes involved.
    Infeasible and Unbounded need the backend's certificate ray to check out to the same precision.
    Anything else is Inaccurate.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")

    solver = get_solver_name(solver=solver)
    problem = prog.problem(objective=objective, extra=extra)
    constraints = problem.constraints
    limit = RESIDUAL_FACTOR * tol

    try:
        data, chain, inverse_data = problem.get_problem_data(solver)
        raw = chain.solve_via_data(problem, data, solver_opts=solver_options(solver=solver, tol=tol))
        problem.unpack_results(raw, chain, inverse_data)
    except (cp.error.SolverError, ArithmeticError, ValueError) as ex:
        LOGGER.warning(f"{prog.name}: backend {solver} failed: {ex}")
        return SolveOutcome(
            status=SolveStatus.INACCURATE,
            value=None,
            assignment={},
            primal_residual=float("inf"),
            dual_residual=float("inf"),
            tol=tol,
            message=f"backend failure: {ex}",
        )

    backend_status = problem.status
    message = f"backend status {backend_status}"
    if backend_status in (cp.INFEASIBLE, cp.UNBOUNDED):
        x_ray, y_ray = _raw_vectors(raw=raw, solver=solver)
        value, assignment = None, {}
        if backend_status == cp.INFEASIBLE:
            primal, dual = float("inf"), farkas_residual(data=data, y=y_ray, solver=solver)
            residual, claimed = dual, SolveStatus.INFEASIBLE
        else:
            primal, dual = ray_residual(data=data, x=x_ray, solver=solver), float("inf")
            residual, claimed = primal, SolveStatus.UNBOUNDED
        status = claimed if residual <= limit else SolveStatus.INACCURATE
        message = f"{message}, certificate residual {residual:.2e}"
    else:
        assignment = _assignment(prog=prog)
        primal = _max_violation(constraints=constraints)
        dual = _max_dual_violation(constraints=constraints)
        value = None if problem.value is None else float(problem.value)
        primal_scale = 1.0 + _max_abs(assignment.values())
        dual_scale = 1.0 + _max_abs(constraint.dual_value for constraint in constraints)
        if backend_status == cp.OPTIMAL and primal <= limit * primal_scale and dual <= limit * dual_scale:
            status = SolveStatus.OPTIMAL
        else:
            status = SolveStatus.INACCURATE

    LOGGER.debug(
        f"{prog.name}: {solver} -> {colored_status(status.value)} ({message}, residuals {primal:.2e}/{dual:.2e})"
    )
    return SolveOutcome(
        status=status,
        value=value,
        assignment=assignment,
        primal_residual=primal,
        dual_residual=dual,
        tol=tol,
        message=message,
    )


def dump_program(prog: ConicProgram, solver: Optional[str] = None) -> Dict[str, Any]:
    """Sparse JSON view of the backend standard form: min cᵀx s.t. b - Ax in K."""
    solver = get_solver_name(solver=solver)
    data, _, _ = prog.problem().get_problem_data(solver)
    matrix = scipy.sparse.coo_matrix(data["A"])
    dims = data["dims"]
    return {
        "name": prog.name,
        "solver": solver,
        "variables": {name: list(var.shape) for name, var in prog.variables.items()},
        "cones": {
            "zero": int(dims.zero),
            "nonneg": int(dims.nonneg),
            "soc": [int(val) for val in dims.soc],
            "psd": [int(val) for val in dims.psd],
        },
        "A": {
            "shape": list(matrix.shape),
            "rows": matrix.row.tolist(),
            "cols": matrix.col.tolist(),
            "vals": matrix.data.tolist(),
        },
        "b": np.asarray(data["b"], dtype=float).tolist(),
        "c": np.asarray(data["c"], dtype=float).tolist(),
    }


Coefficient = Union[Fraction, float, cp.Expression]


class AffinePolynomial:
    """Polynomial whose coefficients are affine cvxpy expressions (or plain numbers)."""

    def __init__(self, nvars: int, terms: Optional[Mapping[Exponents, Coefficient]] = None):
        self.nvars = nvars
        self.terms: Dict[Exponents, Coefficient] = dict(terms or {})

    @classmethod
    def lift(cls, value: Union["AffinePolynomial", Polynomial, Any], nvars: int) -> "AffinePolynomial":
        if isinstance(value, AffinePolynomial):
            return value
        if isinstance(value, Polynomial):
            return cls(value.nvars, {exps: float(coeff) for exps, coeff in value.terms.items()})
        return cls(nvars, {(0,) * nvars: float(value)})

    def degree(self) -> int:
        return max((sum(exps) for exps in self.terms), default=0)

    def __add__(self, other: Any) -> "AffinePolynomial":
        other = AffinePolynomial.lift(value=other, nvars=self.nvars)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            terms[exps] = terms[exps] + coeff if exps in terms else coeff
        return AffinePolynomial(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> "AffinePolynomial":
        return AffinePolynomial(self.nvars, {exps: -coeff for exps, coeff in self.terms.items()})

    def __sub__(self, other: Any) -> "AffinePolynomial":
        return self + (-AffinePolynomial.lift(value=other, nvars=self.nvars))

    def __rsub__(self, other: Any) -> "AffinePolynomial":
        return AffinePolynomial.lift(value=other, nvars=self.nvars) - self

    def __mul__(self, other: Any) -> "AffinePolynomial":
        if isinstance(other, AffinePolynomial):
            raise TypeError("Products of two affine polynomials are not affine")
        if not isinstance(other, Polynomial):
            return AffinePolynomial(self.nvars, {exps: coeff * float(other) for exps, coeff in self.terms.items()})

        terms: Dict[Exponents, Coefficient] = {}
        for (exps_a, coeff_a), (exps_b, coeff_b) in itertools.product(self.terms.items(), other.terms.items()):
            exps = tuple(ea + eb for ea, eb in zip(exps_a, exps_b))
            product = coeff_a * float(coeff_b)
            terms[exps] = terms[exps] + product if exps in terms else product
        return AffinePolynomial(self.nvars, terms)

    __rmul__ = __mul__

    def equal_to(self, other: Any) -> List[cp.Constraint]:
        """Coefficientwise equality constraints self == other."""
        difference = self - AffinePolynomial.lift(value=other, nvars=self.nvars)
        constraints = []
        for exps, coeff in difference.terms.items():
            if isinstance(coeff, cp.Expression):
                constraints.append(coeff == 0)
            elif abs(coeff) > 0:
                # Nothing can match this monomial; the identity is infeasible as stated.
                constraints.append(cp.Constant(float(coeff)) == 0)
        return constraints

    def value(self) -> Polynomial:
        """Numerical polynomial after a solve, with coefficients converted exactly from floats."""
        terms = {}
        for exps, coeff in self.terms.items():
            raw = coeff.value if isinstance(coeff, cp.Expression) else coeff
            terms[exps] = Fraction(float(np.asarray(raw, dtype=float)))
        return Polynomial(self.nvars, terms)


@dataclass
class GramBlock:
    """
    Gram matrix G over `basis`. Scalar kind: σ(x) = m(x)ᵀGm(x). Matrix kind (block_size = k): entry
    S_ij(x) is the (i, j) block form of G over the basis y_i·m(x), so yᵀS(x)y = (y⊗m)ᵀG(y⊗m).
    """

    gram: cp.Variable
    basis: List[Exponents]
    nvars: int
    block_size: int = 1
    polynomial: Optional[AffinePolynomial] = None
    matrix: Optional[List[List[AffinePolynomial]]] = None

    def gram_value(self) -> np.ndarray:
        value = np.array(self.gram.value, dtype=float)
        return (value + value.T) / 2


def _gram_form(
    gram: Any, basis: Sequence[Exponents], nvars: int, row_offset: int = 0, col_offset: int = 0
) -> AffinePolynomial:
    collected: Dict[Exponents, List[Tuple[int, int]]] = {}
    for (row, exps_a), (col, exps_b) in itertools.product(enumerate(basis), repeat=2):
        exps = tuple(ea + eb for ea, eb in zip(exps_a, exps_b))
        collected.setdefault(exps, []).append((row + row_offset, col + col_offset))

    return AffinePolynomial(
        nvars, {exps: cp.sum(cp.hstack([gram[row, col] for row, col in cells])) for exps, cells in collected.items()}
    )


def _half_degree(degree: int) -> int:
    if degree < 0 or degree % 2:
        raise SosDegreeError(f"Sos degree bound must be a nonnegative even number, got {degree}")
    return degree // 2


def new_sos_polynomial(prog: ConicProgram, nvars: int, degree: int, name: str) -> GramBlock:
    basis = monomials_up_to(nvars=nvars, degree=_half_degree(degree))
    gram = prog.symmetric(name=name, size=len(basis))
    prog.add_psd(gram)
    return GramBlock(gram=gram, basis=basis, nvars=nvars, polynomial=_gram_form(gram=gram, basis=basis, nvars=nvars))


def new_sos_matrix(prog: ConicProgram, nvars: int, size: int, degree: int, name: str) -> GramBlock:
    basis = monomials_up_to(nvars=nvars, degree=_half_degree(degree))
    width = len(basis)
    gram = prog.symmetric(name=name, size=size * width)
    prog.add_psd(gram)
    matrix = [
        [
            _gram_form(gram=gram, basis=basis, nvars=nvars, row_offset=row * width, col_offset=col * width)
            for col in range(size)
        ]
        for row in range(size)
    ]
    return GramBlock(gram=gram, basis=basis, nvars=nvars, block_size=size, matrix=matrix)


def compile_sos(
    prog: ConicProgram,
    target: Any,
    degree: Optional[int] = None,
    kind: str = SCALAR_STR,
    name: str = "gram",
) -> GramBlock:
    """
    Add a Gram matrix G ⪰ 0 to `prog` with target == m(x)ᵀGm(x) enforced coefficientwise.

    For `kind="matrix"` the target is a square matrix of polynomials M(x), compiled as the scalar sos
    yᵀM(x)y over the monomials y_i·m(x). Monomials follow graded lexicographic order.
    """
    if kind == SCALAR_STR:
        target = AffinePolynomial.lift(value=target, nvars=getattr(target, "nvars", 0))
        degree = target.degree() if degree is None else degree
        if degree % 2:
            raise SosDegreeError(f"Odd degree bound {degree} cannot carry a sum of squares")
        block = new_sos_polynomial(prog=prog, nvars=target.nvars, degree=degree, name=name)
        prog.add(*target.equal_to(block.polynomial))
        return block

    if kind == MATRIX_STR:
        size = len(target)
        if any(len(row) != size for row in target):
            raise MalformedProgramError("Matrix sos target must be square")
        nvars = next(entry.nvars for row in target for entry in row if hasattr(entry, "nvars"))
        entries = [[AffinePolynomial.lift(value=entry, nvars=nvars) for entry in row] for row in target]
        degree = max(entry.degree() for row in entries for entry in row) if degree is None else degree
        if degree % 2:
            raise SosDegreeError(f"Odd degree bound {degree} cannot carry a sum of squares")
        block = new_sos_matrix(prog=prog, nvars=nvars, size=size, degree=degree, name=name)
        for row, col in itertools.combinations_with_replacement(range(size), 2):
            prog.add(*entries[row][col].equal_to(block.matrix[row][col]))
        return block

    raise MalformedProgramError(f"Unknown sos kind {kind}")


def sos_program(
    p: Polynomial, tol: float = DEFAULT_TOL, solver: Optional[str] = None
) -> Tuple[SolveOutcome, GramBlock]:
    prog = ConicProgram(name="sos")
    block = compile_sos(prog=prog, target=p)
    return solve(prog=prog, tol=tol, solver=solver), block


def gram_factors(gram: np.ndarray, rel_tol: float = 1e-7) -> List[Tuple[float, np.ndarray]]:
    """Eigen-factors (λ, v) of a numerical PSD matrix with λ above rel_tol·max(1, λ_max)."""
    values, vectors = np.linalg.eigh((gram + gram.T) / 2)
    cutoff = rel_tol * max(1.0, float(np.max(values, initial=0.0)))
    return [(float(values[idx]), vectors[:, idx]) for idx in range(len(values)) if values[idx] > cutoff]


@dataclass
class SdrSet:
    """Projection of the feasible set of `program` onto the entries of the vector variable `coordinates`."""

    program: ConicProgram
    coordinates: str
    labels: List[str] = field(default_factory=list)

    def __post_init__(self):
        variable = self.program.variables.get(self.coordinates)
        if variable is None:
            raise MalformedProgramError(f"Projection variable '{self.coordinates}' is not declared")
        if len(variable.shape) != 1:
            raise MalformedProgramError(f"Projection variable '{self.coordinates}' must be a vector")

    @property
    def variable(self) -> cp.Variable:
        return self.program.variables[self.coordinates]

    @property
    def dimension(self) -> int:
        return self.variable.shape[0]

    def contains(self, point: Any, tol: float = DEFAULT_TOL, solver: Optional[str] = None) -> bool:
        values = Point.of(point).as_floats()
        outcome = solve(
            prog=self.program,
            tol=tol,
            objective=cp.Minimize(0),
            extra=[self.variable == np.array(values)],
            solver=solver,
        )
        if outcome.status is SolveStatus.INACCURATE:
            LOGGER.warning(f"{self.program.name}: membership of {values} is inconclusive")
        return outcome.is_optimal


def coordinate_bound(
    sdr: SdrSet,
    index: int,
    maximize: bool,
    fixed: Sequence[cp.Constraint] = (),
    tol: float = DEFAULT_TOL,
    solver: Optional[str] = None,
    accept_inaccurate: bool = False,
) -> float:
    """inf (or sup) of one projection coordinate; ±inf when unbounded."""
    target = sdr.variable[index]
    objective = cp.Maximize(target) if maximize else cp.Minimize(target)
    outcome = solve(prog=sdr.program, tol=tol, objective=objective, extra=fixed, solver=solver)
    if outcome.status is SolveStatus.INFEASIBLE:
        raise EmptySetError(f"{sdr.program.name}: set is empty")
    if outcome.status is SolveStatus.UNBOUNDED:
        return float("inf") if maximize else -float("inf")
    if outcome.status is SolveStatus.INACCURATE:
        if not (accept_inaccurate and outcome.loosely_feasible):
            raise SolverInaccurateError(
                f"{sdr.program.name}: coordinate {index} bound is inaccurate ({outcome.message})"
            )
        LOGGER.warning(f"{sdr.program.name}: using loosely feasible bound for coordinate {index}")
    return float(outcome.value)


def relint_point(
    sdr: SdrSet,
    tol: float = DEFAULT_TOL,
    first_lower: Optional[float] = None,
    solver: Optional[str] = None,
    accept_inaccurate: bool = False,
) -> Point:
    """
    Relative-interior point of the projection, fixing one coordinate at a time (2 solves each).

    Each coordinate goes to the midpoint of [inf, sup]; one finite side gives that side ± 1; no finite
    side gives 0. `first_lower` reuses an already computed inf of the first coordinate. With
    `accept_inaccurate`, bounds from Inaccurate solves whose residual is within sqrt(tol) are used; the
    caller is then responsible for verifying the returned point.
    """
    fixed: List[cp.Constraint] = []
    coords: List[float] = []
    bound_kwargs = {"tol": tol, "solver": solver, "accept_inaccurate": accept_inaccurate}
    for index in range(sdr.dimension):
        if index == 0 and first_lower is not None:
            lower = first_lower
        else:
            lower = coordinate_bound(sdr=sdr, index=index, maximize=False, fixed=fixed, **bound_kwargs)
        upper = coordinate_bound(sdr=sdr, index=index, maximize=True, fixed=fixed, **bound_kwargs)

        if np.isfinite(lower) and np.isfinite(upper):
            value = (lower + upper) / 2
        elif np.isfinite(lower):
            value = lower + 1
        elif np.isfinite(upper):
            value = upper - 1
        else:
            value = 0.0

        coords.append(value)
        fixed.append(sdr.variable[index] == value)

    return Point.of(coords)
