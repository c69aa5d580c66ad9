"""
Exact sparse multivariate polynomials and the cubic canonical form.

Coefficients are `fractions.Fraction` end to end. Floating values only appear when a polynomial is
evaluated at a point with floating coordinates.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Any, Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from polycert.utils.helpers import is_exact_scalar, to_fraction

Exponents = Tuple[int, ...]
Scalar = Union[Fraction, float]

DEGREE_OF_ZERO = -math.inf
SYMMETRY_RTOL = 1e-12


class DimensionMismatchError(Exception):
    pass


class DegreeError(Exception):
    pass


class PolynomialFormatError(Exception):
    pass


class SymmetryError(Exception):
    pass


class Polynomial:
    """
    Sparse polynomial in `nvars` variables.

    `terms` maps exponent tuples to nonzero rational coefficients. Instances are immutable.
    """

    __slots__ = ("nvars", "_terms")

    def __init__(self, nvars: int, terms: Optional[Mapping[Sequence[int], Any]] = None):
        if not isinstance(nvars, int) or nvars < 0:
            raise PolynomialFormatError(f"nvars must be a nonnegative integer, got {nvars!r}")

        clean: Dict[Exponents, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != nvars:
                raise PolynomialFormatError(f"Exponent vector {exps} does not have length {nvars}")
            if any(not isinstance(exp, int) or exp < 0 for exp in exps):
                raise PolynomialFormatError(f"Exponent vector {exps} must hold nonnegative integers")

            value = clean.get(exps, Fraction(0)) + to_fraction(coeff)
            if value:
                clean[exps] = value
            else:
                clean.pop(exps, None)

        self.nvars = nvars
        self._terms = clean

    @property
    def terms(self) -> Mapping[Exponents, Fraction]:
        return MappingProxyType(self._terms)

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars)

    @classmethod
    def constant(cls, value: Any, nvars: int) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, index: int, nvars: int) -> "Polynomial":
        if not 0 <= index < nvars:
            raise PolynomialFormatError(f"Variable index {index} out of range for {nvars} variables")
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): 1})

    @classmethod
    def variables(cls, nvars: int) -> List["Polynomial"]:
        return [cls.variable(index=index, nvars=nvars) for index in range(nvars)]

    def degree(self) -> Union[int, float]:
        if not self._terms:
            return DEGREE_OF_ZERO
        return max(sum(exps) for exps in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.coefficient((0,) * self.nvars)

    def _coerce(self, other: Any) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise DimensionMismatchError(f"Cannot combine polynomials in {self.nvars} and {other.nvars} variables")
            return other
        return Polynomial.constant(value=other, nvars=self.nvars)

    def __add__(self, other: Any) -> "Polynomial":
        other = self._coerce(other)
        terms = dict(self._terms)
        for exps, coeff in other._terms.items():
            terms[exps] = terms.get(exps, Fraction(0)) + coeff
        return Polynomial(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.nvars, {exps: -coeff for exps, coeff in self._terms.items()})

    def __sub__(self, other: Any) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "Polynomial":
        other = self._coerce(other)
        terms: Dict[Exponents, Fraction] = {}
        for (exps_a, coeff_a), (exps_b, coeff_b) in itertools.product(self._terms.items(), other._terms.items()):
            exps = tuple(ea + eb for ea, eb in zip(exps_a, exps_b))
            terms[exps] = terms.get(exps, Fraction(0)) + coeff_a * coeff_b
        return Polynomial(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> "Polynomial":
        if not isinstance(power, int) or power < 0:
            raise ValueError(f"Polynomial powers must be nonnegative integers, got {power!r}")

        result = Polynomial.constant(value=1, nvars=self.nvars)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base
            power >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        if is_exact_scalar(other):
            return self == Polynomial.constant(value=other, nvars=self.nvars)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.nvars, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        return f"Polynomial(nvars={self.nvars}, {self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"

        parts = []
        for exps in sorted(self._terms, key=graded_lex_key, reverse=True):
            coeff = self._terms[exps]
            monomial = "*".join(
                f"x{index + 1}" if exp == 1 else f"x{index + 1}^{exp}" for index, exp in enumerate(exps) if exp
            )
            if not monomial:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append(monomial)
            elif coeff == -1:
                parts.append(f"-{monomial}")
            else:
                parts.append(f"{coeff}*{monomial}")
        return " + ".join(parts).replace("+ -", "- ")

    def partial(self, index: int) -> "Polynomial":
        terms: Dict[Exponents, Fraction] = {}
        for exps, coeff in self._terms.items():
            if exps[index]:
                new_exps = list(exps)
                new_exps[index] -= 1
                terms[tuple(new_exps)] = coeff * exps[index]
        return Polynomial(self.nvars, terms)

    def gradient(self) -> List["Polynomial"]:
        return [self.partial(index=index) for index in range(self.nvars)]

    def hessian(self) -> List[List["Polynomial"]]:
        gradient = self.gradient()
        return [[gradient[row].partial(index=col) for col in range(self.nvars)] for row in range(self.nvars)]

    def homogeneous_part(self, degree: int) -> "Polynomial":
        return Polynomial(self.nvars, {exps: coeff for exps, coeff in self._terms.items() if sum(exps) == degree})

    def compose_linear(self, matrix: Sequence[Sequence[Any]]) -> "Polynomial":
        """Substitute x = V·λ where V is an nvars × k matrix; the result lives in k variables."""
        if len(matrix) != self.nvars:
            raise DimensionMismatchError(f"Substitution matrix has {len(matrix)} rows, expected {self.nvars}")

        ncols = len(matrix[0]) if matrix else 0
        images = [
            Polynomial(ncols, {tuple(int(col == idx) for col in range(ncols)): value for idx, value in enumerate(row)})
            for row in matrix
        ]
        result = Polynomial.zero(nvars=ncols)
        for exps, coeff in self._terms.items():
            term = Polynomial.constant(value=coeff, nvars=ncols)
            for image, exp in zip(images, exps):
                if exp:
                    term = term * image**exp
            result = result + term
        return result

    def embed(self, nvars: int, positions: Optional[Sequence[int]] = None) -> "Polynomial":
        """Place variable i of this polynomial at `positions[i]` of a space with `nvars` variables."""
        positions = list(range(self.nvars)) if positions is None else list(positions)
        if len(positions) != self.nvars or any(not 0 <= pos < nvars for pos in positions):
            raise DimensionMismatchError(f"Cannot embed {self.nvars} variables at {positions} into {nvars}")

        terms: Dict[Exponents, Fraction] = {}
        for exps, coeff in self._terms.items():
            new_exps = [0] * nvars
            for pos, exp in zip(positions, exps):
                new_exps[pos] += exp
            terms[tuple(new_exps)] = coeff
        return Polynomial(nvars, terms)

    def evaluate(self, point: Any) -> Scalar:
        return evaluate(p=self, x=point)

    def to_json(self) -> Dict[str, Any]:
        return {
            "nvars": self.nvars,
            "terms": [
                {"coeff": str(coeff), "exps": list(exps)}
                for exps, coeff in sorted(self._terms.items(), key=lambda item: graded_lex_key(item[0]))
            ],
        }

    @classmethod
    def from_json(cls, data: Any) -> "Polynomial":
        if not isinstance(data, dict) or "nvars" not in data or "terms" not in data:
            raise PolynomialFormatError("Polynomial JSON must be an object with 'nvars' and 'terms'")

        nvars = data["nvars"]
        if not isinstance(nvars, int) or isinstance(nvars, bool):
            raise PolynomialFormatError(f"'nvars' must be an integer, got {nvars!r}")

        if not isinstance(data["terms"], list):
            raise PolynomialFormatError("'terms' must be a list")

        terms: Dict[Exponents, Fraction] = {}
        for term in data["terms"]:
            try:
                exps = tuple(term["exps"])
                coeff = to_fraction(str(term["coeff"]))
            except (KeyError, TypeError, ValueError, ZeroDivisionError) as ex:
                raise PolynomialFormatError(f"Malformed term {term!r}: {ex}")

            if exps in terms:
                raise PolynomialFormatError(f"Duplicate exponent vector {list(exps)}")
            terms[exps] = coeff

        return cls(nvars, terms)


def graded_lex_key(exps: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
    """Sort key: total degree first, then lexicographic with x1 most significant."""
    return sum(exps), tuple(-exp for exp in exps)


def _compositions(total: int, nvars: int) -> Iterable[Exponents]:
    if nvars == 0:
        if total == 0:
            yield ()
        return

    if nvars == 1:
        yield (total,)
        return

    for first in range(total, -1, -1):
        for rest in _compositions(total - first, nvars - 1):
            yield (first, *rest)


def monomials_up_to(nvars: int, degree: int) -> List[Exponents]:
    """All exponent vectors of total degree at most `degree`, in graded lexicographic order."""
    return [exps for total in range(degree + 1) for exps in _compositions(total, nvars)]


@dataclass(frozen=True)
class Point:
    coords: Tuple[Scalar, ...]
    exact: bool

    @classmethod
    def of(cls, values: Union["Point", Iterable[Any]]) -> "Point":
        if isinstance(values, Point):
            return values

        values = list(values)
        if all(is_exact_scalar(val) or isinstance(val, str) for val in values):
            return cls(coords=tuple(to_fraction(val) for val in values), exact=True)
        return cls(coords=tuple(float(val) for val in values), exact=False)

    @classmethod
    def parse(cls, text: str) -> "Point":
        """Parse '0,1/2,3' (exact) or '1.41421356,0' (floating) coordinates."""
        parts = [part.strip() for part in text.split(",") if part.strip()]
        try:
            if all("." not in part and "e" not in part.lower() for part in parts):
                return cls.of([Fraction(part) for part in parts])
            return cls.of([float(part) for part in parts])
        except (ValueError, ZeroDivisionError) as ex:
            raise PolynomialFormatError(f"Cannot parse point '{text}': {ex}")

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, index: int) -> Scalar:
        return self.coords[index]

    def as_floats(self) -> List[float]:
        return [float(val) for val in self.coords]

    def to_json(self) -> List[Union[str, float]]:
        return [str(val) if self.exact else val for val in self.coords]


def evaluate(p: Polynomial, x: Any) -> Scalar:
    point = Point.of(x)
    if len(point) != p.nvars:
        raise DimensionMismatchError(f"Point has {len(point)} coordinates, polynomial has {p.nvars} variables")

    if point.exact:
        total = Fraction(0)
        for exps, coeff in p.terms.items():
            term = coeff
            for val, exp in zip(point.coords, exps):
                if exp:
                    term *= val**exp
            total += term
        return total

    total_float = 0.0
    for exps, coeff in p.terms.items():
        term_float = float(coeff)
        for val, exp in zip(point.coords, exps):
            if exp:
                term_float *= val**exp
        total_float += term_float
    return total_float


class Derivatives(NamedTuple):
    gradient: List[Polynomial]
    hessian: List[List[Polynomial]]
    cubic_part: Polynomial


def differentiate(p: Polynomial) -> Derivatives:
    return Derivatives(gradient=p.gradient(), hessian=p.hessian(), cubic_part=p.homogeneous_part(degree=3))


def evaluate_matrix(matrix: Sequence[Sequence[Polynomial]], x: Any) -> List[List[Scalar]]:
    return [[entry.evaluate(x) for entry in row] for row in matrix]


def third_derivative_tensor(p: Polynomial, x: Any) -> List[List[List[Scalar]]]:
    hessian = p.hessian()
    indices = range(p.nvars)
    return [[[hessian[j][k].partial(index=i).evaluate(x) for k in indices] for j in indices] for i in indices]


def _close(first: Any, second: Any) -> bool:
    if is_exact_scalar(first) and is_exact_scalar(second):
        return to_fraction(first) == to_fraction(second)
    first, second = float(first), float(second)
    return abs(first - second) <= SYMMETRY_RTOL * max(1.0, abs(first), abs(second))


def is_symmetric(matrix: Sequence[Sequence[Any]]) -> bool:
    size = len(matrix)
    return all(len(row) == size for row in matrix) and all(
        _close(matrix[i][j], matrix[j][i]) for i in range(size) for j in range(i + 1, size)
    )


def is_valid_hessian_family(hessians: Sequence[Sequence[Sequence[Any]]]) -> bool:
    """(H_i)_jk == (H_j)_ik == (H_k)_ij for every i, j, k."""
    size = len(hessians)
    for i, j, k in itertools.product(range(size), repeat=3):
        if not (_close(hessians[i][j][k], hessians[j][i][k]) and _close(hessians[i][j][k], hessians[k][i][j])):
            return False
    return all(is_symmetric(matrix) for matrix in hessians)


Matrix = Tuple[Tuple[Fraction, ...], ...]


def _frozen_matrix(matrix: Sequence[Sequence[Any]]) -> Matrix:
    return tuple(tuple(to_fraction(val) for val in row) for row in matrix)


@dataclass(frozen=True)
class CubicCanonical:
    """
    p(x) = (1/6) Σ x_i xᵀH_i x + ½ xᵀQx + bᵀx, constant term dropped.

    The Hessian of p is Σ x_i H_i + Q.
    """

    n: int
    H: Tuple[Matrix, ...]
    Q: Matrix
    b: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.H) != self.n or len(self.Q) != self.n or len(self.b) != self.n:
            raise DimensionMismatchError(f"Canonical data does not match n={self.n}")
        if not is_symmetric(self.Q):
            raise SymmetryError("Q must be symmetric")
        if not is_valid_hessian_family(self.H):
            raise SymmetryError("H_1..H_n do not come from a cubic form")

    @classmethod
    def build(
        cls, H: Sequence[Sequence[Sequence[Any]]], Q: Sequence[Sequence[Any]], b: Sequence[Any]
    ) -> "CubicCanonical":
        return cls(
            n=len(b),
            H=tuple(_frozen_matrix(mat) for mat in H),
            Q=_frozen_matrix(Q),
            b=tuple(to_fraction(val) for val in b),
        )

    def to_polynomial(self) -> Polynomial:
        xs = Polynomial.variables(nvars=self.n)
        poly = Polynomial.zero(nvars=self.n)
        for i, j, k in itertools.product(range(self.n), repeat=3):
            if self.H[i][j][k]:
                poly = poly + xs[i] * xs[j] * xs[k] * (self.H[i][j][k] / 6)
        for j, k in itertools.product(range(self.n), repeat=2):
            if self.Q[j][k]:
                poly = poly + xs[j] * xs[k] * (self.Q[j][k] / 2)
        for i in range(self.n):
            if self.b[i]:
                poly = poly + xs[i] * self.b[i]
        return poly

    def hessian_at(self, x: Any) -> List[List[Scalar]]:
        point = Point.of(x)
        if len(point) != self.n:
            raise DimensionMismatchError(f"Point has {len(point)} coordinates, cubic has {self.n} variables")

        cast = (lambda val: val) if point.exact else float
        hessian = []
        for j in range(self.n):
            row = []
            for k in range(self.n):
                entry = cast(self.Q[j][k])
                for i in range(self.n):
                    entry += point[i] * cast(self.H[i][j][k])
                row.append(entry)
            hessian.append(row)
        return hessian

    def float_data(self) -> Tuple[List[np.ndarray], np.ndarray, np.ndarray]:
        return (
            [np.array(mat, dtype=float) for mat in self.H],
            np.array(self.Q, dtype=float).reshape(self.n, self.n),
            np.array(self.b, dtype=float),
        )


def to_cubic_canonical(p: Polynomial) -> CubicCanonical:
    if p.degree() > 3:
        raise DegreeError(f"Cubic canonical form needs degree <= 3, got {p.degree()}")

    origin = (0,) * p.nvars
    hessian = p.hessian()
    indices = range(p.nvars)
    H = [[[hessian[j][k].partial(index=i).evaluate(origin) for k in indices] for j in indices] for i in indices]
    Q = evaluate_matrix(hessian, origin)
    b = [entry.evaluate(origin) for entry in p.gradient()]
    return CubicCanonical.build(H=H, Q=Q, b=b)


def cubic_model_from_derivatives(
    g: Sequence[Any], H: Sequence[Sequence[Any]], T: Sequence[Sequence[Sequence[Any]]]
) -> CubicCanonical:
    """Cubic Taylor model q(d) = gᵀd + ½dᵀHd + (1/6)T[d,d,d] in canonical form."""
    size = len(g)
    if len(H) != size or len(T) != size:
        raise DimensionMismatchError("Gradient, Hessian and third derivative sizes differ")
    if not is_symmetric(H):
        raise SymmetryError("Hessian must be symmetric")
    if not is_valid_hessian_family(T):
        raise SymmetryError("Third derivative tensor must be symmetric in all index permutations")

    # Floating inputs may carry rounding asymmetry below SYMMETRY_RTOL; average it away exactly.
    hessian = [[(to_fraction(H[j][k]) + to_fraction(H[k][j])) / 2 for k in range(size)] for j in range(size)]
    tensor = [
        [
            [sum(to_fraction(T[a][b][c]) for a, b, c in itertools.permutations((i, j, k))) / 6 for k in range(size)]
            for j in range(size)
        ]
        for i in range(size)
    ]
    return CubicCanonical.build(H=tensor, Q=hessian, b=g)
