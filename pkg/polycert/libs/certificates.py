"""
Sum-of-squares certificates for coercivity, compactness and the Archimedean property.

Every certificate is an identity `target = Σ_t term_t` where each term is a Gram form m(x)ᵀGm(x) times a
fixed polynomial factor (or, for sos-matrices, Tr(S(x)F(x))). Certificates serialize to JSON and replay in
exact rational arithmetic.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from polycert.libs.conic import ConicProgram, GramBlock, SolveStatus, new_sos_polynomial, solve
from polycert.libs.cubic_minima import CubicSosResult
from polycert.libs.polynomial import CubicCanonical, Exponents, Polynomial, PolynomialFormatError
from polycert.utils.constants import (
    ARCHIMEDEAN_STR,
    CERTIFICATE_KINDS,
    COERCIVE_STR,
    COMPACT_STR,
    CUBIC_SOS_STR,
    DEFAULT_R_MAX,
    DEFAULT_TOL,
    LOGGER,
    MAX_STENGLE_CONSTRAINTS,
    RESIDUAL_FACTOR,
)
from polycert.utils.helpers import bitsize, colored_status, to_fraction


class CertificateFormatError(Exception):
    pass


class TooManyConstraintsError(Exception):
    pass


def _even_floor(degree: int) -> int:
    return max(degree, 0) // 2 * 2


def gram_polynomial(
    gram: Sequence[Sequence[Any]], basis: Sequence[Exponents], nvars: int, row: int = 0, col: int = 0
) -> Polynomial:
    """Exact m(x)ᵀG[row block, col block]m(x) with float entries converted exactly."""
    width = len(basis)
    terms: Dict[Exponents, Fraction] = {}
    for (a, exps_a), (b, exps_b) in itertools.product(enumerate(basis), repeat=2):
        exps = tuple(ea + eb for ea, eb in zip(exps_a, exps_b))
        terms[exps] = terms.get(exps, Fraction(0)) + to_fraction(gram[row * width + a][col * width + b])
    return Polynomial(nvars, terms)


@dataclass
class SosTerm:
    gram: np.ndarray
    basis: List[Exponents]
    factor: Optional[Polynomial] = None
    factor_matrix: Optional[List[List[Polynomial]]] = None

    @property
    def block_size(self) -> int:
        return len(self.gram) // len(self.basis)

    def polynomial(self, nvars: int) -> Polynomial:
        if self.factor_matrix is None:
            factor = self.factor if self.factor is not None else Polynomial.constant(value=1, nvars=nvars)
            return gram_polynomial(gram=self.gram, basis=self.basis, nvars=nvars) * factor

        total = Polynomial.zero(nvars=nvars)
        for row, col in itertools.product(range(self.block_size), repeat=2):
            entry = self.factor_matrix[row][col]
            if not entry.is_zero():
                total = total + gram_polynomial(gram=self.gram, basis=self.basis, nvars=nvars, row=row, col=col) * entry
        return total

    def factor_scale(self) -> float:
        if self.factor_matrix is None:
            factors = [self.factor]
        else:
            factors = [entry for row in self.factor_matrix for entry in row]
        coeffs = [abs(float(val)) for poly in factors if poly is not None for val in poly.terms.values()]
        return max(coeffs, default=1.0)

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "gram": np.asarray(self.gram, dtype=float).tolist(),
            "basis": [list(exps) for exps in self.basis],
        }
        if self.factor_matrix is not None:
            data["factor_matrix"] = [[entry.to_json() for entry in row] for row in self.factor_matrix]
        else:
            factor = self.factor if self.factor is not None else Polynomial.constant(value=1, nvars=len(self.basis[0]))
            data["factor"] = factor.to_json()
        return data


@dataclass
class SosCertificate:
    kind: str
    nvars: int
    level: int
    tol: float
    target: Polynomial
    terms: List[SosTerm]
    residual: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def replay(self) -> Polynomial:
        """Σ terms − target in exact arithmetic."""
        total = Polynomial.zero(nvars=self.nvars)
        for term in self.terms:
            total = total + term.polynomial(nvars=self.nvars)
        return total - self.target

    def compute_residual(self) -> float:
        return max((abs(float(val)) for val in self.replay().terms.values()), default=0.0)

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "nvars": self.nvars,
            "level": self.level,
            "tol": self.tol,
            "residual": self.residual,
            "target": self.target.to_json(),
            "terms": [term.to_json() for term in self.terms],
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, data: Any) -> "SosCertificate":
        if not isinstance(data, dict):
            raise CertificateFormatError("Certificate must be a JSON object")

        missing = [key for key in ("kind", "nvars", "level", "tol", "target", "terms") if key not in data]
        if missing:
            raise CertificateFormatError(f"Certificate is missing {missing}")
        if data["kind"] not in CERTIFICATE_KINDS:
            raise CertificateFormatError(f"Unknown certificate kind {data['kind']!r}")
        if not isinstance(data["terms"], list) or not data["terms"]:
            raise CertificateFormatError("Certificate must list at least one multiplier term")

        try:
            nvars = int(data["nvars"])
            target = Polynomial.from_json(data["target"])
            terms = [cls._term_from_json(term=term, nvars=nvars) for term in data["terms"]]
            tol = float(data["tol"])
        except (PolynomialFormatError, TypeError, ValueError, KeyError) as ex:
            raise CertificateFormatError(f"Malformed certificate: {ex}")

        if target.nvars != nvars:
            raise CertificateFormatError(f"Target has {target.nvars} variables, certificate declares {nvars}")
        if tol <= 0:
            raise CertificateFormatError(f"Certificate tolerance must be positive, got {tol}")

        return cls(
            kind=data["kind"],
            nvars=nvars,
            level=int(data["level"]),
            tol=tol,
            target=target,
            terms=terms,
            residual=float(data.get("residual", 0.0)),
            metadata=dict(data.get("metadata") or {}),
        )

    @staticmethod
    def _term_from_json(term: Dict[str, Any], nvars: int) -> SosTerm:
        gram = np.array(term["gram"], dtype=float)
        basis = [tuple(int(exp) for exp in exps) for exps in term["basis"]]
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise CertificateFormatError("Gram matrices must be square")
        if not basis or any(len(exps) != nvars for exps in basis) or gram.shape[0] % len(basis):
            raise CertificateFormatError(
                f"Basis of size {len(basis)} does not fit a {gram.shape[0]}x{gram.shape[0]} Gram matrix"
            )

        if "factor_matrix" in term:
            factor_matrix = [[Polynomial.from_json(entry) for entry in row] for row in term["factor_matrix"]]
            size = gram.shape[0] // len(basis)
            if len(factor_matrix) != size or any(len(row) != size for row in factor_matrix):
                raise CertificateFormatError(f"factor_matrix must be {size}x{size}")
            return SosTerm(gram=gram, basis=basis, factor_matrix=factor_matrix)

        if gram.shape[0] != len(basis):
            raise CertificateFormatError("Scalar terms need one basis monomial per Gram row")
        factor = Polynomial.from_json(term["factor"]) if "factor" in term else Polynomial.constant(value=1, nvars=nvars)
        return SosTerm(gram=gram, basis=basis, factor=factor)


@dataclass
class VerificationResult:
    valid: bool
    residual: float
    residual_limit: float
    min_eigenvalue: float
    reasons: List[str] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        return {
            "valid": self.valid,
            "residual": self.residual,
            "residual_limit": self.residual_limit,
            "min_eigenvalue": self.min_eigenvalue,
            "reasons": self.reasons,
        }


def verify_certificate(data: Union[Dict[str, Any], SosCertificate]) -> VerificationResult:
    """
    Replay a certificate: the identity must hold coefficientwise and every Gram matrix must be PSD, both
    within tol scaled by (1 + max|G|)·(1 + max factor coefficient).
    """
    certificate = data if isinstance(data, SosCertificate) else SosCertificate.from_json(data)
    gram_scale = max(float(np.max(np.abs(term.gram), initial=0.0)) for term in certificate.terms)
    factor_scale = max(term.factor_scale() for term in certificate.terms)
    limit = certificate.tol * (1 + gram_scale) * (1 + factor_scale)

    reasons = []
    residual = certificate.compute_residual()
    if residual > limit:
        reasons.append(f"identity residual {residual:.3e} exceeds {limit:.3e}")

    min_eigenvalue = float("inf")
    for index, term in enumerate(certificate.terms):
        if not np.allclose(term.gram, term.gram.T, rtol=0, atol=limit):
            reasons.append(f"term {index}: Gram matrix is not symmetric")
        eigenvalue = float(np.min(np.linalg.eigvalsh((term.gram + term.gram.T) / 2)))
        min_eigenvalue = min(min_eigenvalue, eigenvalue)
        if eigenvalue < -limit:
            reasons.append(f"term {index}: Gram matrix has eigenvalue {eigenvalue:.3e}")

    return VerificationResult(
        valid=not reasons, residual=residual, residual_limit=limit, min_eigenvalue=min_eigenvalue, reasons=reasons
    )


@dataclass
class LevelAttempt:
    level: int
    status: str


@dataclass
class Unknown:
    """No certificate at the levels tried. Never a claim that the property fails."""

    levels: List[LevelAttempt]

    def to_json(self) -> Dict[str, Any]:
        return {"certified": False, "levels": [{"level": att.level, "status": att.status} for att in self.levels]}


def _terms_from_blocks(blocks: Sequence[Tuple[GramBlock, Polynomial]]) -> List[SosTerm]:
    return [SosTerm(gram=block.gram_value(), basis=block.basis, factor=factor) for block, factor in blocks]


def _solve_identity(
    name: str,
    nvars: int,
    target: Polynomial,
    multipliers: Sequence[Tuple[int, Polynomial]],
    tol: float,
    solver: Optional[str],
) -> Tuple[str, Optional[List[SosTerm]]]:
    """Find sos σ_j of the given degrees with target = Σ σ_j·factor_j."""
    prog = ConicProgram(name=name)
    blocks: List[Tuple[GramBlock, Polynomial]] = []
    identity = None
    for index, (degree, factor) in enumerate(multipliers):
        block = new_sos_polynomial(prog=prog, nvars=nvars, degree=degree, name=f"sigma{index}")
        blocks.append((block, factor))
        product = block.polynomial * factor
        identity = product if identity is None else identity + product

    prog.add(*identity.equal_to(target))
    outcome = solve(prog=prog, tol=tol, solver=solver)
    LOGGER.debug(f"{name}: {colored_status(outcome.status.value)}")
    if outcome.status is not SolveStatus.OPTIMAL:
        return outcome.status.value, None
    return outcome.status.value, _terms_from_blocks(blocks=blocks)


def _certificate(
    kind: str, nvars: int, level: int, tol: float, target: Polynomial, terms: List[SosTerm], **metadata: Any
) -> SosCertificate:
    certificate = SosCertificate(
        kind=kind, nvars=nvars, level=level, tol=RESIDUAL_FACTOR * tol, target=target, terms=terms, metadata=metadata
    )
    certificate.residual = certificate.compute_residual()
    return certificate


@dataclass
class CoercivityCertificate:
    """
    −1 = σ₀ + σ₁(γ − p) + σ₂(Σx_i² − γ^{2r} − 2^r) + σ₃(γ − p)(Σx_i² − γ^{2r} − 2^r)
    in the variables (x, γ).

    Every γ-sublevel set of p then lies in the ball of radius √(γ^{2r} + 2^r).
    """

    level: int
    certificate: SosCertificate

    def sublevel_radius(self, gamma: float) -> float:
        return math.sqrt(gamma ** (2 * self.level) + 2**self.level)

    def to_json(self) -> Dict[str, Any]:
        return {"certified": True, "level": self.level, "certificate": self.certificate.to_json()}


def coercivity_multipliers(p: Polynomial, level: int) -> List[Tuple[int, Polynomial]]:
    """(degree bound, factor) pairs of the level-r identity, in n + 1 variables with γ last."""
    nvars = p.nvars + 1
    lifted = p.embed(nvars=nvars)
    gamma = Polynomial.variable(index=p.nvars, nvars=nvars)
    ball = sum((xi * xi for xi in Polynomial.variables(nvars=nvars)[: p.nvars]), Polynomial.zero(nvars=nvars))
    ball = ball - gamma ** (2 * level) - 2**level
    sublevel = gamma - lifted
    degree = int(p.degree())
    return [
        (_even_floor(4 * level), Polynomial.constant(value=1, nvars=nvars)),
        (_even_floor(4 * level - degree), sublevel),
        (_even_floor(2 * level), ball),
        (_even_floor(2 * level - degree), sublevel * ball),
    ]


def certify_coercive(
    p: Polynomial, r_max: int = DEFAULT_R_MAX, tol: float = DEFAULT_TOL, solver: Optional[str] = None
) -> Union[CoercivityCertificate, Unknown]:
    if r_max < 1:
        raise ValueError(f"r_max must be at least 1, got {r_max}")

    nvars = p.nvars + 1
    target = Polynomial.constant(value=-1, nvars=nvars)
    attempts: List[LevelAttempt] = []
    for level in range(1, r_max + 1):
        status, terms = _solve_identity(
            name=f"coercive-r{level}",
            nvars=nvars,
            target=target,
            multipliers=coercivity_multipliers(p=p, level=level),
            tol=tol,
            solver=solver,
        )
        attempts.append(LevelAttempt(level=level, status=status))
        if terms is not None:
            LOGGER.info(f"coercivity certified at level {level}")
            certificate = _certificate(
                kind=COERCIVE_STR, nvars=nvars, level=level, tol=tol, target=target, terms=terms, polynomial=p.to_json()
            )
            return CoercivityCertificate(level=level, certificate=certificate)

    return Unknown(levels=attempts)


@dataclass(frozen=True)
class RadiusBound:
    """√n · multiplier · 2^exponent, with the power of two kept unevaluated."""

    n: int
    multiplier: int
    exponent: int

    @property
    def expression(self) -> sympy.Expr:
        return sympy.Mul(
            sympy.sqrt(self.n),
            sympy.Integer(self.multiplier),
            sympy.Pow(2, self.exponent, evaluate=False),
            evaluate=False,
        )

    def log2(self) -> float:
        return math.log2(self.n) / 2 + math.log2(self.multiplier) + self.exponent

    def numeric(self) -> float:
        """Float value, or inf when it overflows."""
        if self.log2() >= 1023:
            return float("inf")
        return math.sqrt(self.n) * self.multiplier * 2.0**self.exponent

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "multiplier": self.multiplier,
            "exponent": self.exponent,
            "expression": f"sqrt({self.n})*{self.multiplier}*2**{self.exponent}",
            "log2": self.log2(),
        }


def radius_bound(n: int, d: int, tau: int, m: int) -> RadiusBound:
    """Radius of a ball containing any bounded set {q_i ≥ 0} of m degree-d constraints with τ-bit coefficients."""
    if any(not isinstance(val, int) or val < 1 for val in (n, d, tau, m)):
        raise ValueError(f"radius_bound needs positive integers, got n={n} d={d} tau={tau} m={m}")

    base = (2 * d + 1) * (2 * d) ** (n - 1)
    exponent = base * (2 * n * d + 2) * (2 * tau + bitsize(base) + (n + 1) * bitsize(d + 1) + bitsize(m))
    return RadiusBound(n=n, multiplier=base + 1, exponent=exponent)


def coefficient_bitsize(polys: Sequence[Polynomial]) -> int:
    sizes = [
        bitsize(abs(part))
        for poly in polys
        for coeff in poly.terms.values()
        for part in (coeff.numerator, coeff.denominator)
        if part
    ]
    return max(sizes, default=1)


@dataclass
class CompactnessCertificate:
    """−1 = Σ_h σ_h Π q_i^{h_i} with q₀ = Σx_i² − R − 1; the set then lies in {Σx_i² < R + 1}."""

    radius: float
    level: int
    certificate: SosCertificate

    def to_json(self) -> Dict[str, Any]:
        return {
            "certified": True,
            "radius": self.radius,
            "level": self.level,
            "certificate": self.certificate.to_json(),
        }


def stengle_products(qs: Sequence[Polynomial], radius: float) -> List[Tuple[Tuple[int, ...], Polynomial]]:
    nvars = qs[0].nvars
    squares = sum((xi * xi for xi in Polynomial.variables(nvars=nvars)), Polynomial.zero(nvars=nvars))
    q0 = squares - to_fraction(radius) - 1
    factors = [q0, *qs]
    products = []
    for h in itertools.product((0, 1), repeat=len(factors)):
        product = Polynomial.constant(value=1, nvars=nvars)
        for bit, factor in zip(h, factors):
            if bit:
                product = product * factor
        products.append((h, product))
    return products


def certify_compact(
    qs: Sequence[Polynomial],
    R: Optional[float] = None,
    r_max: int = DEFAULT_R_MAX,
    tol: float = DEFAULT_TOL,
    solver: Optional[str] = None,
) -> Union[CompactnessCertificate, Unknown]:
    """
    Stengle hierarchy for compactness of {q_i ≥ 0}. Without R the radius bound is used when it fits in a
    float; otherwise an explicit R is required.
    """
    if not qs:
        raise ValueError("certify_compact needs at least one constraint")
    if len(qs) > MAX_STENGLE_CONSTRAINTS:
        raise TooManyConstraintsError(
            f"{len(qs)} constraints need 2^{len(qs) + 1} products, limit is {MAX_STENGLE_CONSTRAINTS}"
        )
    if r_max < 1:
        raise ValueError(f"r_max must be at least 1, got {r_max}")

    if R is None:
        bound = radius_bound(
            n=qs[0].nvars, d=max(int(q.degree()) for q in qs if not q.is_zero()), tau=coefficient_bitsize(qs), m=len(qs)
        )
        R = bound.numeric()
        LOGGER.info(f"radius bound has log2 {bound.log2():.1f}")
        if not math.isfinite(R):
            raise ValueError(f"Radius bound 2^{bound.log2():.0f} has no numeric stand-in, pass an explicit R")

    nvars = qs[0].nvars
    target = Polynomial.constant(value=-1, nvars=nvars)
    products = stengle_products(qs=qs, radius=R)
    attempts: List[LevelAttempt] = []
    for level in range(1, r_max + 1):
        status, terms = _solve_identity(
            name=f"compact-r{level}",
            nvars=nvars,
            target=target,
            multipliers=[(2 * level, product) for _, product in products],
            tol=tol,
            solver=solver,
        )
        attempts.append(LevelAttempt(level=level, status=status))
        if terms is not None:
            certificate = _certificate(
                kind=COMPACT_STR,
                nvars=nvars,
                level=level,
                tol=tol,
                target=target,
                terms=terms,
                radius=R,
                subsets=[list(h) for h, _ in products],
            )
            return CompactnessCertificate(radius=R, level=level, certificate=certificate)

    return Unknown(levels=attempts)


@dataclass
class ArchimedeanCertificate:
    """R − Σx_i² = τ₀ + Σ τ_i q_i with sos τ_i."""

    radius: float
    degree: int
    certificate: SosCertificate

    def multiplier_grams(self) -> List[np.ndarray]:
        return [term.gram for term in self.certificate.terms]

    def to_json(self) -> Dict[str, Any]:
        return {
            "certified": True,
            "radius": self.radius,
            "degree": self.degree,
            "certificate": self.certificate.to_json(),
        }


def archimedean_search(
    qs: Sequence[Polynomial], R: float, degree: int = 2, tol: float = DEFAULT_TOL, solver: Optional[str] = None
) -> Union[ArchimedeanCertificate, Unknown]:
    """Each τ_i has the largest even degree with deg(τ_i·q_i) ≤ degree; τ_i with no room is dropped."""
    if degree < 0 or degree % 2:
        raise ValueError(f"degree must be a nonnegative even integer, got {degree}")
    if not qs:
        raise ValueError("archimedean_search needs at least one constraint")

    nvars = qs[0].nvars
    target = to_fraction(R) - sum((xi * xi for xi in Polynomial.variables(nvars=nvars)), Polynomial.zero(nvars=nvars))
    multipliers = [(degree, Polynomial.constant(value=1, nvars=nvars))]
    multipliers.extend((_even_floor(degree - int(q.degree())), q) for q in qs if degree >= q.degree())

    status, terms = _solve_identity(
        name=f"archimedean-d{degree}", nvars=nvars, target=target, multipliers=multipliers, tol=tol, solver=solver
    )
    if terms is None:
        return Unknown(levels=[LevelAttempt(level=degree, status=status)])

    certificate = _certificate(
        kind=ARCHIMEDEAN_STR, nvars=nvars, level=degree, tol=tol, target=target, terms=terms, radius=R
    )
    return ArchimedeanCertificate(radius=R, degree=degree, certificate=certificate)


def cubic_sos_certificate(c: CubicCanonical, result: CubicSosResult, tol: float = DEFAULT_TOL) -> SosCertificate:
    """p − γ* = σ + Tr(S·∇²p) from a solved cubic sos relaxation."""
    if result.gamma is None or result.sigma is None or result.sos_matrix is None:
        raise CertificateFormatError("The cubic sos relaxation has no optimal solution to certify")

    p = c.to_polynomial()
    terms = [
        SosTerm(
            gram=result.sigma.gram_value(), basis=result.sigma.basis, factor=Polynomial.constant(value=1, nvars=c.n)
        ),
        SosTerm(gram=result.sos_matrix.gram_value(), basis=result.sos_matrix.basis, factor_matrix=p.hessian()),
    ]
    target = p - to_fraction(result.gamma)
    return _certificate(kind=CUBIC_SOS_STR, nvars=c.n, level=1, tol=tol, target=target, terms=terms, gamma=result.gamma)
