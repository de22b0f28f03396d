"""Symbol extraction, parabolicity, and the two Monge-Ampere tests.

The symbol of u_t = G(x, t, u, grad u, Hess u) is the quadratic form
sigma(xi) = sum dG/du_I * xi^I over the second-order jet coordinates; it is
assembled into a symmetric matrix with the 1/2 factor on off-diagonal
entries (unordered-pair Hessian coordinates) so that sigma agrees with the
epsilon-derivative definition below.

Two Monge-Ampere verdicts are computed and reported side by side:

* minor affinity -- the quartic form q(xi) = d^2/de^2 G(..., u_ij + e xi_i xi_j)
  vanishes identically, which happens exactly when G is a combination of
  Hessian minor determinants with coefficients in first-order data;
* the traceless residue -- the part of q(xi) not divisible by sigma(xi),
  i.e. the totally symmetric component of the secondary invariant.  Its
  vanishing is the condition for a Monge-Ampere deprolongation, and it is
  strictly weaker than minor affinity (Laplacian-squared reaction terms
  pass it while failing the literal minor test).

Parabolicity and the residue are certified at a user-supplied reference
2-jet; global positivity of a symbolic matrix is not decided here.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import linalg
from .expr import (
    BASE, JET, Expr, ONE, Rationalish, Symbol, ZERO, aux_var, jet_var,
)

__all__ = [
    "PreconditionSpatialDim", "SingularSymbol",
    "Parabolicity", "EvolutionEquation", "SymbolForm", "MAReport",
    "symbol_form", "parabolicity_check", "quartic_form",
    "is_minor_affine", "ma_traceless_residue", "ma_classify",
    "xi_symbols",
]


class PreconditionSpatialDim(ValueError):
    """The traceless-residue test needs n >= 2."""


class SingularSymbol(ArithmeticError):
    """The symbol matrix is not invertible at the reference jet."""


class Parabolicity(str, enum.Enum):
    STRICT = "strict"
    WEAK = "weak"
    NOT_PARABOLIC = "not_parabolic"


# ---------------------------------------------------------------------------
# Evolution equations
# ---------------------------------------------------------------------------

class EvolutionEquation:
    """u_t = G(x^a, u, du/dx^i, d2u/dx^i dx^j) with a chosen reference 2-jet.

    G must be purely spatial of jet order <= 2; every symbol of G gets a
    rational reference value (default 0) at which pointwise certificates
    (parabolicity, symbol inversion) are computed.  Instances are immutable
    by convention and safe to share.
    """

    def __init__(self, n: int, G: Expr,
                 reference_jet: Mapping[Symbol, Rationalish] | None = None):
        if n < 1:
            raise ValueError("spatial dimension n must be >= 1")
        for s in G.symbols():
            if s.kind == BASE:
                if s.index > n:
                    raise ValueError(f"base coordinate {s} out of range for n={n}")
            elif s.kind == JET:
                if s.jet.time_power > 0:
                    raise ValueError(f"G must not contain time jets ({s})")
                if s.jet.order > 2:
                    raise ValueError(f"G must have jet order <= 2 ({s})")
                if any(i > n for i in s.jet.spatial):
                    raise ValueError(f"jet index {s} out of range for n={n}")
            else:
                raise ValueError(f"G may not contain {s.kind} symbols ({s})")
        self.n = n
        self.G = G
        ref: dict[Symbol, Fraction] = {}
        provided = dict(reference_jet or {})
        for s in sorted(G.symbols()):
            ref[s] = Fraction(provided.pop(s, 0))
        for s, v in provided.items():
            ref[s] = Fraction(v)  # harmless extra bindings
        self.reference_jet = ref

    def hessian_entry(self, i: int, j: int) -> Symbol:
        return jet_var((i, j) if i <= j else (j, i))

    def __repr__(self) -> str:
        return f"EvolutionEquation(n={self.n}, u_t = {self.G})"


# ---------------------------------------------------------------------------
# Symbol form and parabolicity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolForm:
    """Symmetric symbol matrix g with g^ii = dG/du_ii, g^ij = (1/2) dG/du_ij."""

    n: int
    g: tuple[tuple[Expr, ...], ...]

    def sigma(self) -> Expr:
        """The symbol quadratic form sum g^ij xi_i xi_j in the xi auxiliaries."""
        xi = xi_symbols(self.n)
        out = ZERO
        for i in range(self.n):
            for j in range(self.n):
                out = out + self.g[i][j] * Expr.symbol(xi[i]) * Expr.symbol(xi[j])
        return out

    def at_reference(self, reference_jet: Mapping[Symbol, Fraction]) -> list[list[Fraction]]:
        return [[entry.eval_fraction(reference_jet) for entry in row]
                for row in self.g]


def xi_symbols(n: int) -> list[Symbol]:
    """The auxiliary indeterminates xi_1..xi_n of the quartic and symbol forms."""
    return [aux_var(i, f"xi{i}") for i in range(1, n + 1)]


def symbol_form(eq: EvolutionEquation) -> SymbolForm:
    rows = []
    for i in range(1, eq.n + 1):
        row = []
        for j in range(1, eq.n + 1):
            d = eq.G.diff(eq.hessian_entry(i, j))
            row.append(d if i == j else d / 2)
        rows.append(tuple(row))
    return SymbolForm(eq.n, tuple(rows))


def _det(matrix: list[list[Fraction]]) -> Fraction:
    m = [row[:] for row in matrix]
    size = len(m)
    det = Fraction(1)
    for col in range(size):
        piv = next((r for r in range(col, size) if m[r][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, size):
            if m[r][col]:
                factor = m[r][col] * inv
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return det


def parabolicity_check(eq: EvolutionEquation) -> Parabolicity:
    """Classify the symbol at the reference jet, exactly.

    Strict = positive definite (Sylvester: leading principal minors > 0);
    weak = positive semidefinite but not definite (all principal minors >= 0);
    otherwise not parabolic.
    """
    g = symbol_form(eq).at_reference(eq.reference_jet)
    n = eq.n
    strict = all(_det([row[:k] for row in g[:k]]) > 0 for k in range(1, n + 1))
    if strict:
        return Parabolicity.STRICT
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            minor = [[g[r][c] for c in subset] for r in subset]
            if _det(minor) < 0:
                return Parabolicity.NOT_PARABOLIC
    return Parabolicity.WEAK


# ---------------------------------------------------------------------------
# Monge-Ampere tests
# ---------------------------------------------------------------------------

def quartic_form(eq: EvolutionEquation) -> Expr:
    """Second derivative of G along the rank-one Hessian direction xi xi^T:
    q(xi) = d^2/de^2 G(..., u_ij + e xi_i xi_j) at e = 0, a quartic in xi."""
    xi = xi_symbols(eq.n)
    eps = aux_var(0, "eps")
    eps_e = Expr.symbol(eps)
    bindings = {}
    for i in range(1, eq.n + 1):
        for j in range(i, eq.n + 1):
            s = eq.hessian_entry(i, j)
            bindings[s] = Expr.symbol(s) + eps_e * Expr.symbol(xi[i - 1]) * Expr.symbol(xi[j - 1])
    perturbed = eq.G.substitute(bindings)
    return perturbed.diff(eps).diff(eps).substitute({eps: 0})


def is_minor_affine(eq: EvolutionEquation) -> bool:
    """True iff the quartic form vanishes identically, i.e. G is a
    combination of Hessian minors with coefficients in first-order data."""
    return quartic_form(eq).is_zero


def _invert_matrix(g: list[list[Expr]]) -> list[list[Expr]]:
    n = len(g)
    cols = []
    for j in range(n):
        rhs = [ONE if i == j else ZERO for i in range(n)]
        col = linalg.solve_dense([list(row) for row in g], rhs, ZERO)
        if col is None:
            raise SingularSymbol("symbol matrix is singular")
        cols.append(col)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _trace_with(ginv: list[list[Expr]], P: Expr, xi: list[Symbol]) -> Expr:
    out = ZERO
    for i in range(len(xi)):
        for j in range(len(xi)):
            if ginv[i][j].is_zero:
                continue
            out = out + ginv[i][j] * P.diff(xi[i]).diff(xi[j])
    return out


def _residue_decomposition(eq: EvolutionEquation, symbolic: bool = False
                           ) -> tuple[Expr, Expr, Expr]:
    """(q0, h, sigma) with q = q0 + sigma * h and tr_g(q0) = 0."""
    if eq.n < 2:
        raise PreconditionSpatialDim("traceless residue needs n >= 2")
    n = eq.n
    xi = xi_symbols(n)
    q = quartic_form(eq)
    sf = symbol_form(eq)
    if symbolic:
        g = [list(row) for row in sf.g]
    else:
        ref = eq.reference_jet
        g = [[Expr.const(entry.eval_fraction(ref)) for entry in row] for row in sf.g]
        q = q.substitute(ref)
    ginv = _invert_matrix(g)

    sigma = ZERO
    for i in range(n):
        for j in range(n):
            sigma = sigma + g[i][j] * Expr.symbol(xi[i]) * Expr.symbol(xi[j])

    pairs = [(k, l) for k in range(n) for l in range(k, n)]
    pair_monos = []
    for k, l in pairs:
        if k == l:
            pair_monos.append(((xi[k], 2),))
        else:
            pair_monos.append(((xi[k], 1), (xi[l], 1)))

    # tr_g(q - sigma*h) = 0, linear in the n(n+1)/2 unknown h_kl
    target = _trace_with(ginv, q, xi).poly_coefficients(xi)
    matrix = []
    rhs = []
    columns = []
    for k, l in pairs:
        basis = Expr.symbol(xi[k]) * Expr.symbol(xi[l])
        columns.append(_trace_with(ginv, sigma * basis, xi).poly_coefficients(xi))
    for mono in pair_monos:
        matrix.append([colmap.get(mono, ZERO) for colmap in columns])
        rhs.append(target.get(mono, ZERO))
    coeffs = linalg.solve_dense(matrix, rhs, ZERO)
    if coeffs is None:
        raise SingularSymbol("trace equations are singular (degenerate symbol)")

    h = ZERO
    for (k, l), c in zip(pairs, coeffs):
        h = h + c * Expr.symbol(xi[k]) * Expr.symbol(xi[l])
    q0 = q - sigma * h
    return q0, h, sigma


def ma_traceless_residue(eq: EvolutionEquation, symbolic: bool = False) -> Expr:
    """The g-traceless part q0 of the quartic form: q = q0 + sigma * h with
    tr_g(q0) = 0.  q0 vanishes iff q is divisible by sigma.

    By default the symbol and the quartic coefficients are evaluated at the
    reference jet (enough to falsify Monge-Ampere-ness); ``symbolic=True``
    solves the trace equations over the full rational-function field.
    """
    return _residue_decomposition(eq, symbolic)[0]


@dataclass(frozen=True)
class MAReport:
    """Both Monge-Ampere verdicts, reported without collapsing them."""

    minor_affine: bool
    quartic: Expr
    traceless_residue: Expr | None
    residue_vanishes: bool | None
    n1_affine: bool | None
    singular_symbol: bool = False

    def __post_init__(self) -> None:
        if self.minor_affine and self.residue_vanishes is False:
            raise AssertionError("minor-affine equation with nonzero residue")


def ma_classify(eq: EvolutionEquation, symbolic: bool = False) -> MAReport:
    """Run the applicable Monge-Ampere tests.

    For n = 1 the residue test degenerates (there is no nonzero traceless
    quartic in one variable) and the affine-in-u_xx criterion is reported
    instead; for n >= 2 both the literal minor-affinity test and the
    traceless-residue test run.  A singular symbol at the reference jet is
    reported as a flag, not an error.
    """
    q = quartic_form(eq)
    minor = q.is_zero
    if eq.n == 1:
        uxx = jet_var((1, 1))
        n1 = eq.G.diff(uxx).diff(uxx).is_zero
        return MAReport(minor, q, None, None, n1)
    try:
        q0 = ma_traceless_residue(eq, symbolic)
    except SingularSymbol:
        return MAReport(minor, q, None, None, None, singular_symbol=True)
    return MAReport(minor, q, q0, q0.is_zero, None)
