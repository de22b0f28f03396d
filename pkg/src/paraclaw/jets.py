"""Jet-coordinate bookkeeping: total derivatives, prolongation tables, the
spatial Euler operator, divergence inversion, and tableau dimension counts.

Conventions.  Direction 0 is time; spatial directions are 1..n.  A jet
variable u_{I,t} is the coordinate p_{I,t} for the derivative D_I D_0^t u,
stored as a :class:`~paraclaw.expr.MultiIndex`.  "Purely spatial" means
``time_power == 0`` for every jet variable in sight; on an evolution
equation u_t = G those are free coordinates on the equation manifold and
every time jet is eliminated through the replacement table below.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import TYPE_CHECKING, Sequence

from . import linalg
from .expr import (
    BASE, JET, Expr, Monomial, MultiIndex, NotPolynomialIn, Poly, Symbol, ZERO,
    aux_var, base_var, jet_symbol, jet_var, mono_sort_key, poly_coefficients,
)

if TYPE_CHECKING:  # EvolutionEquation lives in .parabolic; only n and G are used here
    from .parabolic import EvolutionEquation

__all__ = [
    "OrderOverflow", "TableTooShallow", "TimeJetPresent", "NotInDivergenceImage",
    "ORDER_GUARD", "DegreeBounds", "ReplacementTable",
    "total_derivative", "iterated_total_derivative",
    "build_replacement_table", "reduce_to_spatial",
    "euler_operator", "invert_divergence",
    "tableau_dimension", "parabolic_system_dimension", "deprolongation_dimension",
    "jet_symbols_of", "spatial_jet_order", "has_time_jets",
    "spatial_jet_vars", "bounded_monomials",
]

ORDER_GUARD = 12
FLUX_ANSATZ_GUARD = 20000


class OrderOverflow(ValueError):
    """Requested prolongation order exceeds the configured guard."""


class TableTooShallow(KeyError):
    """A replacement-table entry beyond the table's max order was requested."""


class TimeJetPresent(ValueError):
    """An operation requiring purely spatial input met a time jet."""


class NotInDivergenceImage(ValueError):
    """No flux within the degree bounds has the requested divergence."""


# ---------------------------------------------------------------------------
# Total derivatives
# ---------------------------------------------------------------------------

def jet_symbols_of(e: Expr) -> list[Symbol]:
    return sorted(s for s in e.symbols() if s.kind == JET)


def has_time_jets(e: Expr) -> bool:
    return any(s.kind == JET and s.jet.time_power > 0 for s in e.symbols())


def spatial_jet_order(e: Expr) -> int:
    """Largest jet order occurring in e (0 when no jet variable occurs)."""
    return max((s.jet.order for s in e.symbols() if s.kind == JET), default=0)


def total_derivative(e: Expr, a: int) -> Expr:
    """Total derivative D_a e = de/dx^a + sum_J u_{Ja} * de/du_J.

    Treats jet coordinates as functions of the base coordinates; direction
    a = 0 is time.  Raises the jet order by at most one.
    """
    out = e.diff(base_var(a))
    for s in jet_symbols_of(e):
        d = e.diff(s)
        if not d.is_zero:
            out = out + Expr.symbol(jet_symbol(s.jet.append(a))) * d
    return out


def iterated_total_derivative(e: Expr, index: MultiIndex) -> Expr:
    """Composition of total derivatives over all entries of ``index``.

    Total derivatives commute, so the application order (spatial ascending,
    then time) is a determinism convention only.
    """
    for i in index.spatial:
        e = total_derivative(e, i)
    for _ in range(index.time_power):
        e = total_derivative(e, 0)
    return e


# ---------------------------------------------------------------------------
# Replacement tables (prolonged equation, solved for time jets)
# ---------------------------------------------------------------------------

class ReplacementTable:
    """Cache of time-jet eliminations for one evolution equation.

    ``entry((I, t))`` with t >= 1 is D_I D_0^(t-1) G with every intermediate
    time jet eliminated, i.e. a purely spatial expression equal to u_{I,t}
    modulo the prolonged equation ideal.  Entries are memoized; the table is
    immutable once an entry is computed and safe to share afterwards.
    """

    def __init__(self, equation: "EvolutionEquation", max_order: int):
        self.equation = equation
        self.max_order = max_order
        self._cache: dict[MultiIndex, Expr] = {}

    def entry(self, index: MultiIndex) -> Expr:
        if index.time_power < 1:
            raise ValueError("replacement entries need time_power >= 1")
        if index.order > self.max_order:
            raise TableTooShallow(
                f"entry {index} has order {index.order} > max_order {self.max_order}")
        return self._compute(index)

    def _compute(self, index: MultiIndex) -> Expr:
        got = self._cache.get(index)
        if got is not None:
            return got
        if index.spatial:
            parent = MultiIndex(index.spatial[:-1], index.time_power)
            value = total_derivative(self._compute(parent), index.spatial[-1])
        elif index.time_power == 1:
            value = self.equation.G
        else:
            raw = total_derivative(
                self._compute(MultiIndex((), index.time_power - 1)), 0)
            value = self._eliminate(raw)
        self._cache[index] = value
        return value

    def _eliminate(self, e: Expr) -> Expr:
        bindings = {}
        for s in e.symbols():
            if s.kind == JET and s.jet.time_power > 0:
                bindings[s] = self._compute(s.jet)
        return e.substitute(bindings) if bindings else e


def build_replacement_table(equation: "EvolutionEquation", max_order: int,
                            guard: int = ORDER_GUARD) -> ReplacementTable:
    """Replacement table covering every (I, t), t >= 1, of order <= max_order."""
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    if max_order > guard:
        raise OrderOverflow(f"max_order {max_order} exceeds guard {guard}")
    return ReplacementTable(equation, max_order)


def reduce_to_spatial(e: Expr, table: ReplacementTable) -> Expr:
    """Eliminate every time jet of e through the table (restriction to the
    prolonged equation manifold)."""
    bindings = {}
    for s in e.symbols():
        if s.kind == JET and s.jet.time_power > 0:
            bindings[s] = table.entry(s.jet)
    if not bindings:
        return e
    return e.substitute(bindings)


# ---------------------------------------------------------------------------
# Euler operator and divergence inversion
# ---------------------------------------------------------------------------

def euler_operator(e: Expr) -> Expr:
    """Spatial variational derivative sum_I (-1)^|I| D_I (de/du_I).

    The sum runs over the spatial multi-indices whose jet variable occurs in
    e, each distinct multi-index counted once (no combinatorial factor).  On
    the polynomial fragment its kernel is exactly the total spatial
    divergences.
    """
    if has_time_jets(e):
        raise TimeJetPresent("euler_operator needs a purely spatial expression")
    bad = [s for s in e.den.symbols() if s.kind == JET]
    if bad:
        raise NotPolynomialIn(bad)
    total = ZERO
    for s in jet_symbols_of(e):
        d = e.diff(s)
        if d.is_zero:
            continue
        term = iterated_total_derivative(d, MultiIndex(s.jet.spatial, 0))
        if s.jet.spatial_order % 2:
            total = total - term
        else:
            total = total + term
    return total


def spatial_jet_vars(n: int, max_order: int) -> list[Symbol]:
    """All spatial jet variables u_I with |I| <= max_order, in symbol order."""
    out = [jet_var()]
    for order in range(1, max_order + 1):
        for combo in itertools.combinations_with_replacement(range(1, n + 1), order):
            out.append(jet_var(combo))
    return out


def bounded_monomials(symbols: Sequence[Symbol], max_degree: int) -> list[Monomial]:
    """All monomials over ``symbols`` of total degree <= max_degree,
    ascending degree then lexicographic."""
    out: list[Monomial] = [()]
    for deg in range(1, max_degree + 1):
        for combo in itertools.combinations_with_replacement(symbols, deg):
            counts: dict[Symbol, int] = {}
            for s in combo:
                counts[s] = counts.get(s, 0) + 1
            out.append(tuple(sorted(counts.items(), key=lambda p: p[0].key)))
    return out


@dataclass(frozen=True)
class DegreeBounds:
    """Ansatz bounds for flux reconstruction."""

    jet_order: int
    jet_degree: int
    base_degree: int

    def widened(self) -> "DegreeBounds":
        return DegreeBounds(self.jet_order + 1, self.jet_degree + 1,
                            self.base_degree + 1)


def _default_bounds(R: Expr) -> DegreeBounds:
    jets = [s for s in R.symbols() if s.kind == JET]
    bases = [s for s in R.symbols() if s.kind == BASE]
    return DegreeBounds(
        jet_order=max(spatial_jet_order(R) - 1, 0),
        jet_degree=R.num.degree_in(jets) if jets else 0,
        base_degree=(R.num.degree_in(bases) if bases else 0) + 1,
    )


def invert_divergence(R: Expr, n: int, bounds: DegreeBounds | None = None,
                      attempts: int = 3) -> tuple[Expr, ...]:
    """Fluxes X^1..X^n with sum_i D_i X^i = R, exactly.

    Works by a polynomial flux ansatz with undetermined coefficients and an
    exact sparse linear solve; free coefficients are set to zero, so the
    representative is deterministic.  Bounds default to ones derived from R
    and are widened up to ``attempts`` times before giving up with
    :class:`NotInDivergenceImage`.
    """
    if has_time_jets(R):
        raise TimeJetPresent("divergence inversion needs a purely spatial expression")
    if not R.is_polynomial:
        raise NotPolynomialIn(sorted(R.den.symbols()))
    if any(s.kind not in (BASE, JET) for s in R.symbols()):
        raise ValueError("R may contain base and jet symbols only")
    if R.is_zero:
        return (ZERO,) * n

    current = bounds or _default_bounds(R)
    last_reason = "no attempt made"
    for _ in range(attempts):
        monos = _flux_monomials(n, current)
        if n * len(monos) > FLUX_ANSATZ_GUARD:
            last_reason = f"flux ansatz larger than guard ({n * len(monos)} unknowns)"
            break
        solution = _solve_flux(R, n, monos)
        if solution is not None:
            return solution
        last_reason = f"no solution within bounds {current}"
        current = current.widened()
    raise NotInDivergenceImage(last_reason)


def _flux_monomials(n: int, bounds: DegreeBounds) -> list[Monomial]:
    base_syms = [base_var(a) for a in range(n + 1)]
    jet_syms = spatial_jet_vars(n, bounds.jet_order)
    base_part = bounded_monomials(base_syms, bounds.base_degree)
    jet_part = bounded_monomials(jet_syms, bounds.jet_degree)
    out = []
    for jm in jet_part:
        for bm in base_part:
            out.append(tuple(sorted(bm + jm, key=lambda p: p[0].key)))
    return out


def _solve_flux(R: Expr, n: int, monos: list[Monomial]) -> tuple[Expr, ...] | None:
    unknowns: list[Symbol] = []
    fluxes = []
    for i in range(1, n + 1):
        terms = {}
        for mono in monos:
            w = aux_var(len(unknowns) + 1)
            unknowns.append(w)
            terms[tuple(sorted(mono + ((w, 1),), key=lambda p: p[0].key))] = Fraction(1)
        fluxes.append(Expr._make(Poly(terms), Poly.one()))
    divergence = ZERO
    for i, X in enumerate(fluxes, start=1):
        divergence = divergence + total_derivative(X, i)
    residual = divergence - R

    col = {w: k for k, w in enumerate(unknowns)}
    point_vars = [s for s in residual.symbols() if s.kind in (BASE, JET)]
    rows: list[dict] = []
    rhs: list[Fraction] = []
    for _, coeff in sorted(poly_coefficients(residual, point_vars).items(),
                           key=lambda kv: mono_sort_key(kv[0])):
        row: dict = {}
        const = Fraction(0)
        for mono, c in coeff.num.terms.items():
            if not mono:
                const = c
            else:
                (w, _e), = mono
                row[col[w]] = c
        rows.append(row)
        rhs.append(-const)
    sol = linalg.solve_particular(rows, rhs, len(unknowns))
    if sol is None:
        return None
    out = []
    k = 0
    for _ in range(n):
        terms = {}
        for mono in monos:
            if sol[k]:
                terms[mono] = sol[k]
            k += 1
        out.append(Expr._make(Poly(dict(terms)), Poly.one()))
    return tuple(out)


# ---------------------------------------------------------------------------
# Dimension combinatorics
# ---------------------------------------------------------------------------

def _dim_sym_traceless(n: int, s: int) -> int:
    """dim Sym^s_0(R^n): harmonic polynomials of degree s in n variables."""
    first = comb(n + s - 1, s)
    second = comb(n + s - 3, s - 2) if s >= 2 else 0
    return first - second


def tableau_dimension(n: int, r: int) -> int:
    """Dimension of the r-th tableau prolongation: the kernel of the spatial
    trace Sym^(r+2)(R^(n+1)) -> Sym^r(R^(n+1)), which splits as a sum of
    traceless spatial components up to degree r + 2."""
    if n < 1 or r < 0:
        raise ValueError("need n >= 1 and r >= 0")
    return sum(_dim_sym_traceless(n, s) for s in range(r + 3))


def parabolic_system_dimension(n: int) -> int:
    """Dimension of the exterior differential system encoding an
    (n+1)-variable second-order parabolic equation (one less than dim J^2)."""
    if n < 1:
        raise ValueError("need n >= 1")
    return 2 * n + 2 + (n + 1) * (n + 2) // 2


def deprolongation_dimension(n: int) -> int:
    """Dimension of the quasi-parabolic Monge-Ampere system whose
    prolongation recovers the parabolic system."""
    if n < 1:
        raise ValueError("need n >= 1")
    return 2 * n + 3
