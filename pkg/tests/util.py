"""Shared builders and randomized property suites for the test modules.

The suites here are imported both by the per-module tests and by the
acceptance module (which runs each at >= 100 cases).  All randomness is
seeded; all assertions are exact.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from paraclaw import linalg
from paraclaw.claws import AnsatzSpec, cross_validate_ma, find_conservation_laws, verify
from paraclaw.expr import Expr, Symbol, ZERO, base_var, jet_var
from paraclaw.jets import (
    euler_operator, invert_divergence, spatial_jet_vars, total_derivative,
)
from paraclaw.corpus import CORPUS

t = Expr.symbol(base_var(0))
x = Expr.symbol(base_var(1))
x1, x2 = x, Expr.symbol(base_var(2))
u = Expr.symbol(jet_var())
ux = u1 = Expr.symbol(jet_var((1,)))
u2 = Expr.symbol(jet_var((2,)))
uxx = u11 = Expr.symbol(jet_var((1, 1)))
u12 = Expr.symbol(jet_var((1, 2)))
u22 = Expr.symbol(jet_var((2, 2)))
uxxx = Expr.symbol(jet_var((1, 1, 1)))


def jet(*idx, tp: int = 0) -> Expr:
    return Expr.symbol(jet_var(idx, tp))


def random_poly(rng: random.Random, symbols: list[Symbol], terms: int = 4,
                max_exp: int = 2, coeff: int = 5) -> Expr:
    """Random nonzero polynomial with small integer coefficients."""
    while True:
        acc = ZERO
        for _ in range(rng.randint(1, terms)):
            c = rng.randint(-coeff, coeff)
            term = Expr.const(c)
            for s in rng.sample(symbols, rng.randint(0, min(3, len(symbols)))):
                term = term * Expr.symbol(s) ** rng.randint(1, max_exp)
            acc = acc + term
        if not acc.is_zero:
            return acc


def random_spatial_symbols(n: int, max_order: int = 2) -> list[Symbol]:
    return [base_var(a) for a in range(n + 1)] + spatial_jet_vars(n, max_order)


# ---------------------------------------------------------------------------
# Property suites (exact, seeded)
# ---------------------------------------------------------------------------

def suite_commutativity(cases: int = 100, seed: int = 7) -> int:
    """D_a D_b = D_b D_a on random polynomial expressions."""
    rng = random.Random(seed)
    done = 0
    for _ in range(cases):
        n = rng.choice((1, 2))
        e = random_poly(rng, random_spatial_symbols(n))
        a = rng.randint(0, n)
        b = rng.randint(0, n)
        lhs = total_derivative(total_derivative(e, a), b)
        rhs = total_derivative(total_derivative(e, b), a)
        assert lhs == rhs, f"D_{a} D_{b} failed on {e}"
        done += 1
    return done


def suite_euler_kills_divergences(cases: int = 100, seed: int = 11) -> int:
    """E_u(sum_i D_i X^i) = 0 for random polynomial fluxes."""
    rng = random.Random(seed)
    done = 0
    for _ in range(cases):
        n = rng.choice((1, 2))
        syms = random_spatial_symbols(n)
        div = ZERO
        for i in range(1, n + 1):
            div = div + total_derivative(random_poly(rng, syms), i)
        assert euler_operator(div).is_zero, f"euler did not kill divergence (n={n})"
        done += 1
    return done


def suite_divergence_roundtrip(cases: int = 100, seed: int = 13) -> int:
    """invert_divergence returns fluxes whose divergence is exactly R."""
    rng = random.Random(seed)
    done = 0
    for k in range(cases):
        n = 2 if k % 5 == 0 else 1
        order = 1 if n == 2 else rng.choice((1, 2))
        syms = random_spatial_symbols(n, order)
        R = ZERO
        for i in range(1, n + 1):
            R = R + total_derivative(random_poly(rng, syms, terms=3), i)
        X = invert_divergence(R, n)
        back = ZERO
        for i, Xi in enumerate(X, start=1):
            back = back + total_derivative(Xi, i)
        assert back == R, f"roundtrip failed for R = {R}"
        done += 1
    return done


def suite_triviality_filter(cases: int = 100, seed: int = 17) -> int:
    """Densities that are total spatial divergences have characteristic 0."""
    rng = random.Random(seed)
    done = 0
    for _ in range(cases):
        S = random_poly(rng, [base_var(1), jet_var(), jet_var((1,))])
        T = total_derivative(S, 1)
        assert euler_operator(T).is_zero, f"divergence density not filtered: S={S}"
        done += 1
    return done


def corpus_specs(rng: random.Random, n: int) -> AnsatzSpec:
    if n == 1:
        return AnsatzSpec(max_jet_order=rng.choice((1, 2)),
                          jet_degree=rng.choice((1, 2)),
                          base_degree=rng.choice((0, 1, 2)))
    return AnsatzSpec(max_jet_order=rng.choice((1, 2)),
                      jet_degree=1,
                      base_degree=rng.choice((0, 1)))


def suite_solver_soundness(cases: int = 100, seed: int = 19) -> int:
    """Every law produced by the finder verifies exactly (randomized bounds
    over the built-in corpus)."""
    rng = random.Random(seed)
    done = 0
    entries = [e for e in CORPUS]
    while done < cases:
        entry = rng.choice(entries)
        eq = entry.equation()
        spec = corpus_specs(rng, eq.n)
        laws = find_conservation_laws(eq, spec)
        for law in laws:
            assert law.X is not None, f"flux missing for {entry.name}"
            assert verify(eq, law), f"law fails to verify for {entry.name}: T={law.T}"
            assert not law.Q.is_zero
        done += 1
    return done


def suite_cross_validation() -> int:
    """cross_validate_ma reports zero violations over the whole corpus."""
    checked = 0
    for entry in CORPUS:
        eq = entry.equation()
        spec = AnsatzSpec(max_jet_order=2, jet_degree=1,
                          base_degree=2 if eq.n == 1 else 1)
        laws = find_conservation_laws(eq, spec)
        result = cross_validate_ma(eq, laws)
        assert result.consistent, f"violation on {entry.name}: {result.detail}"
        checked += 1
    assert checked >= 10
    return checked


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------

def trace_matrix_nullity(n: int, r: int) -> int:
    """Null-space dimension of the spatial trace Sym^(r+2) R^(n+1) -> Sym^r,
    computed from the explicit matrix (independent of tableau_dimension)."""
    k = r + 2
    source = list(itertools.combinations_with_replacement(range(n + 1), k))
    target = {mi: j for j, mi in
              enumerate(itertools.combinations_with_replacement(range(n + 1), r))}
    rows: list[dict] = [dict() for _ in target] or []
    for colidx, mi in enumerate(source):
        counts = {}
        for a in mi:
            counts[a] = counts.get(a, 0) + 1
        for i in range(1, n + 1):
            m = counts.get(i, 0)
            if m < 2:
                continue
            reduced = list(mi)
            reduced.remove(i)
            reduced.remove(i)
            rowidx = target[tuple(reduced)]
            rows[rowidx][colidx] = rows[rowidx].get(colidx, Fraction(0)) \
                + Fraction(m * (m - 1))
    rank = linalg.rank(rows, len(source)) if rows else 0
    return len(source) - rank


def heat_polynomial_space(n: int, degree: int) -> list[dict]:
    """Coefficient-dict basis of polynomial solutions f(t, x) of
    f_t + Laplacian f = 0 with joint total degree <= degree.

    Monomial keys are exponent tuples (e_t, e_x1, .., e_xn); differentiation
    is done directly on the dicts, independent of the jets machinery.
    """
    monos = [m for m in itertools.product(range(degree + 1), repeat=n + 1)
             if sum(m) <= degree]
    index = {m: i for i, m in enumerate(monos)}

    def add_to(row: dict, mono: tuple, coeff: Fraction) -> None:
        if mono in index:
            row[index[mono]] = row.get(index[mono], Fraction(0)) + coeff
        elif coeff:
            raise AssertionError("derivative left the truncated space")

    rows: dict[tuple, dict] = {}
    for m in monos:
        # f_t + sum_i f_{x_i x_i}, coefficient-wise
        if m[0] >= 1:
            key = m[:0] + (m[0] - 1,) + m[1:]
            rows.setdefault(key, {})
            add_to(rows[key], m, Fraction(m[0]))
        for i in range(1, n + 1):
            if m[i] >= 2:
                key = m[:i] + (m[i] - 2,) + m[i + 1:]
                rows.setdefault(key, {})
                add_to(rows[key], m, Fraction(m[i] * (m[i] - 1)))
    basis = linalg.nullspace(list(rows.values()), len(monos))
    return [{monos[i]: v for i, v in enumerate(vec) if v} for vec in basis]


def expr_coefficient_vector(e: Expr, n: int, degree: int) -> list[Fraction]:
    """Coefficient vector of a base-variable polynomial over the monomial
    basis used by heat_polynomial_space."""
    monos = [m for m in itertools.product(range(degree + 1), repeat=n + 1)
             if sum(m) <= degree]
    index = {m: i for i, m in enumerate(monos)}
    vec = [Fraction(0)] * len(monos)
    assert e.is_polynomial
    for mono, c in e.num.terms.items():
        exps = [0] * (n + 1)
        for s, p in mono:
            assert s.kind == "base", f"non-base symbol {s} in characteristic"
            exps[s.index] = p
        vec[index[tuple(exps)]] = c
    return vec


def span_equal(vectors_a: list[list[Fraction]], vectors_b: list[list[Fraction]]) -> bool:
    rows_a = [{i: v for i, v in enumerate(vec) if v} for vec in vectors_a]
    rows_b = [{i: v for i, v in enumerate(vec) if v} for vec in vectors_b]
    ncols = max(len(v) for v in vectors_a + vectors_b)
    ra = linalg.rank(rows_a, ncols)
    rb = linalg.rank(rows_b, ncols)
    rab = linalg.rank(rows_a + rows_b, ncols)
    return ra == rb == rab


def in_span(vector: list[Fraction], vectors: list[list[Fraction]]) -> bool:
    rows = [{i: v for i, v in enumerate(vec) if v} for vec in vectors]
    ncols = len(vector)
    extra = {i: v for i, v in enumerate(vector) if v}
    return linalg.rank(rows + [extra], ncols) == linalg.rank(rows, ncols)
