"""Conservation-law search on second-order density ansaetze.

The pipeline: enumerate a polynomial density ansatz T in the base
coordinates and spatial jets of order <= 2 (the order bound is licensed by
the structure theory -- characteristics of evolutionary parabolic
equations depend on at most second derivatives); assemble the determining
system by requiring the spatial Euler operator to kill the on-shell time
derivative of T; solve the system exactly; filter trivial laws by their
characteristic; reconstruct fluxes by divergence inversion.

Sign convention: D_t T + Div X = 0 on solutions.  Laws are identified by
their characteristics Q = E_u(T) (densities differing by a spatial
divergence share Q) and reported with Q scaled monic under the global
monomial order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .expr import (
    ANSATZ, BASE, JET, Expr, Monomial, Poly, Symbol,
    ansatz_unknown, base_var, mono_sort_key, poly_coefficients,
)
from .jets import (
    ORDER_GUARD, NotInDivergenceImage, bounded_monomials, build_replacement_table,
    euler_operator, invert_divergence, reduce_to_spatial, spatial_jet_order,
    spatial_jet_vars, total_derivative,
)
from .parabolic import EvolutionEquation, MAReport, Parabolicity, ma_classify, \
    parabolicity_check

__all__ = [
    "AnsatzTooLarge", "FluxReconstructionFailed", "NotParabolicEquation",
    "InvariantViolation",
    "AnsatzSpec", "ConservationLaw", "DeterminingSystem", "CrossValidation",
    "generate_ansatz", "assemble_determining_system", "solve_exact",
    "find_conservation_laws", "verify", "characteristic",
    "jacobi_potential_order", "reconstruct_flux", "cross_validate_ma",
]


class AnsatzTooLarge(ValueError):
    """The requested ansatz exceeds the monomial guard."""


class FluxReconstructionFailed(NotInDivergenceImage):
    """Degree bounds for the flux ansatz were exhausted."""


class NotParabolicEquation(ValueError):
    """The symbol is not parabolic at the reference jet (use force to override)."""


class InvariantViolation(RuntimeError):
    """An output invariant failed; indicates a bug, never accepted output."""


@dataclass(frozen=True)
class AnsatzSpec:
    """Bounds for the density ansatz.

    ``max_jet_order`` is capped at 2 -- the proven search space -- unless
    ``unsafe_order`` is set (useful only to confirm experimentally that
    nothing new appears at order 3).
    """

    max_jet_order: int = 2
    jet_degree: int = 1
    base_degree: int = 0
    unsafe_order: bool = False
    guard: int = 20000

    def __post_init__(self) -> None:
        if min(self.max_jet_order, self.jet_degree, self.base_degree) < 0:
            raise ValueError("ansatz bounds must be non-negative")
        if self.max_jet_order > 2 and not self.unsafe_order:
            raise ValueError(
                "max_jet_order > 2 needs unsafe_order=True (--unsafe-order)")


@dataclass(frozen=True)
class ConservationLaw:
    """Density T, spatial fluxes X (None when reconstruction failed), and
    characteristic Q = E_u(T); all purely spatial."""

    T: Expr
    X: tuple[Expr, ...] | None
    Q: Expr


@dataclass
class DeterminingSystem:
    """Exact homogeneous linear system in the ansatz coefficients.

    One row per monomial of E_u(reduce(D_t T_ansatz)) in the base and jet
    variables; ``rows`` are sparse {column: Fraction} over ``unknowns``."""

    unknowns: list[Symbol]
    rows: list[dict] = field(default_factory=list)
    keys: list[Monomial] = field(default_factory=list)

    @property
    def num_equations(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class CrossValidation:
    """Consistency of found laws with the Monge-Ampere classifier."""

    consistent: bool
    law_count: int
    report: MAReport
    detail: str = ""


# ---------------------------------------------------------------------------
# Ansatz generation and determining system
# ---------------------------------------------------------------------------

def generate_ansatz(eq: EvolutionEquation, spec: AnsatzSpec) -> tuple[Expr, list[Symbol]]:
    """Density ansatz sum_k c_k m_k over all monomials within the bounds.

    Monomials are products of a base monomial in {t, x^1..x^n} (joint total
    degree <= base_degree) and a jet monomial in the spatial jets of order
    <= max_jet_order (total degree <= jet_degree)."""
    base_syms = [base_var(a) for a in range(eq.n + 1)]
    jet_syms = spatial_jet_vars(eq.n, spec.max_jet_order)
    base_monos = bounded_monomials(base_syms, spec.base_degree)
    jet_monos = bounded_monomials(jet_syms, spec.jet_degree)
    count = len(base_monos) * len(jet_monos)
    if count > spec.guard:
        raise AnsatzTooLarge(f"{count} monomials exceed guard {spec.guard}")
    unknowns = []
    terms = {}
    k = 0
    for jm in jet_monos:
        for bm in base_monos:
            k += 1
            c = ansatz_unknown(k)
            unknowns.append(c)
            mono = tuple(sorted(bm + jm + ((c, 1),), key=lambda p: p[0].key))
            terms[mono] = Fraction(1)
    return Expr._make(Poly(terms), Poly.one()), unknowns


def assemble_determining_system(eq: EvolutionEquation, T_ansatz: Expr,
                                max_jet_order: int = 2) -> DeterminingSystem:
    """Extract the linear determining equations for T_ansatz.

    Computes E_u(reduce(D_t T_ansatz)) and turns the coefficient of every
    monomial in the base and jet variables into one homogeneous equation in
    the ansatz unknowns."""
    order = spatial_jet_order(T_ansatz)
    if order > max_jet_order:
        raise ValueError(f"ansatz jet order {order} exceeds allowed {max_jet_order}")
    unknowns = sorted(s for s in T_ansatz.symbols() if s.kind == ANSATZ)
    table = build_replacement_table(eq, ORDER_GUARD)
    R = reduce_to_spatial(total_derivative(T_ansatz, 0), table)
    E = euler_operator(R)
    system = DeterminingSystem(unknowns)
    if E.is_zero:
        return system
    col = {c: k for k, c in enumerate(unknowns)}
    point_vars = [s for s in E.symbols() if s.kind in (BASE, JET)]
    coeffs = poly_coefficients(E, point_vars)
    for key in sorted(coeffs, key=mono_sort_key):
        coeff = coeffs[key]
        row: dict = {}
        for mono, c in coeff.num.terms.items():
            if len(mono) != 1 or mono[0][1] != 1 or mono[0][0].kind != ANSATZ:
                raise InvariantViolation(
                    "determining equation is not linear homogeneous in the unknowns")
            row[col[mono[0][0]]] = c
        system.rows.append(row)
        system.keys.append(key)
    return system


def solve_exact(system: DeterminingSystem) -> list[list[Fraction]]:
    """Basis of the null space, by exact Gaussian elimination with
    deterministic pivoting (first nonzero column in the unknown order)."""
    return linalg.nullspace(system.rows, len(system.unknowns))


# ---------------------------------------------------------------------------
# Laws
# ---------------------------------------------------------------------------

def characteristic(T: Expr) -> Expr:
    """Q = E_u(T), the defining function of the law with density T."""
    return euler_operator(T)


def jacobi_potential_order(law: ConservationLaw) -> int:
    """Largest jet order in the (already spatial) characteristic."""
    return spatial_jet_order(law.Q)


def reconstruct_flux(eq: EvolutionEquation, T: Expr) -> tuple[Expr, ...]:
    """Fluxes X with D_t T + Div X = 0 on solutions."""
    table = build_replacement_table(eq, ORDER_GUARD)
    R = -reduce_to_spatial(total_derivative(T, 0), table)
    try:
        return invert_divergence(R, eq.n)
    except NotInDivergenceImage as exc:
        raise FluxReconstructionFailed(str(exc)) from exc


def verify(eq: EvolutionEquation, law: ConservationLaw) -> bool:
    """Exact check of reduce(D_t T) + sum_i D_i X^i = 0."""
    if law.X is None:
        raise ValueError("law has no flux to verify")
    if len(law.X) != eq.n:
        raise ValueError(f"expected {eq.n} fluxes, got {len(law.X)}")
    table = build_replacement_table(
        eq, min(ORDER_GUARD, max(1, spatial_jet_order(law.T) + 1)))
    residual = reduce_to_spatial(total_derivative(law.T, 0), table)
    for i, X in enumerate(law.X, start=1):
        residual = residual + total_derivative(X, i)
    return residual.is_zero


def find_conservation_laws(eq: EvolutionEquation, spec: AnsatzSpec | None = None,
                           force: bool = False) -> list[ConservationLaw]:
    """All conservation laws within the ansatz bounds, up to equivalence.

    Trivial laws (characteristic 0 on the equation) are dropped; laws with
    rationally proportional characteristics are deduplicated; each law is
    scaled so its characteristic is monic.  Fluxes are reconstructed when
    the degree bounds allow it, else reported as None.  Every returned law
    satisfies the conservation identity exactly and has characteristic of
    jet order <= 2."""
    spec = spec or AnsatzSpec()
    if parabolicity_check(eq) is Parabolicity.NOT_PARABOLIC and not force:
        raise NotParabolicEquation(
            "symbol is not parabolic at the reference jet; pass force=True to proceed")
    T_ansatz, unknowns = generate_ansatz(eq, spec)
    system = assemble_determining_system(eq, T_ansatz, spec.max_jet_order)
    basis = solve_exact(system)
    laws: list[ConservationLaw] = []
    seen: set = set()
    for vec in basis:
        T = T_ansatz.substitute(dict(zip(unknowns, vec)))
        Q = euler_operator(T)
        if Q.is_zero:
            continue  # density is a spatial divergence: trivial
        scale = 1 / Q.num.leading()[1]
        T, Q = T * scale, Q * scale
        key = Q.canonical_key()
        if key in seen:
            continue
        seen.add(key)
        try:
            X = reconstruct_flux(eq, T)
        except FluxReconstructionFailed:
            X = None
        law = ConservationLaw(T, X, Q)
        if jacobi_potential_order(law) > 2:
            raise InvariantViolation(
                f"characteristic of jet order > 2 found: {Q}")
        if X is not None and not verify(eq, law):
            raise InvariantViolation(f"reconstructed flux fails to verify for T = {T}")
        laws.append(law)
    return laws


def cross_validate_ma(eq: EvolutionEquation, laws: list[ConservationLaw]
                      ) -> CrossValidation:
    """Check the structural implication: a nontrivial conservation law forces
    the Monge-Ampere verdict (n1_affine for n = 1, vanishing traceless
    residue for n >= 2).  A violation is an implementation bug."""
    report = ma_classify(eq)
    if not laws:
        return CrossValidation(True, 0, report, "no laws, nothing to check")
    if eq.n == 1:
        ok, which = report.n1_affine, "n1_affine"
    else:
        ok, which = report.residue_vanishes, "residue_vanishes"
    if ok is None:
        return CrossValidation(True, len(laws), report,
                               f"{which} undecided (singular symbol)")
    if ok:
        return CrossValidation(True, len(laws), report, f"{which} holds")
    return CrossValidation(False, len(laws), report,
                           f"{len(laws)} nontrivial law(s) but {which} is false")
