"""paraclaw: conservation laws and Monge-Ampere classification for scalar
evolutionary parabolic equations u_t = G(x, t, u, grad u, Hess u).

Everything is exact: rational-function symbolics, rational linear algebra,
and decidable zero tests end to end.  See the README for the CLI and the
problem-file grammar.
"""

from .expr import (
    ANSATZ, AUX, BASE, JET, DivisionByZeroExpr, Expr, MultiIndex,
    NotPolynomialIn, Symbol, ansatz_unknown, aux_var, base_var, diff, jet_var,
    poly_coefficients, substitute,
)
from .jets import (
    DegreeBounds, NotInDivergenceImage, OrderOverflow, ReplacementTable,
    TableTooShallow, TimeJetPresent, build_replacement_table,
    deprolongation_dimension, euler_operator, invert_divergence,
    iterated_total_derivative, parabolic_system_dimension, reduce_to_spatial,
    tableau_dimension, total_derivative,
)
from .parabolic import (
    EvolutionEquation, MAReport, Parabolicity, PreconditionSpatialDim,
    SingularSymbol, SymbolForm, is_minor_affine, ma_classify,
    ma_traceless_residue, parabolicity_check, quartic_form, symbol_form,
)
from .claws import (
    AnsatzSpec, AnsatzTooLarge, ConservationLaw, CrossValidation,
    DeterminingSystem, FluxReconstructionFailed, InvariantViolation,
    NotParabolicEquation, assemble_determining_system, characteristic,
    cross_validate_ma, find_conservation_laws, generate_ansatz,
    jacobi_potential_order, solve_exact, verify,
)
from .cli import (
    IndexOutOfRange, ParseError, ProblemFile, TimeDerivativeOnRHS, main,
    parse, parse_expression,
)

__version__ = "0.1.0"
