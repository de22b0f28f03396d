"""Parser, printer, command, and report-schema tests.

Every grammar production gets at least one accepting and one rejecting
case; reports are checked for the fixed field order and byte stability.
"""

import json
from fractions import Fraction

import pytest

from paraclaw.cli import (
    IndexOutOfRange, ParseError, TimeDerivativeOnRHS, cmd_claws, cmd_classify,
    cmd_dims, cmd_verify, expr_to_source, main, parse, parse_expression,
    print_problem,
)
from paraclaw.claws import AnsatzSpec
from paraclaw.expr import Expr, base_var, jet_var
from util import t, u, u11, u12, u22, ux, uxx, x


class TestGrammarAccepts:
    def test_file(self):
        pf = parse("n=1; u_t = u_xx + u*u_x")
        assert pf.n == 1
        assert pf.G == uxx + u * ux

    def test_file_with_digit_indices(self):
        pf = parse("n=2; u_t = u_11*u_22 - u_12^2")
        assert pf.G == u11 * u22 - u12 ** 2

    def test_expr_sum_and_difference(self):
        assert parse_expression("u + u - u", 1) == u

    def test_term_products_and_quotients(self):
        assert parse_expression("u*u/u", 1) == u

    def test_unary_minus(self):
        assert parse_expression("-u", 1) == -u
        assert parse_expression("-u^2", 1) == -(u ** 2)

    def test_factor_power(self):
        assert parse_expression("u_x^3", 1) == ux ** 3
        assert parse_expression("u^0", 1) == Expr.const(1)

    def test_atom_parenthesized(self):
        assert parse_expression("(u + 1)^2", 1) == (u + 1) ** 2

    def test_atom_rational_literal(self):
        assert parse_expression("1/2", 1) == Expr.const(Fraction(1, 2))
        assert parse_expression("3/4*u", 1) == Fraction(3, 4) * u

    def test_idents(self):
        assert parse_expression("t", 1) == t
        assert parse_expression("x", 1) == x
        assert parse_expression("x1 + x2", 2) == x + Expr.symbol(base_var(2))
        assert parse_expression("u_xx", 1) == uxx
        assert parse_expression("u_112", 2) == Expr.symbol(jet_var((1, 1, 2)))

    def test_options(self):
        pf = parse("n=1; u_t = u*u_xx; ref u = 1; ref u_x = -1/2; "
                   "jet_degree = 2; base_degree = 1; order = 1")
        assert pf.reference_jet == {jet_var(): Fraction(1),
                                    jet_var((1,)): Fraction(-1, 2)}
        assert (pf.jet_degree, pf.base_degree, pf.max_jet_order) == (2, 1, 1)

    def test_whitespace_insignificant(self):
        a = parse("n=1;u_t=u_xx")
        b = parse("n = 1 ;\n u_t  =\n   u_xx")
        assert a == b


class TestGrammarRejects:
    @pytest.mark.parametrize("source", [
        "u_t = u_xx",            # missing n header
        "n=1 u_t = u_xx",        # missing semicolon
        "n=0; u_t = u_xx",       # n out of range
        "n=1; v_t = u_xx",       # wrong lhs
        "n=1; u_t = u +",        # dangling operator in expr
        "n=1; u_t = u * * u",    # dangling operator in term
        "n=1; u_t = --u",        # only one unary minus allowed
        "n=1; u_t = u^-1",       # power wants a plain INT
        "n=1; u_t = u^u",
        "n=1; u_t = (u",         # unbalanced parenthesis
        "n=1; u_t = ()",
        "n=1; u_t = u_xx; nope = 3",    # unknown option
        "n=1; u_t = u_xx; ref u 1",     # option missing '='
        "n=1; u_t = u_xx; ref u = 1/0",
        "n=1; u_t = u@u",        # bad character
        "n=1; u_t = v",          # unknown identifier
        "n=1; u_t = u_",         # empty index list
        "n=1; u_t = u_x1",       # mixed indices
        "n=2; u_t = x",          # bare x needs n = 1
        "n=2; u_t = u_x",        # x-aliases need n = 1
        "n=1; u_t = u_xx extra", # trailing garbage
        "n=1; u_t = x12",        # x takes a single digit
    ])
    def test_rejected(self, source):
        with pytest.raises(ParseError):
            parse(source)

    @pytest.mark.parametrize("source,exc", [
        ("n=1; u_t = u_tt", TimeDerivativeOnRHS),
        ("n=1; u_t = u_xt", TimeDerivativeOnRHS),
        ("n=2; u_t = u_1t", TimeDerivativeOnRHS),
        ("n=1; u_t = x2*u_xx", IndexOutOfRange),
        ("n=2; u_t = u_13", IndexOutOfRange),
        ("n=1; u_t = u_0", IndexOutOfRange),
        ("n=2; u_t = x3", IndexOutOfRange),
    ])
    def test_rejected_specific(self, source, exc):
        with pytest.raises(exc):
            parse(source)

    def test_division_by_zero_literal(self):
        with pytest.raises(ParseError):
            parse("n=1; u_t = 1/0")

    def test_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse("n=1;\nu_t = u +\n;")
        assert err.value.line == 3

    def test_expected_token_set(self):
        with pytest.raises(ParseError) as err:
            parse("n=1; u_t = ;")
        assert "RATIONAL" in err.value.expected


class TestRoundTrip:
    @pytest.mark.parametrize("source", [
        "n=1; u_t = u_xx",
        "n=1; u_t = u_xx + u*u_x; ref u = 1/2",
        "n=2; u_t = u_11*u_22 - u_12^2; ref u_11 = 1; ref u_22 = 1",
        "n=1; u_t = u*u_xx - 3/2*u_x^2 + t*x; jet_degree = 2; base_degree = 1; order = 2",
        "n=2; u_t = u_11 + u_22 + (u_11 + u_22)^2",
    ])
    def test_parse_print_parse(self, source):
        pf = parse(source)
        assert parse(print_problem(pf)) == pf

    def test_expr_to_source_is_reparseable(self):
        e = u * uxx - Fraction(3, 2) * ux ** 2 + x * t - 7
        assert parse_expression(expr_to_source(e, 1), 1) == e
        e2 = (ux + 1) / (u ** 2 - 2)
        assert parse_expression(expr_to_source(e2, 1), 1) == e2

    def test_random_problem_files_round_trip(self):
        import random
        from paraclaw.cli import ProblemFile
        from util import random_poly, random_spatial_symbols
        rng = random.Random(51)
        for _ in range(25):
            n = rng.choice((1, 2))
            G = random_poly(rng, random_spatial_symbols(n))
            refs = {}
            for s in G.symbols():
                if rng.random() < 0.3:
                    refs[s] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
            pf = ProblemFile(n=n, G=G, reference_jet=refs,
                             jet_degree=rng.choice((None, 1, 2)),
                             base_degree=rng.choice((None, 0, 2)))
            assert parse(print_problem(pf)) == pf


class TestCommands:
    def test_classify_heat(self):
        report = cmd_classify(parse("n=1; u_t = u_xx"))
        assert list(report) == ["schema_version", "n", "equation", "parabolicity",
                                "ma", "laws", "warnings"]
        assert report["parabolicity"] == "strict"
        assert report["ma"] == {"minor_affine": True, "residue_vanishes": None,
                                "n1_affine": True}
        assert report["laws"] == [] and report["warnings"] == []

    def test_classify_weak_warns(self):
        report = cmd_classify(parse("n=1; u_t = u*u_xx"))
        assert report["parabolicity"] == "weak"
        assert any("weakly parabolic" in w for w in report["warnings"])

    def test_claws_heat_base_degree_2(self):
        pf = parse("n=1; u_t = u_xx")
        report = cmd_claws(pf, AnsatzSpec(2, 1, 2))
        assert len(report["laws"]) >= 3
        assert any(law["characteristic"] == "x^2 - 2*t" for law in report["laws"])
        for law in report["laws"]:
            assert law["order"] <= 2
            assert law["flux"] is not None

    def test_verify_command(self):
        pf = parse("n=1; u_t = u_xx")
        good = cmd_verify(pf, "u", ["-u_x"])
        assert good["verified"] is True
        assert good["characteristic"] == "1"
        bad = cmd_verify(pf, "u", ["u_x"])
        assert bad["verified"] is False

    def test_verify_needs_n_fluxes(self):
        pf = parse("n=2; u_t = u_11 + u_22")
        with pytest.raises(ValueError):
            cmd_verify(pf, "u", ["-u_1"])

    def test_dims_report(self):
        report = cmd_dims(1, 0)
        assert report == {"schema_version": 1, "n": 1, "r": 0,
                          "tableau_dim": 2, "system_dim": 7,
                          "deprolongation_dim": 5}


class TestMainEntry:
    def test_exit_zero_and_json(self, tmp_path, capsys):
        f = tmp_path / "heat.pde"
        f.write_text("n=1; u_t = u_xx")
        assert main(["classify", str(f)]) == 0
        out = capsys.readouterr().out
        report = json.loads(out)
        assert report["equation"] == "u_t = u_xx"

    def test_exit_two_on_parse_error(self, tmp_path, capsys):
        f = tmp_path / "bad.pde"
        f.write_text("n=1; u_t = u_tt")
        assert main(["classify", str(f)]) == 2
        assert "parse error" in capsys.readouterr().err

    def test_exit_one_on_not_parabolic(self, tmp_path, capsys):
        f = tmp_path / "backward.pde"
        f.write_text("n=1; u_t = -u_xx")
        assert main(["claws", str(f)]) == 1
        assert "not parabolic" in capsys.readouterr().err
        assert main(["claws", str(f), "--force"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert any("force" in w for w in report["warnings"])

    def test_exit_one_on_missing_file(self, capsys):
        assert main(["classify", "/nonexistent/f.pde"]) == 1

    def test_reports_byte_stable(self, tmp_path, capsys):
        f = tmp_path / "burgers.pde"
        f.write_text("n=1; u_t = u_xx + u*u_x; jet_degree = 2")
        assert main(["claws", str(f)]) == 0
        first = capsys.readouterr().out
        assert main(["claws", str(f)]) == 0
        second = capsys.readouterr().out
        assert first == second
        report = json.loads(first)
        assert list(report) == ["schema_version", "n", "equation", "parabolicity",
                                "ma", "laws", "warnings"]
        law = report["laws"][0]
        assert list(law) == ["density", "flux", "characteristic", "order"]

    def test_text_mode_has_timing(self, tmp_path, capsys):
        f = tmp_path / "heat.pde"
        f.write_text("n=1; u_t = u_xx")
        assert main(["classify", str(f), "--text"]) == 0
        out = capsys.readouterr().out
        assert "elapsed:" in out and "parabolicity: strict" in out

    def test_unsafe_order_flag(self, tmp_path, capsys):
        f = tmp_path / "heat.pde"
        f.write_text("n=1; u_t = u_xx")
        assert main(["claws", str(f), "--order", "3"]) == 1  # refused without flag
        capsys.readouterr()
        assert main(["claws", str(f), "--order", "3", "--unsafe-order"]) == 0

    def test_verify_subcommand(self, tmp_path, capsys):
        f = tmp_path / "heat2.pde"
        f.write_text("n=2; u_t = u_11 + u_22")
        rc = main(["verify", str(f),
                   "--density", "(x1^2 + x2^2 - 4*t)*u",
                   "--flux", "-((x1^2 + x2^2 - 4*t)*u_1 - 2*x1*u)",
                   "--flux", "-((x1^2 + x2^2 - 4*t)*u_2 - 2*x2*u)"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["verified"] is True

    def test_byte_stable_across_hash_seeds(self, tmp_path):
        # set/dict iteration must never leak into reports
        import subprocess
        import sys
        f = tmp_path / "heat2.pde"
        f.write_text("n=2; u_t = u_11 + u_22; base_degree = 1")
        outputs = []
        for seed in ("1", "2"):
            proc = subprocess.run(
                [sys.executable, "-m", "paraclaw.cli", "claws", str(f)],
                capture_output=True, text=True,
                env={"PYTHONHASHSEED": seed, "PATH": "/usr/bin:/bin"})
            assert proc.returncode == 0, proc.stderr
            outputs.append(proc.stdout)
        assert outputs[0] == outputs[1]

    def test_symbolic_residue_flag(self, tmp_path, capsys):
        f = tmp_path / "lap2.pde"
        f.write_text("n=2; u_t = u_11 + u_22 + (u_11 + u_22)^2")
        assert main(["classify", str(f), "--symbolic"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["ma"] == {"minor_affine": False, "residue_vanishes": True,
                                "n1_affine": None}

    def test_file_options_feed_claws_defaults(self, tmp_path, capsys):
        f = tmp_path / "heat.pde"
        f.write_text("n=1; u_t = u_xx; base_degree = 2")
        assert main(["claws", str(f)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert any(law["characteristic"] == "x^2 - 2*t" for law in report["laws"])
