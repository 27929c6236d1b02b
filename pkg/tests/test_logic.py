import pytest
from hypothesis import given, settings

from conftest import formulas, lassos
from oracles import brute_eval

from mptsynth.logic import (
    Always,
    And,
    Atom,
    Eventually,
    LassoWord,
    LtlSyntaxError,
    Next,
    Not,
    Or,
    TrueConst,
    Until,
    desugar,
    eval_on_lasso,
    format_formula,
    parse_ltl,
)

p, q, q1, q2 = Atom("p"), Atom("q"), Atom("q1"), Atom("q2")


class TestParser:
    def test_case_study_formula(self):
        f = parse_ltl("G(F q1 & F q2)", {"q1", "q2"})
        assert f == Always(And(Eventually(q1), Eventually(q2)))

    def test_true(self):
        assert parse_ltl("true") == TrueConst()

    def test_false_is_negated_true(self):
        assert parse_ltl("false") == Not(TrueConst())

    def test_until_right_associative(self):
        assert parse_ltl("a U b U c") == parse_ltl("a U (b U c)")
        assert parse_ltl("a U b U c") != parse_ltl("(a U b) U c")

    def test_implies_right_associative(self):
        assert parse_ltl("a -> b -> c") == parse_ltl("a -> (b -> c)")

    def test_precedence(self):
        assert parse_ltl("F p & q") == And(Eventually(p), q)
        assert parse_ltl("a U b & c") == And(Until(Atom("a"), Atom("b")), Atom("c"))
        assert parse_ltl("a & b | c") == Or(And(Atom("a"), Atom("b")), Atom("c"))
        assert parse_ltl("a | b -> c") == parse_ltl("(a | b) -> c")
        assert parse_ltl("!X p") == Not(Next(p))

    def test_unknown_atom_rejected(self):
        with pytest.raises(LtlSyntaxError, match="unknown atomic proposition"):
            parse_ltl("p & z", {"p", "q"})

    def test_syntax_error_position(self):
        with pytest.raises(LtlSyntaxError, match="position"):
            parse_ltl("p & & q")
        with pytest.raises(LtlSyntaxError):
            parse_ltl("(p")
        with pytest.raises(LtlSyntaxError):
            parse_ltl("")

    @given(formulas())
    def test_format_round_trip(self, f):
        assert parse_ltl(format_formula(f)) == f


class TestDesugar:
    def test_eventually(self):
        assert desugar(Eventually(p)) == Until(TrueConst(), p)

    def test_always(self):
        assert desugar(Always(p)) == Not(Until(TrueConst(), Not(p)))

    def test_or(self):
        assert desugar(Or(p, q)) == Not(And(Not(p), Not(q)))

    def test_output_is_core(self):
        core = (TrueConst, Atom, Not, And, Next, Until)

        def check(g):
            assert isinstance(g, core)
            for attr in ("operand", "left", "right"):
                child = getattr(g, attr, None)
                if child is not None:
                    check(child)

        check(desugar(parse_ltl("(a <-> F b) -> G(c | X a)")))


class TestLassoSemantics:
    def test_globally_on_constant_cycle(self):
        w = LassoWord.of([], [{"p"}])
        assert eval_on_lasso(Always(p), w)

    def test_eventually_after_empty_prefix_letter(self):
        w = LassoWord.of([set()], [{"q"}])
        assert eval_on_lasso(Eventually(q), w)

    def test_case_study_lassos(self):
        f = parse_ltl("G(F q1 & F q2)")
        good = LassoWord.of([], [{"q1"}, {"q4"}, {"q2"}])
        bad = LassoWord.of([], [{"q1"}, {"q4"}])
        assert brute_eval(f, good)
        assert not brute_eval(f, bad)
        assert eval_on_lasso(f, good)
        assert not eval_on_lasso(f, bad)

    def test_next_wraps_into_cycle(self):
        w = LassoWord.of([{"p"}], [{"q"}])
        assert eval_on_lasso(Next(q), w)
        assert eval_on_lasso(Next(Next(q)), w)

    @given(formulas(), lassos())
    @settings(max_examples=500)
    def test_agrees_with_bounded_unroll_oracle(self, f, w):
        assert eval_on_lasso(f, w) == brute_eval(f, w)

    @given(formulas(), lassos())
    @settings(max_examples=500)
    def test_desugar_preserves_meaning(self, f, w):
        assert eval_on_lasso(f, w) == eval_on_lasso(desugar(f), w)

    @given(formulas(), lassos())
    def test_double_negation(self, f, w):
        assert eval_on_lasso(Not(Not(f)), w) == eval_on_lasso(f, w)

    @given(formulas(), formulas(), lassos())
    def test_next_distributes_over_and(self, f, g, w):
        assert eval_on_lasso(Next(And(f, g)), w) == eval_on_lasso(
            And(Next(f), Next(g)), w
        )

    @given(formulas(), formulas(), lassos())
    def test_until_expansion_law(self, f, g, w):
        lhs = Until(f, g)
        rhs = Or(g, And(f, Next(Until(f, g))))
        assert eval_on_lasso(lhs, w) == eval_on_lasso(rhs, w)

    @given(formulas(), lassos())
    def test_cycle_rotation_invariance(self, f, w):
        assert eval_on_lasso(f, w) == eval_on_lasso(f, w.rotate())
