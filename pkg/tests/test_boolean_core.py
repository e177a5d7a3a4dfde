import pytest
from hypothesis import given, strategies as st

from qcahaz.boolean_core import (
    Cover,
    ExpressionSyntaxError,
    Literal,
    NotTwoLevelError,
    ProductTerm,
    assignment_from_string,
    assignment_to_int,
    consensus,
    detect_static1_hazards,
    eliminate_hazards,
    eval_cover,
    int_to_assignment,
    majority,
    parse_expression,
    parse_expression_styled,
    prime_implicants,
    truth_table,
)

from oracles import brute_hazards, brute_primes, covers, function_of

EQ4 = "AB' + BC'"


def terms_of(text):
    return set(parse_expression(text).terms)


# -- parsing -------------------------------------------------------------------

@pytest.mark.parametrize("text, variables, n_terms", [
    (EQ4, ("A", "B", "C"), 2),
    ("A*~B + B*~C", ("A", "B", "C"), 2),
    ("x1 x2' + x3", ("x1", "x2", "x3"), 2),
    ("A", ("A",), 1),
    ("  A  +  B ", ("A", "B"), 2),
])
def test_parse_shapes(text, variables, n_terms):
    c = parse_expression(text)
    assert c.variables == variables
    assert len(c.terms) == n_terms


def test_parse_eq4_terms():
    c = parse_expression(EQ4)
    assert c.terms == (ProductTerm.of((0, False), (1, True)), ProductTerm.of((1, False), (2, True)))


@pytest.mark.parametrize("text", ["", "A +", "+A", "A''B+", "A + * B", "A)", "(A"])
def test_parse_syntax_errors(text):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression(text)
    assert info.value.position >= 0


def test_parse_rejects_multilevel():
    with pytest.raises(NotTwoLevelError):
        parse_expression("A(B+C)")


def test_constants_and_contradictions():
    assert parse_expression("0").is_constant()
    assert parse_expression("1").is_constant()
    c = parse_expression("AA' + B")
    assert c.variables == ("A", "B") and len(c.terms) == 1


def test_duplicate_literal_collapses():
    assert parse_expression("AAB").terms == parse_expression("AB").terms


@pytest.mark.parametrize("text, comp, conj", [(EQ4, "'", ""), ("A*~B + B*~C", "~", "*")])
def test_styled_round_trip(text, comp, conj):
    c, got_comp, got_conj = parse_expression_styled(text)
    assert (got_comp, got_conj) == (comp, conj)
    assert parse_expression(c.to_text(comp, conj)) == c


@given(covers())
def test_text_round_trip(cover):
    again = parse_expression(cover.to_text())
    assert set(again.variables) <= set(cover.variables)
    for m in range(2 ** cover.n):
        bits = int_to_assignment(m, cover.n)
        named = dict(zip(cover.variables, bits))
        assert eval_cover(again, [named[v] for v in again.variables]) == eval_cover(cover, bits)


# -- evaluation ----------------------------------------------------------------

def test_eq4_truth_table():
    c = parse_expression(EQ4)
    assert [eval_cover(c, int_to_assignment(m, 3)) for m in range(8)] == \
        [False, False, True, False, True, True, True, False]


def test_eval_width_mismatch():
    with pytest.raises(ValueError):
        eval_cover(parse_expression(EQ4), (1, 0))


@given(covers())
def test_truth_table_matches_eval(cover):
    assert tuple(truth_table(cover)) == function_of(cover)


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2 ** n - 1))))
def test_assignment_int_round_trip(nm):
    n, m = nm
    assert assignment_to_int(int_to_assignment(m, n)) == m


def test_assignment_from_string():
    assert assignment_from_string("100") == (1, 0, 0)
    with pytest.raises(ValueError):
        assignment_from_string("10x")


@pytest.mark.parametrize("a, b, c", [(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)])
def test_majority(a, b, c):
    assert majority(a, b, c) == int(a + b + c >= 2)


# -- hazards -------------------------------------------------------------------

def test_eq4_hazard():
    rep = detect_static1_hazards(parse_expression(EQ4))
    assert len(rep.hazards) == 1
    h = rep.hazards[0]
    assert (h.minterm_a, h.minterm_b) == ((1, 0, 0), (1, 1, 0))
    assert h.toggled_variable.name == "B"
    assert h.curing_term == ProductTerm.of((0, False), (2, True))


def test_fixed_cover_is_hazard_free():
    assert not detect_static1_hazards(parse_expression("AB' + BC' + AC'"))


def test_eliminate_eq4():
    fixed = eliminate_hazards(parse_expression(EQ4))
    assert fixed.term_set() == terms_of("AB' + BC' + AC'")


def test_consensus():
    ab_, bc_ = parse_expression(EQ4).terms
    assert consensus(ab_, bc_) == ProductTerm.of((0, False), (2, True))
    assert consensus(ab_, ab_) is None
    two = parse_expression("AB + A'B'").terms
    assert consensus(*two) is None


def test_literal_holds():
    assert Literal(0, True).holds((0,)) and not Literal(0, True).holds((1,))


@given(covers())
def test_hazards_match_brute_force(cover):
    rep = detect_static1_hazards(cover)
    got = {(h.minterm_a, h.minterm_b, h.toggled_variable.index) for h in rep.hazards}
    assert got == brute_hazards(cover)
    for h in rep.hazards:
        cure = h.curing_term
        assert all(lit.holds(h.minterm_a) for lit in cure.literals)
        assert all(lit.holds(h.minterm_b) for lit in cure.literals)


@given(covers(max_vars=4))
def test_prime_implicants_match_enumeration(cover):
    assert set(prime_implicants(cover)) == brute_primes(cover)


@given(covers())
def test_elimination_sound(cover):
    fixed = eliminate_hazards(cover)
    assert function_of(fixed) == function_of(cover)
    assert not brute_hazards(fixed)
    assert set(cover.terms) <= set(fixed.terms)


@given(covers())
def test_elimination_idempotent(cover):
    once = eliminate_hazards(cover)
    assert eliminate_hazards(once) == once


def test_cover_rejects_bad_variables():
    with pytest.raises(ValueError):
        Cover(("A", "A"), ())
    with pytest.raises(ValueError):
        Cover(("A",), (ProductTerm.of((3, False)),))
