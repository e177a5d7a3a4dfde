import pytest
from hypothesis import assume, given, settings

from qcahaz import engine as E
from qcahaz.boolean_core import eliminate_hazards, eval_cover, parse_expression
from qcahaz.energy import cells_within
from qcahaz.layout import save_layout, validate
from qcahaz.synth import (
    RoutingError,
    build_demo,
    builtin_demo,
    demo_text,
    plan_routing,
    primitive_layout,
    synthesize_sop,
)

from oracles import covers

EQ4 = "AB' + BC'"


def grid(layout):
    p = layout.geometry.pitch
    return {(round(c.center[0] / p), round(c.center[1] / p)): c for c in layout.cells}


def inverter_count(layout):
    """Cell pairs touching only corner to corner (no cell on either shared side)."""
    g = grid(layout)
    count = 0
    for (x, y), c in g.items():
        if c.role == "fixed":
            continue
        for dx in (-1, 1):
            other = g.get((x + dx, y + 1))
            if other is None or other.role == "fixed":
                continue
            if (x + dx, y) not in g and (x, y + 1) not in g:
                count += 1
    return count


def fixed_count(layout, pol):
    return sum(1 for c in layout.cells if c.role == "fixed" and c.polarization == pol)


def simulate_matches(layout, cover):
    labels = layout.labels("input")
    trace = E.run(layout, E.SimParams(samples=max(12800, 1600 * 2 ** len(labels))))
    rows = E.extract_truth_table(trace, layout)
    for r in rows:
        bits = [r.inputs[labels.index(v)] for v in cover.variables]
        if r.outputs[0] != int(eval_cover(cover, bits)) or r.weak[0]:
            return False
    return True


def test_eq4_structure():
    lay = synthesize_sop(parse_expression(EQ4))
    assert inverter_count(lay) == 2
    assert fixed_count(lay, -1) == 2 and fixed_count(lay, 1) == 1
    assert lay.labels("input") == ["A", "B", "C"] and lay.labels("output") == ["f"]


def test_fixed_structure():
    lay = synthesize_sop(parse_expression("AB' + BC' + AC'"))
    assert fixed_count(lay, -1) == 3 and fixed_count(lay, 1) == 2


def test_single_literal_is_wire():
    lay = synthesize_sop(parse_expression("A"))
    assert not any(c.role == "fixed" for c in lay.cells) and inverter_count(lay) == 0
    assert lay.labels("input") == ["A"] and lay.labels("output") == ["f"]


def test_constant_cover_rejected():
    with pytest.raises(RoutingError):
        synthesize_sop(parse_expression("0"))
    with pytest.raises(RoutingError):
        synthesize_sop(parse_expression("A + 1"))


def test_crossing_cover_rejected():
    # A feeds three product terms: not routable without crossings in this floorplan
    with pytest.raises(RoutingError, match="crossing"):
        synthesize_sop(parse_expression("AB + AC + AD"))


def test_too_many_variables():
    with pytest.raises(RoutingError):
        synthesize_sop(parse_expression("A + B + C + D + E + F + G + H + I"))


def test_input_cells_in_variable_order():
    lay = synthesize_sop(parse_expression("C'A + B"))
    assert lay.labels("input") == ["C", "A", "B"]
    assert lay.inputs == [0, 1, 2]


def test_unused_variable_still_gets_an_input():
    lay = synthesize_sop(parse_expression("A + AA' B"))
    assert lay.labels("input") == ["A", "B"] and validate(lay) == []


@settings(max_examples=60)
@given(covers(max_vars=4, max_terms=4))
def test_routable_covers_validate(cover):
    assume(not cover.is_constant())
    try:
        plan = plan_routing(cover)
    except RoutingError:
        return
    cols = {}
    for c, t in enumerate(plan.order):
        for lit in cover.terms[t].literals:
            cols.setdefault(lit.var, []).append(c)
    for v, cs in cols.items():
        assert len(cs) == 1 or cs[1] - cs[0] == 1 or (v == plan.wrap and cs == [0, len(plan.order) - 1])
    lay = synthesize_sop(cover)
    assert validate(lay) == []
    assert sorted(lay.labels("input")) == sorted(cover.variables)


SIM_COVERS = [
    "A", "A'", "AB", "AB'", "A + B", "A' + B'", "ABC", "A'B'C'", "A + B + C", "A' + B' + C'",
    EQ4, "AB' + BC' + AC'", "A'BC + AB'", "AB + A'C", "AB + A'C + BC", "A'B + AB'",
    "AB'C' + A'BC", "A'C + BC'", "AB + BC + AC", "AB + C",
]


@pytest.mark.parametrize("expr", SIM_COVERS)
def test_synthesized_layout_simulates_to_cover(expr):
    cover = parse_expression(expr)
    assert simulate_matches(synthesize_sop(cover), cover)


@pytest.mark.parametrize("expr", ["AB' + BC'", "A'B + AB'", "AB + A'C", "A'C + BC'", "AB + C"])
def test_hazard_free_synthesis_simulates(expr):
    cover = parse_expression(expr)
    fixed = eliminate_hazards(cover)
    assert simulate_matches(synthesize_sop(fixed), cover)


@pytest.mark.parametrize("kind, expected", [
    ("wire", {(0,): 0, (1,): 1}),
    ("inverter", {(0,): 1, (1,): 0}),
    ("and", {(0, 0): 0, (0, 1): 0, (1, 0): 0, (1, 1): 1}),
    ("or", {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 1}),
])
def test_primitives(kind, expected):
    lay = primitive_layout(kind)
    rows = E.extract_truth_table(E.run(lay), lay)
    assert {r.inputs: r.outputs[0] for r in rows} == expected


# -- demos -----------------------------------------------------------------------

@pytest.mark.parametrize("which", ["with_hazard", "hazard_free", "inverter"])
def test_shipped_demos_regenerate(which):
    assert demo_text(which) == save_layout(build_demo(which))
    assert validate(builtin_demo(which)) == []


def test_demo_aliases():
    assert builtin_demo("fig12") == builtin_demo("with_hazard")
    assert builtin_demo("fig13") == builtin_demo("hazard_free")
    with pytest.raises(KeyError):
        builtin_demo("fig99")


def test_demo_output_neighbourhoods_identical():
    stages = []
    for which in ("with_hazard", "hazard_free"):
        lay = builtin_demo(which)
        out = lay.cells[lay.outputs[0]]
        near = cells_within(lay, out.center, 65.0, exclude=lay.outputs[0])
        stages.append(sorted((lay.cells[i].center[0] - out.center[0], lay.cells[i].center[1] - out.center[1])
                             for i in near))
    assert stages[0] == stages[1] and len(stages[0]) == 3
