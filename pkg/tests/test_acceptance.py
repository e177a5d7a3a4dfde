"""End-to-end acceptance checks, one test per criterion.

Each test records PASS or FAIL in ``conftest.CRITERIA``; the terminal summary
prints one line per criterion.
"""

import contextlib
import io
import random
import time
from pathlib import Path

import pytest

from qcahaz import engine as E
from qcahaz.boolean_core import (
    Cover,
    ProductTerm,
    detect_static1_hazards,
    eliminate_hazards,
    parse_expression,
)
from qcahaz.cli import main
from qcahaz.energy import (
    TARGET_E_KINK,
    TARGET_E_OPP,
    TARGET_E_SAME,
    EnergyParams,
    kink_breakdown,
    kink_energy,
    output_stage_kink,
    pair_interaction,
    search_output_stage,
    stage_breakdown,
)
from qcahaz.layout import Geometry, QcaCell, load_layout, save_layout
from qcahaz.synth import builtin_demo, majority_layout, primitive_layout
from qcahaz.timing import glitch_search

import conftest
from oracles import NAMES, assignments, brute_hazards, coulomb, cover_true, dots, function_of, kink_oracle

REPO = Path(__file__).resolve().parents[1]
EQ4 = "AB' + BC'"
FIXED = "AB' + BC' + AC'"


@contextlib.contextmanager
def criterion(n):
    # a parametrized criterion passes only if every case does
    previous = conftest.CRITERIA.get(n, "PASS")
    conftest.CRITERIA[n] = "FAIL"
    try:
        yield
    except BaseException:
        print(f"criterion {n}: FAIL")
        raise
    conftest.CRITERIA[n] = previous
    print(f"criterion {n}: PASS")


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


def bits(s):
    return tuple(int(c) for c in s)


def test_criterion_1_case_study():
    with criterion(1):
        t0 = time.perf_counter()
        cover = parse_expression(EQ4)
        report = detect_static1_hazards(cover)
        assert len(report.hazards) == 1
        h = report.hazards[0]
        assert {h.minterm_a, h.minterm_b} == {bits("100"), bits("110")}
        assert h.toggled_variable.name == "B"
        fixed = eliminate_hazards(cover)
        assert fixed.term_set() == parse_expression(FIXED).term_set()
        assert time.perf_counter() - t0 < 1.0


def test_criterion_2_glitches():
    with criterion(2):
        t0 = time.perf_counter()
        eq4 = parse_expression(EQ4)
        b_flip = [(bits("100"), bits("110")), (bits("110"), bits("100"))]
        assert glitch_search(eq4, 4, transitions=b_flip)
        fixed = parse_expression(FIXED)
        # every single-bit transition between true minterms, both directions
        transitions = []
        for a in assignments(3):
            for v in range(3):
                b = tuple(1 - x if i == v else x for i, x in enumerate(a))
                if cover_true(fixed, a) and cover_true(fixed, b):
                    transitions.append((a, b))
        assert len(transitions) == 6
        assert glitch_search(fixed, 4, transitions=transitions) == []
        assert time.perf_counter() - t0 < 10.0


def random_cover(rng):
    n = rng.randint(1, 5)
    terms = set()
    for _ in range(rng.randint(1, 6)):
        lits = [(v, rng.random() < 0.5) for v in range(n) if rng.random() < 0.6]
        if not lits:
            v = rng.randrange(n)
            lits = [(v, rng.random() < 0.5)]
        terms.add(ProductTerm.of(*lits))
    return Cover(tuple(NAMES[:n]), tuple(sorted(terms, key=lambda t: t.sort_key())))


def test_criterion_3_elimination_soundness():
    with criterion(3):
        rng = random.Random(20261016)
        t0 = time.perf_counter()
        for _ in range(1000):
            cover = random_cover(rng)
            fixed = eliminate_hazards(cover)
            assert function_of(fixed) == function_of(cover), cover.to_text()
            assert not brute_hazards(fixed), cover.to_text()
        assert time.perf_counter() - t0 < 30.0


def test_criterion_4_electrostatics():
    with criterion(4):
        rng = random.Random(4)
        for eps in (1.0, 12.9):
            params = EnergyParams(relative_permittivity=eps)
            for _ in range(200):
                p1 = (rng.uniform(-100, 100), rng.uniform(-100, 100))
                p2 = (rng.uniform(-100, 100), rng.uniform(-100, 100))
                r = ((p1[0] - p2[0]) ** 2 + (p1[1] - p2[1]) ** 2) ** 0.5
                assert rel(pair_interaction(p1, p2, params), 23.04e-29 / (eps * r * 1e-9)) <= 1e-12
        geom = Geometry()
        a, b = QcaCell((0.0, 0.0)), QcaCell((20.0, 0.0))
        ref = kink_energy(a, b, geom)
        assert rel(kink_energy(b, a, geom), ref) <= 1e-12
        for dx, dy in ((7.5, -3.25), (-120.0, 44.0), (1000.0, 1000.0)):
            moved = kink_energy(QcaCell((dx, dy)), QcaCell((20.0 + dx, dy)), geom)
            assert rel(moved, ref) <= 1e-12
        # far-field: E_kink falls at least as fast as 1/d and the 1/d-scaled
        # value of pair terms stays exact for each charge pair
        for d in (40.0, 80.0, 160.0):
            near = kink_energy(a, QcaCell((d, 0.0)), geom)
            far = kink_energy(a, QcaCell((2 * d, 0.0)), geom)
            assert 0 < far < near / 2
        for d in (20.0, 40.0, 100.0):
            assert rel(pair_interaction((0, 0), (2 * d, 0)), pair_interaction((0, 0), (d, 0)) / 2) <= 1e-12
        for _ in range(200):
            c1 = QcaCell((rng.uniform(-60, 60), rng.uniform(-60, 60)), rotation=rng.choice((0, 45)))
            c2 = QcaCell((c1.center[0] + rng.choice((-1, 1)) * rng.uniform(20, 80), rng.uniform(-60, 60)),
                         rotation=rng.choice((0, 45)))
            got = kink_breakdown(c1, c2, geom)
            want = kink_oracle(c1, c2, geom.dot_spacing)
            for g, w in zip(got, want):
                assert abs(g - w) <= 1e-12 * max(abs(x) for x in want[:2])


def test_criterion_5_output_stage_energies():
    with criterion(5):
        candidates = search_output_stage()
        best = candidates[0]
        if best.error <= 0.01:
            assert rel(best.e_opp, TARGET_E_OPP) <= 0.01
            assert rel(best.e_same, TARGET_E_SAME) <= 0.01
            assert rel(best.e_kink, TARGET_E_KINK) <= 0.01
            return
        # no candidate reaches 1%: oracle equivalence, exact identity, written note
        for cand in candidates[:50] + candidates[-10:]:
            geom, target, drivers = cand.cells()
            e_opp, e_same, e_kink = stage_breakdown(target, drivers, geom, EnergyParams(), cand.driver_pols)
            assert e_kink == e_opp - e_same
            o_opp = o_same = 0.0
            for sign in (1, -1):
                charges = [q for c, p in zip(drivers, cand.driver_pols)
                           for q in dots(c.center, 0, sign * p, geom.dot_spacing)]
                ref = sign * cand.driver_pols[0]
                o_opp += coulomb(dots(target.center, 0, -ref, geom.dot_spacing), charges) / 2
                o_same += coulomb(dots(target.center, 0, ref, geom.dot_spacing), charges) / 2
            assert rel(e_opp, o_opp) <= 1e-12 and rel(e_same, o_same) <= 1e-12
            assert cand.e_kink == cand.e_opp - cand.e_same
        note = REPO / "docs" / "energy_reconstruction.md"
        assert note.is_file() and f"{best.error:.2%}" in note.read_text()


def test_criterion_6_equal_kink():
    with criterion(6):
        a = output_stage_kink(builtin_demo("with_hazard"), "f")
        b = output_stage_kink(builtin_demo("hazard_free"), "f")
        assert a > 0 and rel(a, b) <= 1e-9


@pytest.mark.parametrize("which", ["with_hazard", "hazard_free"])
def test_criterion_7_demo_truth_tables(which):
    with criterion(7):
        params = E.SimParams()
        assert (params.samples, params.convergence_tolerance, params.radius_of_effect) == (12800, 0.001, 65.0)
        assert (params.clock_low, params.clock_high, params.max_iterations_per_sample) == (3.8e-23, 9.8e-22, 100)
        lay = builtin_demo(which)
        t0 = time.perf_counter()
        rows = E.extract_truth_table(E.run(lay, params), lay)
        assert time.perf_counter() - t0 < 60.0
        cover = parse_expression(EQ4)
        assert len(rows) == 8
        for r in rows:
            assert r.outputs == (int(cover_true(cover, r.inputs)),)
            assert not any(r.weak)


def _truth(lay):
    rows = E.extract_truth_table(E.run(lay), lay)
    for r in rows:
        assert abs(r.polarizations[0]) >= 0.5
    return {r.inputs: r.outputs[0] for r in rows}


def test_criterion_8_primitives():
    with criterion(8):
        maj = _truth(majority_layout())
        assert maj == {a: int(sum(a) >= 2) for a in assignments(3)}
        assert _truth(primitive_layout("and")) == {a: a[0] & a[1] for a in assignments(2)}
        assert _truth(primitive_layout("or")) == {a: a[0] | a[1] for a in assignments(2)}
        assert _truth(primitive_layout("inverter")) == {(0,): 1, (1,): 0}
        assert _truth(primitive_layout("wire")) == {(0,): 0, (1,): 1}


def _run_cli(argv):
    with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
        return main(argv)


def test_criterion_9_determinism_and_round_trip(tmp_path):
    with criterion(9):
        runs = []
        for k in range(2):
            d = tmp_path / str(k)
            d.mkdir()
            _run_cli(["demo", "fig12", "-o", str(d / "demo.qcl")])
            _run_cli(["synth", EQ4, "--hazard-free", "-o", str(d / "synth.qcl")])
            _run_cli(["sim", str(d / "synth.qcl"), "--samples", "3200", "-o", str(d / "trace.csv")])
            _run_cli(["sim", str(d / "demo.qcl"), "--samples", "3200", "--trace-all", "-o", str(d / "all.csv")])
            runs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
        assert len(runs[0]) == 4 and runs[0] == runs[1]
        for which in ("with_hazard", "hazard_free"):
            lay = builtin_demo(which)
            text = save_layout(lay)
            assert load_layout(text) == lay
            assert save_layout(load_layout(text)) == text
