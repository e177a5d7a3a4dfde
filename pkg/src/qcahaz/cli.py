"""``qcahaz`` command line: hazards, glitches, QCA synthesis, simulation, energies."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from . import engine
from .boolean_core import (
    ExpressionSyntaxError,
    NotTwoLevelError,
    assignment_from_string,
    detect_static1_hazards,
    eliminate_hazards,
    eval_cover,
    format_assignment,
    parse_expression,
    parse_expression_styled,
)
from .energy import EnergyParams, format_energy, kink_breakdown, output_stage_breakdown
from .layout import GEOMETRY_FIELDS, Geometry, LayoutFormatError, read_layout, validate, write_layout
from .synth import DEMO_FILES, RoutingError, demo_text, synthesize_sop
from .timing import delays_from_keys, detect_glitch, render_events, simulate_transition, sop_to_netlist

GEOMETRY_ENV = "QCAHAZ_GEOMETRY"


class UsageError(Exception):
    pass


def _emit_json(command: str, inputs: dict, result: dict, warnings: list[str], status: int) -> None:
    digest = hashlib.sha256(json.dumps(inputs, sort_keys=True).encode()).hexdigest()[:16]
    report = {"command": command, "input": inputs, "input_digest": digest, "result": result,
              "warnings": warnings, "status": status}
    print(json.dumps(report, sort_keys=True, indent=2))


def _parse(text: str):
    try:
        return parse_expression_styled(text)
    except (ExpressionSyntaxError, NotTwoLevelError) as exc:
        raise UsageError(f"cannot parse {text!r} at position {exc.position}: {exc}") from exc


def load_geometry(path: str | None = None) -> Geometry:
    """Geometry from ``param <name> <value>`` lines (the .qcl syntax); defaults otherwise."""
    path = path or os.environ.get(GEOMETRY_ENV)
    if not path:
        return Geometry()
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].split()
            if not line:
                continue
            if len(line) != 3 or line[0] != "param" or line[1] not in GEOMETRY_FIELDS:
                raise UsageError(f"{path}:{lineno}: expected 'param <{'|'.join(GEOMETRY_FIELDS)}> <value>'")
            values[line[1]] = float(line[2])
    return Geometry(**values)


# -- commands ------------------------------------------------------------------

def cmd_analyze(args) -> int:
    cover, comp, conj = _parse(args.expr)
    report = detect_static1_hazards(cover)
    status = 1 if report.hazards else 0
    hazards = [{"from": format_assignment(h.minterm_a), "to": format_assignment(h.minterm_b),
                "variable": h.toggled_variable.name, "cure": cover.term_text(h.curing_term, comp, conj)}
               for h in report.hazards]
    if args.json:
        _emit_json("analyze", {"expr": args.expr},
                   {"variables": list(cover.variables), "cover": cover.to_text(comp, conj),
                    "hazards": hazards, "added_terms": [cover.term_text(t, comp, conj) for t in report.added_terms],
                    "hazard_free": not hazards}, [], status)
        return status
    print(f"f = {cover.to_text(comp, conj)}")
    print(f"variables: {' '.join(cover.variables)}")
    print(f"static-1 hazards: {len(hazards)}")
    for h in hazards:
        print(f"  {h['from']} <-> {h['to']}  toggles {h['variable']}  cured by {h['cure']}")
    return status


def cmd_fix(args) -> int:
    cover, comp, conj = _parse(args.expr)
    fixed = eliminate_hazards(cover)
    if args.json:
        _emit_json("fix", {"expr": args.expr}, {"fixed": fixed.to_text(comp, conj),
                                               "added": len(fixed.terms) - len(cover.terms)}, [], 0)
    else:
        print(fixed.to_text(comp, conj))
    return 0


def _delay_pairs(items: list[str]) -> dict[str, int]:
    out = {}
    for item in items:
        for part in filter(None, (p.strip() for p in item.split(","))):
            key, sep, val = part.partition("=")
            if not sep:
                raise UsageError(f"delay {part!r} is not key=value")
            try:
                out[key.strip()] = int(val)
            except ValueError:
                raise UsageError(f"delay {part!r} has a non-integer value") from None
    return out


def cmd_glitch(args) -> int:
    cover, _, _ = _parse(args.expr)
    try:
        start, end = assignment_from_string(args.from_), assignment_from_string(args.to)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    for bits in (start, end):
        if len(bits) != cover.n:
            raise UsageError(f"assignment {format_assignment(bits)} has {len(bits)} bits, "
                             f"expression has {cover.n} variables ({' '.join(cover.variables)})")
    netlist = sop_to_netlist(cover)
    try:
        delays = delays_from_keys(netlist, _delay_pairs(args.delays))
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc.args[0] if exc.args else exc)) from exc
    netlist = netlist.with_delays(delays)
    events = simulate_transition(netlist, start, end)
    before, after = int(eval_cover(cover, start)), int(eval_cover(cover, end))
    if before == after:
        glitch = detect_glitch(events, before)
    else:
        glitch = len(events) > 1  # a dynamic hazard: more than the one expected edge
    verdict = "GLITCH" if glitch else "CLEAN"
    status = 1 if glitch else 0
    if args.json:
        _emit_json("glitch", {"expr": args.expr, "from": args.from_, "to": args.to,
                              "delays": {g.key: g.delay for g in netlist.gates}},
                   {"events": [[e.time, e.value] for e in events], "initial": before, "final": after,
                    "verdict": verdict}, [], status)
        return status
    print(f"f = {cover.to_text()}  {format_assignment(start)} -> {format_assignment(end)}")
    print("delays: " + " ".join(f"{g.key}={g.delay}" for g in netlist.gates))
    print(f"output starts at {before}")
    sys.stdout.write(render_events(events))
    print(verdict)
    return status


def cmd_synth(args) -> int:
    cover, comp, conj = _parse(args.expr)
    if args.hazard_free:
        cover = eliminate_hazards(cover)
    if cover.is_constant():
        raise UsageError("constant function: nothing to synthesize")
    try:
        layout = synthesize_sop(cover, load_geometry(), name=f"f = {cover.to_text(comp, conj)}")
    except RoutingError as exc:
        raise UsageError(str(exc)) from exc
    try:
        write_layout(layout, args.output)
    except OSError as exc:
        raise UsageError(f"cannot write {args.output}: {exc.strerror}") from exc
    print(f"wrote {args.output}: f = {cover.to_text(comp, conj)}, {len(layout.cells)} cells, "
          f"inputs {' '.join(layout.labels('input'))}, output {' '.join(layout.labels('output'))}")
    return 0


def _read_layout(path: str):
    try:
        return read_layout(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except LayoutFormatError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def default_samples(n_inputs: int) -> int:
    return max(12800, 1600 * 2 ** n_inputs)


def cmd_sim(args) -> int:
    layout = _read_layout(args.layout)
    problems = validate(layout)
    if problems:
        raise UsageError("invalid layout: " + "; ".join(problems))
    labels = layout.labels("input")
    params = engine.SimParams(samples=args.samples or default_samples(len(labels)))
    try:
        trace = engine.run(layout, params)
    except (engine.SimulationError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    rows = engine.extract_truth_table(trace, layout)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            engine.write_trace_csv(trace, fh, args.trace_all)
    warnings = []
    outs = layout.labels("output")
    for r in rows:
        for name, w, p in zip(outs, r.weak, r.polarizations):
            if w:
                warnings.append(f"weak output {name} at {format_assignment(r.inputs)} (P = {p:+.3f})")
    nc = trace.nonconverged_fraction
    if nc > 0:
        warnings.append(f"{nc:.4%} of samples hit the iteration limit")
    mismatches = []
    if args.expect:
        cover, _, _ = _parse(args.expect)
        missing = [v for v in cover.variables if v not in labels]
        if missing:
            raise UsageError(f"--expect uses {', '.join(missing)}, layout inputs are {', '.join(labels)}")
        for r in rows:
            bits = [r.inputs[labels.index(v)] for v in cover.variables]
            if r.outputs[0] != int(eval_cover(cover, bits)):
                mismatches.append(format_assignment(r.inputs))
    status = 1 if mismatches else 0
    if args.json:
        result = {"samples": trace.samples, "nonconverged_fraction": round(nc, 6),
                  "rows": [{"inputs": format_assignment(r.inputs), "outputs": list(r.outputs),
                            "polarizations": [round(p, 6) for p in r.polarizations]} for r in rows]}
        if args.expect:
            result["expect"] = {"expr": args.expect, "mismatches": mismatches,
                                "verdict": "FAIL" if mismatches else "PASS"}
        _emit_json("sim", {"layout": os.path.basename(args.layout), "samples": trace.samples,
                           "expect": args.expect}, result, warnings, status)
        return status
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(" ".join(labels) + " | " + " ".join(outs) + " | P")
    for r in rows:
        print(" ".join(str(b) for b in r.inputs) + " | " + " ".join(str(b) for b in r.outputs) + " | "
              + " ".join(f"{p:+.3f}" for p in r.polarizations))
    if args.expect:
        print(f"expect {args.expect}: " + ("FAIL at " + ", ".join(mismatches) if mismatches else "PASS"))
    return status


def cmd_kink(args) -> int:
    layout = _read_layout(args.layout)
    params = EnergyParams(relative_permittivity=args.permittivity)
    if args.output_stage:
        try:
            e_opp, e_same, e_kink = output_stage_breakdown(layout, args.output_stage, params, args.radius)
        except (KeyError, ValueError) as exc:
            raise UsageError(str(exc.args[0] if exc.args else exc)) from exc
        what = {"output_stage": args.output_stage}
    else:
        if args.cell_a is None or args.cell_b is None:
            raise UsageError("give --cell-a and --cell-b, or --output-stage LABEL")
        n = len(layout.cells)
        for idx in (args.cell_a, args.cell_b):
            if not 0 <= idx < n:
                raise UsageError(f"cell index {idx} out of range (layout has {n} cells)")
        if args.cell_a == args.cell_b:
            raise UsageError("--cell-a and --cell-b must differ")
        e_opp, e_same, e_kink = kink_breakdown(layout.cells[args.cell_a], layout.cells[args.cell_b],
                                               layout.geometry, params)
        what = {"cell_a": args.cell_a, "cell_b": args.cell_b}
    if args.json:
        _emit_json("kink", {"layout": os.path.basename(args.layout), **what, "permittivity": args.permittivity},
                   {"e_opp": format_energy(e_opp), "e_same": format_energy(e_same),
                    "e_kink": format_energy(e_kink)}, [], 0)
        return 0
    print(f"E_opp  = {format_energy(e_opp)} J")
    print(f"E_same = {format_energy(e_same)} J")
    print(f"E_kink = {format_energy(e_kink)} J")
    return 0


def cmd_demo(args) -> int:
    out = args.output or f"{DEMO_FILES[args.which]}.qcl"
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(demo_text(args.which))
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from exc
    print(f"wrote {out}")
    return 0


# -- argument parsing --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcahaz", description="Static hazards in two-level logic and QCA layouts.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="list static-1 hazards and their curing terms")
    a.add_argument("expr")
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_analyze)

    f = sub.add_parser("fix", help="add redundant terms until the cover is hazard-free")
    f.add_argument("expr")
    f.add_argument("--json", action="store_true")
    f.set_defaults(func=cmd_fix)

    g = sub.add_parser("glitch", help="event-simulate one input transition of the gate netlist")
    g.add_argument("expr")
    g.add_argument("--from", dest="from_", required=True, metavar="BITS")
    g.add_argument("--to", required=True, metavar="BITS")
    g.add_argument("--delays", action="append", default=[], metavar="KEY=N[,KEY=N...]",
                   help="gate delays by role key (not.<var>, and.<i>, or); default 1")
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_glitch)

    s = sub.add_parser("synth", help="synthesize a QCA layout (.qcl)")
    s.add_argument("expr")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--hazard-free", action="store_true", help="eliminate hazards first")
    s.set_defaults(func=cmd_synth)

    m = sub.add_parser("sim", help="bistable simulation of a .qcl layout")
    m.add_argument("layout")
    m.add_argument("-o", "--output", help="trace CSV path")
    m.add_argument("--samples", type=int, help="default max(12800, 1600 * 2**inputs)")
    m.add_argument("--expect", metavar="EXPR", help="compare the truth table with this expression")
    m.add_argument("--trace-all", action="store_true", help="trace every cell, not just inputs/outputs")
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_sim)

    k = sub.add_parser("kink", help="kink energy of a cell pair or an output stage")
    k.add_argument("layout")
    k.add_argument("--cell-a", type=int)
    k.add_argument("--cell-b", type=int)
    k.add_argument("--output-stage", metavar="LABEL")
    k.add_argument("--permittivity", type=float, default=1.0, help="relative permittivity (default 1)")
    k.add_argument("--radius", type=float, default=65.0, help="output-stage neighbourhood radius, nm")
    k.add_argument("--json", action="store_true")
    k.set_defaults(func=cmd_kink)

    d = sub.add_parser("demo", help="write a shipped demo layout")
    d.add_argument("which", choices=sorted(DEMO_FILES))
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_demo)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qcahaz {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
