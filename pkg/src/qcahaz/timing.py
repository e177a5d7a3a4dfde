"""Two-level gate netlists and transport-delay event simulation.

Gates carry integer delays; wires are ideal. A change on a gate input at
time ``t`` schedules the gate's recomputed output at ``t + delay`` (transport
delay, so pulses of any width survive).
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .boolean_core import Cover, eval_cover, int_to_assignment

GATE_KINDS = ("NOT", "AND", "OR")


@dataclass(frozen=True)
class Gate:
    id: int
    kind: str
    input_nets: tuple[int, ...]
    output_net: int
    delay: int = 1
    key: str = ""

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "NOT" and len(self.input_nets) != 1:
            raise ValueError("NOT gate takes exactly one input")
        if self.kind != "NOT" and len(self.input_nets) < 2:
            raise ValueError(f"{self.kind} gate needs at least two inputs")
        if self.delay < 1:
            raise ValueError(f"gate delay must be >= 1, got {self.delay}")

    def evaluate(self, values: Sequence[int]) -> int:
        ins = [values[n] for n in self.input_nets]
        if self.kind == "NOT":
            return 1 - ins[0]
        if self.kind == "AND":
            return int(all(ins))
        return int(any(ins))


@dataclass(frozen=True)
class Event:
    time: int
    net: int
    value: int


@dataclass(frozen=True)
class GateNetlist:
    primary_inputs: tuple[tuple[str, int], ...]
    primary_output: int
    gates: tuple[Gate, ...]
    net_count: int
    fanout: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        drivers: dict[int, int] = {}
        for g in self.gates:
            if g.output_net in drivers:
                raise ValueError(f"net {g.output_net} driven by more than one gate")
            drivers[g.output_net] = g.id
        fanout: dict[int, list[Gate]] = {}
        for g in self.gates:
            for n in set(g.input_nets):
                fanout.setdefault(n, []).append(g)
        object.__setattr__(self, "fanout", fanout)
        self.topological_order()  # raises on cycles

    @property
    def gate_keys(self) -> dict[str, int]:
        return {g.key: g.id for g in self.gates}

    def topological_order(self) -> list[Gate]:
        driven = {g.output_net: g for g in self.gates}
        order: list[Gate] = []
        state: dict[int, int] = {}

        def visit(g: Gate):
            if state.get(g.id) == 2:
                return
            if state.get(g.id) == 1:
                raise ValueError("combinational cycle in netlist")
            state[g.id] = 1
            for n in g.input_nets:
                if n in driven:
                    visit(driven[n])
            state[g.id] = 2
            order.append(g)

        for g in self.gates:
            visit(g)
        return order

    def with_delays(self, delays: Mapping[int, int]) -> "GateNetlist":
        missing = {g.id for g in self.gates} - set(delays)
        if missing:
            raise ValueError(f"delay map does not cover gates {sorted(missing)}")
        gates = tuple(Gate(g.id, g.kind, g.input_nets, g.output_net, int(delays[g.id]), g.key)
                      for g in self.gates)
        return GateNetlist(self.primary_inputs, self.primary_output, gates, self.net_count)


def sop_to_netlist(cover: Cover, delays: Mapping[int, int] | None = None) -> GateNetlist:
    """Gate-level realization of a cover.

    Nets ``0..n-1`` are the primary inputs. Gate ids are assigned in order:
    one NOT per complemented variable (variable order), one AND per
    multi-literal term (term order), then the OR. Gates also carry role keys
    ``not.<var>``, ``and.<term index>`` and ``or``.
    """
    if cover.is_constant():
        raise ValueError("constant cover has no gate-level realization")
    n = cover.n
    net = itertools.count(n)
    gates: list[Gate] = []
    literal_net: dict[tuple[int, bool], int] = {(v, False): v for v in range(n)}
    complemented = sorted({l.var for t in cover.terms for l in t.literals if l.complemented})
    for v in complemented:
        out = next(net)
        gates.append(Gate(len(gates), "NOT", (v,), out, 1, f"not.{cover.variables[v]}"))
        literal_net[(v, True)] = out
    term_nets = []
    for i, term in enumerate(cover.terms):
        ins = tuple(literal_net[(l.var, l.complemented)] for l in term.literals)
        if len(ins) == 1:
            term_nets.append(ins[0])
            continue
        out = next(net)
        gates.append(Gate(len(gates), "AND", ins, out, 1, f"and.{i}"))
        term_nets.append(out)
    if len(term_nets) > 1:
        out = next(net)
        gates.append(Gate(len(gates), "OR", tuple(term_nets), out, 1, "or"))
    else:
        out = term_nets[0]
    netlist = GateNetlist(tuple((name, i) for i, name in enumerate(cover.variables)), out,
                          tuple(gates), next(net))
    if delays is not None:
        netlist = netlist.with_delays(delays)
    return netlist


def delays_from_keys(netlist: GateNetlist, spec: Mapping[str, int], default: int = 1) -> dict[int, int]:
    """Translate role-keyed delays (``and.1=3``) into a gate-id delay map."""
    keys = netlist.gate_keys
    unknown = set(spec) - set(keys)
    if unknown:
        raise KeyError(f"unknown gate key(s): {', '.join(sorted(unknown))}; known: {', '.join(keys)}")
    out = {g.id: default for g in netlist.gates}
    for k, d in spec.items():
        out[keys[k]] = int(d)
    return out


def settle(netlist: GateNetlist, bits: Sequence[int]) -> list[int]:
    """Quiescent value of every net under input ``bits``."""
    if len(bits) != len(netlist.primary_inputs):
        raise ValueError("assignment width does not match netlist inputs")
    values = [0] * netlist.net_count
    for (_, net), b in zip(netlist.primary_inputs, bits):
        values[net] = 1 if b else 0
    for g in netlist.topological_order():
        values[g.output_net] = g.evaluate(values)
    return values


def simulate_transition(netlist: GateNetlist, start: Sequence[int], end: Sequence[int]) -> list[Event]:
    """Output-net events after stepping the inputs from ``start`` to ``end`` at t=0.

    Events due at the same time are applied together in ascending net order,
    then every affected gate is re-evaluated in gate-id order.
    """
    values = settle(netlist, start)
    pending: list[tuple[int, int, int]] = []
    for (_, net), b in zip(netlist.primary_inputs, end):
        heapq.heappush(pending, (0, net, 1 if b else 0))
    out_events: list[Event] = []
    while pending:
        t = pending[0][0]
        batch: dict[int, int] = {}
        while pending and pending[0][0] == t:
            _, net, v = heapq.heappop(pending)
            batch[net] = v
        touched: dict[int, Gate] = {}
        for net in sorted(batch):
            if values[net] == batch[net]:
                continue
            values[net] = batch[net]
            if net == netlist.primary_output:
                out_events.append(Event(t, net, values[net]))
            for g in netlist.fanout.get(net, ()):
                touched[g.id] = g
        for gid in sorted(touched):
            g = touched[gid]
            heapq.heappush(pending, (t + g.delay, g.output_net, g.evaluate(values)))
    return out_events


def detect_glitch(events: Sequence[Event], steady: int) -> bool:
    """True when the output leaves ``steady`` at any point of the trace."""
    initial = 1 - events[0].value if events else steady
    final = events[-1].value if events else steady
    if initial != steady or final != steady:
        raise ValueError(f"trace starts at {initial} and ends at {final}, not at steady value {steady}")
    return any(e.value != steady for e in events)


def static1_transitions(cover: Cover) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Ordered single-bit transitions between true minterms (both directions)."""
    n = cover.n
    table = [eval_cover(cover, int_to_assignment(m, n)) for m in range(1 << n)]
    out = []
    for m in range(1 << n):
        if not table[m]:
            continue
        for v in range(n):
            p = m ^ (1 << (n - 1 - v))
            if table[p]:
                out.append((int_to_assignment(m, n), int_to_assignment(p, n)))
    return out


def glitch_search(cover: Cover, max_delay: int = 4,
                  transitions: Iterable | None = None) -> list[tuple[dict[int, int], tuple, tuple, list[Event]]]:
    """Every (delay map, transition) in ``{1..max_delay}**gates`` that glitches."""
    base = sop_to_netlist(cover)
    transitions = list(static1_transitions(cover) if transitions is None else transitions)
    found = []
    ids = [g.id for g in base.gates]
    for combo in itertools.product(range(1, max_delay + 1), repeat=len(ids)):
        delays = dict(zip(ids, combo))
        netlist = base.with_delays(delays)
        for a, b in transitions:
            events = simulate_transition(netlist, a, b)
            if detect_glitch(events, 1):
                found.append((delays, a, b, events))
    return found


def render_events(events: Sequence[Event]) -> str:
    """Two-column ``time value`` table."""
    lines = ["time value"]
    lines += [f"{e.time} {e.value}" for e in events]
    return "\n".join(lines) + "\n"

