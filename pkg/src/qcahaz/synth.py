"""Two-level covers to single-layer QCA layouts, plus the built-in demo layouts.

Floorplan (grid units of one pitch, y grows downward)::

      strip 0 | col 0 | strip 1 | col 1 | ... | col m-1 | strip m
              |   :   |         |   :   |
     A ---i---+-> o   |         |   :   |       each product term is a column:
              |   G <-+---i-----+-> G   |       a corner cell, then one AND
              |   :   |         |   :   |       (majority, fixed -1) per extra
              +---+---+-------- OR -----+-- OR ---- f   literal
                  spine (majority, fixed +1 below)

A variable owns one horizontal band inside a strip and can feed only the two
columns bordering that strip. One variable per layout may instead wrap over
the top to reach both outer strips. Covers that need more sharing than that
would need wire crossings and raise :class:`RoutingError`.

Clock zones follow logic depth: bands start in zone 0, AND gate ``j`` of a
column sits at depth ``j + 1``, the OR chain follows the deepest column, and
every wire gets two cells per zone it must step through so all paths into a
gate arrive in the same clock phase. The output leaves the last OR gate on a
straight three-cell run one zone later, the same in every synthesized layout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from importlib import resources

from .boolean_core import Cover, eliminate_hazards, parse_expression
from .layout import Geometry, QcaCell, QcaLayout, ROT_90, load_layout, place_majority, validate

ROW = 5  # grid rows between bands
MAX_TERMS = 8
MAX_VARIABLES = 8


class RoutingError(ValueError):
    """The cover has no crossing-free realization in this floorplan."""


@dataclass
class _Band:
    var: int
    strip: int
    left: tuple[int, bool] | None = None  # (column, complemented) fed through the left branch
    right: tuple[int, bool] | None = None
    wrap_tail: bool = False  # driven over the top from the strip-0 band
    row: int = 0
    x_in: int = 0


@dataclass(frozen=True)
class Plan:
    order: tuple[int, ...]  # term index per column
    strips: dict  # var -> strip for ordinary bands
    wrap: int | None  # var routed over the top, if any


def _term_columns(cover: Cover, order) -> dict[int, list[int]]:
    cols: dict[int, list[int]] = {}
    for c, t in enumerate(order):
        for lit in cover.terms[t].literals:
            cols.setdefault(lit.var, []).append(c)
    return cols


def plan_routing(cover: Cover) -> Plan:
    """First term order (lexicographic) whose variables fit the band rules."""
    m = len(cover.terms)
    if m > MAX_TERMS:
        raise RoutingError(f"{m} product terms exceed the {MAX_TERMS}-term router limit")
    for allow_wrap in (False, True):
        for order in itertools.permutations(range(m)):
            strips, wrap, ok = {}, None, True
            for v, cols in sorted(_term_columns(cover, order).items()):
                if len(cols) == 1:
                    strips[v] = cols[0]
                elif len(cols) == 2 and cols[1] == cols[0] + 1:
                    strips[v] = cols[1]
                elif allow_wrap and wrap is None and cols == [0, m - 1]:
                    wrap = v
                else:
                    ok = False
                    break
            if ok:
                return Plan(tuple(order), strips, wrap)
    raise RoutingError("cover needs wire crossings: some variable feeds non-adjacent product terms")


class _Grid:
    def __init__(self):
        self.cells: dict[tuple[int, int], tuple] = {}

    def put(self, x, y, level, role="normal", pol=None, label=None):
        if (x, y) in self.cells:
            raise RoutingError(f"internal placement clash at grid ({x}, {y})")
        self.cells[(x, y)] = (level % 4, role, pol, label)

    def path(self, points, levels):
        for (x, y), lv in zip(points, levels):
            self.put(x, y, lv)


def _levels(count: int, start: int, end: int) -> list[int]:
    """Zone levels for ``count`` wire cells stepping from ``start`` to ``end``, two cells per step."""
    steps = end - start
    if steps < 0 or count < 2 * steps:
        raise RoutingError(f"wire of {count} cells cannot bridge {steps} clock zones")
    out = [start] * (count - 2 * steps)
    for lv in range(start + 1, end + 1):
        out += [lv, lv]
    return out


def _branch(x_in, y, end_x, inverted):
    """Cells from next to the input towards ``end_x``; an inverter drops one row."""
    d = 1 if end_x > x_in else -1
    row = y + 1 if inverted else y
    return [(x, row) for x in range(x_in + d, end_x + d, d)]


def _need(inverted, level):
    return (3 if inverted else 1) + 2 * level


def synthesize_sop(cover: Cover, geometry: Geometry = Geometry(), name: str = "",
                   output_label: str = "f") -> QcaLayout:
    if cover.is_constant():
        raise RoutingError("constant function has no cell realization")
    if cover.n > MAX_VARIABLES:
        raise RoutingError(f"{cover.n} variables exceed the {MAX_VARIABLES}-variable limit")
    plan = plan_routing(cover)
    m = len(plan.order)
    terms = [cover.terms[t] for t in plan.order]

    bands: dict[tuple[int, int], _Band] = {}

    def band(v, s, tail=False):
        return bands.setdefault((s, v), _Band(v, s, wrap_tail=tail))

    for c, term in enumerate(terms):
        for lit in term.literals:
            use = (c, lit.complemented)
            v = lit.var
            if v == plan.wrap:
                if c == 0:
                    band(v, 0).right = use
                else:
                    band(v, m, tail=True).left = use
            elif plan.strips[v] == c:
                band(v, c).right = use
            else:
                band(v, c + 1).left = use
    ordered = sorted(bands.values(), key=lambda b: (b.strip, b.var))
    for r, b in enumerate(ordered):
        b.row = r

    def entry_y(b, inverted):
        return b.row * ROW + (1 if inverted and not b.wrap_tail else 0)

    # Column entries sorted top to bottom; the first one feeds the corner.
    entries: list[list[tuple[int, str, _Band]]] = [[] for _ in range(m)]
    for b in ordered:
        if b.right:
            entries[b.right[0]].append((entry_y(b, b.right[1]), "W", b))
        if b.left:
            entries[b.left[0]].append((entry_y(b, b.left[1]), "E", b))
    for e in entries:
        e.sort(key=lambda t: t[0])
    level_at: dict[tuple[int, int], int] = {}  # (column, band row) -> arrival level
    for c, e in enumerate(entries):
        for j, (_, _, b) in enumerate(e):
            level_at[(c, b.row)] = max(j - 1, 0)

    def needs(b):
        nl = _need(b.left[1], level_at[(b.left[0], b.row)]) if b.left else 0
        nr = _need(b.right[1], level_at[(b.right[0], b.row)]) if b.right else 0
        return nl, nr

    # Column x positions from strip widths.
    xs, x = [], 0
    for s in range(m):
        width = max([sum(needs(b)) + 5 for b in ordered if b.strip == s and not b.wrap_tail] + [6])
        x += width
        xs.append(x)

    g = _Grid()
    wrap_band = None
    for b in ordered:
        if b.wrap_tail:
            continue
        nl, nr = needs(b)
        y = b.row * ROW
        if b.right:
            c = b.right[0]
            is_corner = entries[c][0][2] is b
            end_r = xs[c] - (1 if is_corner else 2)
        if b.left:
            c = b.left[0]
            is_corner = entries[c][0][2] is b
            end_l = xs[c] + (1 if is_corner else 2)
            b.x_in = end_l + nl
        else:
            b.x_in = end_r - nr
        g.put(b.x_in, y, 0, "input", label=cover.variables[b.var])
        for end, use in ((end_l if b.left else None, b.left), (end_r if b.right else None, b.right)):
            if use is None:
                continue
            pts = _branch(b.x_in, y, end, use[1])
            g.path(pts, _levels(len(pts), 0, level_at[(use[0], b.row)]))
        if b.var == plan.wrap:
            wrap_band = b

    # Columns.
    outs = []  # (column, x, y of first descent cell, level)
    for c, e in enumerate(entries):
        xc = xs[c]
        y0 = e[0][0]
        g.put(xc, y0, 0)
        y = y0 + 1
        for j, (yg, side, _) in enumerate(e[1:]):
            g.path([(xc, yy) for yy in range(y, yg - 1)], [j] * (yg - 1 - y))
            lv = j + 1
            g.put(xc, yg - 1, lv)  # N port
            lit_x = xc - 1 if side == "W" else xc + 1
            fix_x = xc + 1 if side == "W" else xc - 1
            g.put(lit_x, yg, lv)
            g.put(xc, yg, lv)
            g.put(fix_x, yg, lv, "fixed", pol=-1)
            g.put(xc, yg + 1, lv)  # S port
            y = yg + 2
        outs.append((c, xc, y, len(e) - 1))
    depth_k = max(o[3] for o in outs)

    # Spine row below everything placed so far.
    y_low = max(yy for _, yy in g.cells)
    y_spine = y_low + 5
    for c, xc, y, lv in outs:
        target = depth_k + c - 1 if c else depth_k
        y_spine = max(y_spine, y + 2 * (target - lv) + 1)
    if m == 1:
        c, xc, y, lv = outs[0]
        down = [(xc, yy) for yy in range(y, y_spine + 1)]
        run = [(xc + k, y_spine) for k in range(1, 5)]
        g.path(down + run, [lv] * (len(down) + 1) + [lv + 1] * 3)
        out_pt, out_lv = (xc + 5, y_spine), lv + 1
    else:
        for c, xc, y, lv in outs:
            if c == 0:
                pts = [(xc, yy) for yy in range(y, y_spine + 1)] + \
                      [(xx, y_spine) for xx in range(xc + 1, xs[1] - 1)]
                g.path(pts, _levels(len(pts), lv, depth_k))
            else:
                pts = [(xc, yy) for yy in range(y, y_spine - 1)]
                g.path(pts, _levels(len(pts), lv, depth_k + c - 1))
        for i in range(m - 1):
            xo, lv = xs[i + 1], depth_k + 1 + i
            g.put(xo - 1, y_spine, lv)
            g.put(xo, y_spine - 1, lv)
            g.put(xo, y_spine, lv)
            g.put(xo, y_spine + 1, lv, "fixed", pol=1)
            g.put(xo + 1, y_spine, lv)
            if i < m - 2:
                g.path([(xx, y_spine) for xx in range(xo + 2, xs[i + 2] - 1)], [lv] * (xs[i + 2] - xo - 3))
        xo, lv = xs[m - 1] + 1, depth_k + m - 1
        g.path([(xo + k, y_spine) for k in (1, 2, 3)], [lv + 1] * 3)
        out_pt, out_lv = (xo + 4, y_spine), lv + 1
    g.put(*out_pt, out_lv, "output", label=output_label)

    # Over-the-top route for the wrap variable.
    if plan.wrap is not None:
        tail = bands[(m, plan.wrap)]
        x_min = min(xx for xx, _ in g.cells)
        x_max = max(xx for xx, _ in g.cells)
        y_top = min(yy for _, yy in g.cells) - 3
        x_l, x_r = x_min - 2, x_max + 2
        y_a = wrap_band.row * ROW
        inverted = tail.left[1]
        y_start = y_a + 1 if inverted else y_a
        y_b = tail.row * ROW
        c = tail.left[0]
        end = xs[c] + (1 if entries[c][0][2] is tail else 2)
        pts = [(xx, y_start) for xx in range(wrap_band.x_in - 1, x_l - 1, -1)]
        pts += [(x_l, yy) for yy in range(y_start - 1, y_top - 1, -1)]
        pts += [(xx, y_top) for xx in range(x_l + 1, x_r + 1)]
        pts += [(x_r, yy) for yy in range(y_top + 1, y_b + 1)]
        pts += [(xx, y_b) for xx in range(x_r - 1, end - 1, -1)]
        g.path(pts, _levels(len(pts), 0, level_at[(c, tail.row)]))

    # Inputs the cover never uses still get a (dangling) input cell.
    used = {b.var for b in ordered}
    spare = [v for v in range(cover.n) if v not in used]
    if spare:
        x0 = min(xx for xx, _ in g.cells)
        y0 = min(yy for _, yy in g.cells) - 5
        for k, v in enumerate(spare):
            g.put(x0 + 4 * k, y0, 0, "input", label=cover.variables[v])
            g.put(x0 + 4 * k + 1, y0, 0)

    x_min = min(xx for xx, _ in g.cells)
    y_min = min(yy for _, yy in g.cells)
    p = geometry.pitch
    cells = [QcaCell(((xx - x_min + 1) * p, (yy - y_min + 1) * p), ROT_90, zone, role, pol, label)
             for (xx, yy), (zone, role, pol, label) in g.cells.items()]
    # The simulator drives inputs in cell order, so list them in variable order.
    rank = {name: i for i, name in enumerate(cover.variables)}
    cells.sort(key=lambda c: rank[c.label] if c.role == "input" else len(rank))
    layout = QcaLayout(tuple(cells), geometry, name or cover.to_text())
    problems = validate(layout)
    if problems:
        raise RoutingError("synthesized layout is invalid: " + "; ".join(problems))
    return layout


# -- primitives ----------------------------------------------------------------

PRIMITIVES = {"wire": "A", "inverter": "A'", "and": "AB", "or": "A + B"}


def majority_layout(geometry: Geometry = Geometry()) -> QcaLayout:
    """Three-input majority gate fed by short zone-0 leads, output one zone later."""
    p = geometry.pitch
    gate = place_majority((0.0, 0.0), 1, p)
    cells = [QcaCell((-3 * p, 0.0), label="A", role="input"), QcaCell((0.0, -3 * p), label="B", role="input"),
             QcaCell((0.0, 3 * p), label="C", role="input")]
    cells += [QcaCell((-2 * p, 0.0)), QcaCell((0.0, -2 * p)), QcaCell((0.0, 2 * p))]
    cells += gate
    cells += [QcaCell((2 * p, 0.0), zone=2), QcaCell((3 * p, 0.0), zone=2),
              QcaCell((4 * p, 0.0), zone=2, role="output", label="f")]
    return QcaLayout(tuple(cells), geometry, "majority: f = M(A, B, C)")


def primitive_layout(kind: str, geometry: Geometry = Geometry()) -> QcaLayout:
    """Wire, inverter, AND (fixed -1), OR (fixed +1) or 3-input majority."""
    if kind == "majority":
        return majority_layout(geometry)
    expr = PRIMITIVES[kind]
    return synthesize_sop(parse_expression(expr), geometry, name=f"{kind}: f = {expr}")


# -- built-in demos ------------------------------------------------------------

DEMO_EXPRESSION = "AB' + BC'"
DEMO_FILES = {"with_hazard": "with_hazard", "hazard_free": "hazard_free", "inverter": "inverter",
              "fig12": "with_hazard", "fig13": "hazard_free"}


def demo_cover(which: str) -> Cover:
    kind = DEMO_FILES[which]
    if kind == "inverter":
        return parse_expression("A'")
    cover = parse_expression(DEMO_EXPRESSION)
    return eliminate_hazards(cover) if kind == "hazard_free" else cover


def build_demo(which: str) -> QcaLayout:
    """Regenerate a demo layout from its cover (what the shipped files contain)."""
    cover = demo_cover(which)
    return synthesize_sop(cover, name=f"{DEMO_FILES[which]}: f = {cover.to_text()}")


def demo_text(which: str) -> str:
    if which not in DEMO_FILES:
        raise KeyError(f"unknown demo {which!r}; choose from {', '.join(DEMO_FILES)}")
    return resources.files("qcahaz").joinpath("data", f"{DEMO_FILES[which]}.qcl").read_text(encoding="utf-8")


def builtin_demo(which: str) -> QcaLayout:
    """Shipped demo layout: ``with_hazard`` (alias ``fig12``), ``hazard_free`` (``fig13``) or ``inverter``."""
    return load_layout(demo_text(which))
