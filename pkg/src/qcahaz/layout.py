"""QCA cell layouts: data model, primitive templates and the ``.qcl`` format."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

ROT_90 = 0
ROT_45 = 45
ROLES = ("normal", "fixed", "input", "output")

Point = tuple[float, float]


class LayoutFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class Geometry:
    cell_size: float = 18.0
    dot_diameter: float = 5.0
    dot_spacing: float = 9.0
    pitch: float = 20.0

    def __post_init__(self):
        if min(self.cell_size, self.dot_diameter, self.dot_spacing, self.pitch) <= 0:
            raise ValueError("geometry values must be positive")
        if self.dot_spacing >= self.cell_size:
            raise ValueError("dot spacing must be smaller than the cell size")
        if self.pitch < self.cell_size:
            raise ValueError("pitch must be at least the cell size")


@dataclass(frozen=True)
class QcaCell:
    center: Point
    rotation: int = ROT_90
    zone: int = 0
    role: str = "normal"
    polarization: int | None = None  # fixed cells only
    label: str | None = None  # input/output cells only

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def token(self) -> str:
        if self.role == "fixed":
            return f"fixed:{self.polarization:+d}"
        if self.role in ("input", "output"):
            return f"{self.role}:{self.label}"
        return self.role

    @property
    def is_free(self) -> bool:
        """Updated by the simulator (not fixed, not a driven input)."""
        return self.role in ("normal", "output")


def cell(x: float, y: float, zone: int = 0, role: str = "normal", *, pol: int | None = None,
         label: str | None = None, rotation: int = ROT_90) -> QcaCell:
    return QcaCell((x, y), rotation, zone, role, pol, label)


@dataclass(frozen=True)
class QcaLayout:
    cells: tuple[QcaCell, ...]
    geometry: Geometry = field(default_factory=Geometry)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))

    def indices(self, role: str) -> list[int]:
        return [i for i, c in enumerate(self.cells) if c.role == role]

    @property
    def inputs(self) -> list[int]:
        return self.indices("input")

    @property
    def outputs(self) -> list[int]:
        return self.indices("output")

    def labels(self, role: str) -> list[str]:
        return [self.cells[i].label for i in self.indices(role)]

    def find_label(self, label: str, role: str | None = None) -> int:
        for i, c in enumerate(self.cells):
            if c.label == label and (role is None or c.role == role):
                return i
        raise KeyError(f"no {role or 'labelled'} cell named {label!r}")

    def with_cells(self, cells: Iterable[QcaCell]) -> "QcaLayout":
        return replace(self, cells=tuple(cells))

    def bounding_box(self) -> tuple[float, float, float, float]:
        xs = [c.center[0] for c in self.cells]
        ys = [c.center[1] for c in self.cells]
        return min(xs), min(ys), max(xs), max(ys)


# -- validation ----------------------------------------------------------------

def validate(layout: QcaLayout, radius_of_effect: float = 65.0) -> list[str]:
    """Human-readable rule violations; an empty list means the layout is usable."""
    problems = []
    seen: dict[Point, int] = {}
    for i, c in enumerate(layout.cells):
        if c.center in seen:
            problems.append(f"overlap: cells {seen[c.center]} and {i} share center {c.center}")
        else:
            seen[c.center] = i
        if c.zone not in (0, 1, 2, 3):
            problems.append(f"zone: cell {i} has clock zone {c.zone} outside 0-3")
        if c.role not in ROLES:
            problems.append(f"role: cell {i} has unknown role {c.role!r}")
        if c.rotation not in (ROT_90, ROT_45):
            problems.append(f"rotation: cell {i} has rotation {c.rotation}")
        if c.role == "fixed" and c.polarization not in (1, -1):
            problems.append(f"fixed: cell {i} polarization {c.polarization} is not +1/-1")
        if c.role in ("input", "output") and not c.label:
            problems.append(f"label: {c.role} cell {i} has no label")
    for role in ("input", "output"):
        names = layout.labels(role)
        for name in sorted({n for n in names if names.count(n) > 1}):
            problems.append(f"label: duplicate {role} label {name!r}")
    for i, c in enumerate(layout.cells):
        if c.role == "fixed":
            continue
        if not any(j != i and math.dist(c.center, o.center) <= radius_of_effect
                   for j, o in enumerate(layout.cells)):
            problems.append(f"isolated: cell {i} at {c.center} has no neighbour within {radius_of_effect} nm")
    return problems


def is_simulatable(layout: QcaLayout) -> bool:
    return bool(layout.inputs) and bool(layout.outputs) and not validate(layout)


# -- primitive templates -----------------------------------------------------

def place_wire(start: Point, end: Point, zone_schedule: Sequence[tuple[int, int]] | None = None,
               pitch: float = 20.0) -> list[QcaCell]:
    """Straight run of standard cells from ``start`` to ``end`` inclusive.

    ``zone_schedule`` is a list of ``(cell count, zone)`` applied in order
    from ``start``; omitted means zone 0 throughout.
    """
    (x0, y0), (x1, y1) = start, end
    if x0 != x1 and y0 != y1:
        raise ValueError(f"wire {start} -> {end} is not axis-aligned")
    length = abs(x1 - x0) + abs(y1 - y0)
    steps = round(length / pitch)
    if not math.isclose(steps * pitch, length, abs_tol=1e-9):
        raise ValueError(f"wire length {length} is not a multiple of the pitch {pitch}")
    count = steps + 1
    if zone_schedule is None:
        zone_schedule = [(count, 0)]
    zones = [z for n, z in zone_schedule for _ in range(n)]
    if len(zones) != count:
        raise ValueError(f"zone schedule covers {len(zones)} cells, wire has {count}")
    dx = (x1 - x0) / steps if steps else 0.0
    dy = (y1 - y0) / steps if steps else 0.0
    return [QcaCell((x0 + k * dx, y0 + k * dy), ROT_90, zones[k]) for k in range(count)]


# Port offsets (pitch units, y grows downward) for each output direction:
# (west-ish input, north-ish input, south-ish input, device, output).
_MAJORITY_PORTS = {
    "E": ((-1, 0), (0, -1), (0, 1), (0, 0), (1, 0)),
    "S": ((-1, 0), (0, -1), (1, 0), (0, 0), (0, 1)),
    "W": ((1, 0), (0, -1), (0, 1), (0, 0), (-1, 0)),
    "N": ((-1, 0), (0, 1), (1, 0), (0, 0), (0, -1)),
}


def place_majority(center: Point, zone: int = 0, pitch: float = 20.0, facing: str = "E") -> list[QcaCell]:
    """Five-cell majority gate: three input ports, the device cell, one output port.

    With the default ``facing="E"`` the inputs sit west, north (y - pitch)
    and south of the device and the output east of it; other facings rotate
    the template. Cells are returned as [in, in, in, device, output].
    """
    x, y = center
    return [QcaCell((x + dx * pitch, y + dy * pitch), ROT_90, zone) for dx, dy in _MAJORITY_PORTS[facing]]


# Inverter template, relative to the input point in pitch units:
#
#     i . . .        i = input cell (0, 0), the last cell of the incoming wire
#     . x o o        x = (1, 1), coupled to i only corner to corner
#
# Diagonal neighbours have negative kink energy, so x settles opposite to i;
# the run o = (2, 1), (3, 1) carries the inverted value on. ``direction``
# mirrors the template in x, ``drop`` in y.
INVERTER_TEMPLATE = ((0, 0), (1, 1), (2, 1), (3, 1))


def place_inverter(input_point: Point, zone: int = 0, pitch: float = 20.0,
                   direction: int = 1, drop: int = 1) -> list[QcaCell]:
    x, y = input_point
    return [QcaCell((x + direction * i * pitch, y + drop * j * pitch), ROT_90, zone)
            for i, j in INVERTER_TEMPLATE]


# -- .qcl text format ----------------------------------------------------------

QCL_HEADER = "qcl 1"
GEOMETRY_FIELDS = ("cell_size", "dot_diameter", "dot_spacing", "pitch")


def _fmt(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def save_layout(layout: QcaLayout) -> str:
    lines = [QCL_HEADER]
    if layout.name:
        lines.append(f"# {layout.name}")
    for name in GEOMETRY_FIELDS:
        lines.append(f"param {name} {_fmt(getattr(layout.geometry, name))}")
    for c in layout.cells:
        lines.append(f"cell {_fmt(c.center[0])} {_fmt(c.center[1])} {c.rotation} {c.zone} {c.token}")
    return "\n".join(lines) + "\n"


def _parse_role(token: str, lineno: int) -> tuple[str, int | None, str | None]:
    if token == "normal":
        return "normal", None, None
    kind, sep, arg = token.partition(":")
    if kind == "fixed" and sep and arg in ("+1", "-1"):
        return "fixed", int(arg), None
    if kind in ("input", "output") and sep and arg:
        return kind, None, arg
    raise LayoutFormatError(f"unknown role token {token!r}", lineno)


def load_layout(text: str) -> QcaLayout:
    lines = text.splitlines()
    name = ""
    body = []
    header_seen = False
    for lineno, raw in enumerate(lines, 1):
        stripped = raw.strip()
        if not header_seen:
            if not stripped:
                continue
            if stripped != QCL_HEADER:
                raise LayoutFormatError(f"expected header {QCL_HEADER!r}, found {stripped!r}", lineno)
            header_seen = True
            continue
        if stripped.startswith("#"):
            if not name and not body:
                name = stripped[1:].strip()
            continue
        content = stripped.split("#", 1)[0].strip()
        if content:
            body.append((lineno, content.split()))
    if not header_seen:
        raise LayoutFormatError(f"missing {QCL_HEADER!r} header", 1)
    params: dict[str, float] = {}
    cells = []
    for lineno, parts in body:
        try:
            if parts[0] == "param" and len(parts) == 3:
                if parts[1] not in GEOMETRY_FIELDS:
                    raise LayoutFormatError(f"unknown parameter {parts[1]!r}", lineno)
                params[parts[1]] = float(parts[2])
            elif parts[0] == "cell" and len(parts) == 6:
                x, y = float(parts[1]), float(parts[2])
                rot, zone = int(parts[3]), int(parts[4])
                if rot not in (ROT_90, ROT_45):
                    raise LayoutFormatError(f"rotation must be 0 or 45, got {parts[3]}", lineno)
                role, pol, label = _parse_role(parts[5], lineno)
                cells.append(QcaCell((x, y), rot, zone, role, pol, label))
            else:
                raise LayoutFormatError(f"malformed line {' '.join(parts)!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, LayoutFormatError):
                raise
            raise LayoutFormatError(f"bad number in {' '.join(parts)!r}", lineno) from exc
    try:
        geometry = Geometry(**params)
    except ValueError as exc:
        raise LayoutFormatError(str(exc)) from exc
    return QcaLayout(tuple(cells), geometry, name)


def read_layout(path: str | os.PathLike) -> QcaLayout:
    with open(path, encoding="utf-8") as fh:
        return load_layout(fh.read())


def write_layout(layout: QcaLayout, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(save_layout(layout))
