"""Electrostatics between QCA cells and kink energies.

Only electron-electron Coulomb terms are summed. Positions are in nm and
converted to metres for the energy, which is ``KE2 / (eps_r * r)`` with
``KE2 = k * e**2 = 23.04e-29 J*m``.

Polarization convention for a standard (90 degree) cell, with y pointing up:
P = +1 puts the two electrons on the top-right / bottom-left dots, P = -1 on
the top-left / bottom-right dots. A 45 degree cell is the same picture
rotated by 45 degrees, so its P = +1 electrons sit on the vertical dot pair.

For cells that are not mirror-symmetric about the line joining them (e.g. a
diagonal neighbour) the electron-only energy has a term linear in each cell's
polarization, so E(+,-) != E(-,+). Opposite- and same-polarization energies
are therefore averaged over a global polarization flip, which leaves only the
polarization-polarization coupling in the kink energy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .layout import Geometry, QcaCell, QcaLayout, ROT_45

KE2 = 23.04e-29  # J*m
NM = 1e-9

Point = tuple[float, float]


class SingularityError(ValueError):
    """Two point charges at the same position."""


@dataclass(frozen=True)
class EnergyParams:
    ke2: float = KE2
    relative_permittivity: float = 1.0

    def __post_init__(self):
        if not (self.ke2 > 0 and self.relative_permittivity > 0):
            raise ValueError("energy parameters must be positive")


@dataclass(frozen=True)
class CellChargeConfig:
    cell: QcaCell
    polarization: int
    electrons: tuple[Point, Point]


def electron_positions(cell: QcaCell, polarization: int, geom: Geometry) -> tuple[Point, Point]:
    if polarization not in (1, -1):
        raise ValueError(f"polarization must be +1 or -1, got {polarization}")
    h = geom.dot_spacing / 2
    x, y = cell.center
    if cell.rotation == ROT_45:
        d = h * math.sqrt(2)
        if polarization == 1:
            return (x, y + d), (x, y - d)
        return (x - d, y), (x + d, y)
    if polarization == 1:
        return (x + h, y + h), (x - h, y - h)
    return (x - h, y + h), (x + h, y - h)


def charge_config(cell: QcaCell, polarization: int, geom: Geometry) -> CellChargeConfig:
    return CellChargeConfig(cell, polarization, electron_positions(cell, polarization, geom))


def pair_interaction(p1: Point, p2: Point, params: EnergyParams = EnergyParams()) -> float:
    r = math.dist(p1, p2)
    if r == 0.0:
        raise SingularityError(f"coincident charges at {p1}")
    return params.ke2 / (params.relative_permittivity * r * NM)


def cells_interaction(a: CellChargeConfig, b: CellChargeConfig, params: EnergyParams = EnergyParams()) -> float:
    return sum(pair_interaction(p, q, params) for p in a.electrons for q in b.electrons)


def _pair_energies(a: QcaCell, b: QcaCell, geom: Geometry, params: EnergyParams) -> tuple[float, float]:
    if a.center == b.center:
        raise SingularityError(f"cells coincide at {a.center}")
    e = {(pa, pb): cells_interaction(charge_config(a, pa, geom), charge_config(b, pb, geom), params)
         for pa in (1, -1) for pb in (1, -1)}
    e_opp = (e[1, -1] + e[-1, 1]) / 2
    e_same = (e[1, 1] + e[-1, -1]) / 2
    return e_opp, e_same


def kink_breakdown(a: QcaCell, b: QcaCell, geom: Geometry,
                   params: EnergyParams = EnergyParams()) -> tuple[float, float, float]:
    """(E_opp, E_same, E_kink) for a pair of cells."""
    e_opp, e_same = _pair_energies(a, b, geom, params)
    return e_opp, e_same, e_opp - e_same


def kink_energy(a: QcaCell, b: QcaCell, geom: Geometry, params: EnergyParams = EnergyParams()) -> float:
    return kink_breakdown(a, b, geom, params)[2]


def neighborhood_energy(target: QcaCell, target_pol: int, drivers: Sequence[CellChargeConfig],
                        geom: Geometry, params: EnergyParams = EnergyParams()) -> float:
    if not drivers:
        raise ValueError("neighborhood needs at least one driver")
    me = charge_config(target, target_pol, geom)
    return sum(cells_interaction(me, d, params) for d in drivers)


def stage_breakdown(target: QcaCell, neighbours: Sequence[QcaCell], geom: Geometry,
                    params: EnergyParams = EnergyParams(),
                    driver_pols: Sequence[int] | None = None) -> tuple[float, float, float]:
    """(E_opp, E_same, E_kink) of a target cell against a group of drivers.

    ``driver_pols`` gives the drivers' relative polarizations (all +1 by
    default); "opposite" means the target is anti-aligned with the first
    driver. Both energies are averaged over flipping every cell at once.
    """
    if driver_pols is None:
        driver_pols = [1] * len(neighbours)
    e_opp = e_same = 0.0
    for sign in (1, -1):
        drivers = [charge_config(c, sign * p, geom) for c, p in zip(neighbours, driver_pols)]
        ref = sign * driver_pols[0]
        e_opp += neighborhood_energy(target, -ref, drivers, geom, params) / 2
        e_same += neighborhood_energy(target, ref, drivers, geom, params) / 2
    return e_opp, e_same, e_opp - e_same


def cells_within(layout: QcaLayout, center: tuple[float, float], radius: float,
                 exclude: int | None = None) -> list[int]:
    return [i for i, c in enumerate(layout.cells)
            if i != exclude and math.dist(c.center, center) <= radius]


def output_stage_breakdown(layout: QcaLayout, output_label: str, params: EnergyParams = EnergyParams(),
                           radius: float = 65.0) -> tuple[float, float, float]:
    idx = layout.find_label(output_label, "output")
    out = layout.cells[idx]
    near = cells_within(layout, out.center, radius, exclude=idx)
    if not near:
        raise ValueError(f"output cell {output_label!r} has no neighbour within {radius} nm")
    return stage_breakdown(out, [layout.cells[i] for i in near], layout.geometry, params)


def output_stage_kink(layout: QcaLayout, output_label: str, params: EnergyParams = EnergyParams(),
                      radius: float = 65.0) -> float:
    """Kink energy of the labelled output cell against every cell within ``radius``."""
    return output_stage_breakdown(layout, output_label, params, radius)[2]


# -- reconstruction of the output-stage example ------------------------------

TARGET_E_OPP = 29.211e-20
TARGET_E_SAME = 19.497e-20
TARGET_E_KINK = 9.714e-20

RING_OFFSETS = tuple((i, j) for j in (1, 0, -1) for i in (-1, 0, 1) if (i, j) != (0, 0))


@dataclass(frozen=True)
class StageCandidate:
    pitch: float
    dot_spacing: float
    offsets: tuple[tuple[int, int], ...]
    driver_pols: tuple[int, ...]
    e_opp: float
    e_same: float

    @property
    def e_kink(self) -> float:
        return self.e_opp - self.e_same

    @property
    def error(self) -> float:
        """Worst relative deviation from the two reference neighbourhood energies."""
        return max(abs(self.e_opp - TARGET_E_OPP) / TARGET_E_OPP,
                   abs(self.e_same - TARGET_E_SAME) / TARGET_E_SAME)

    def cells(self) -> tuple[Geometry, QcaCell, list[QcaCell]]:
        geom = Geometry(cell_size=min(18.0, self.pitch), dot_spacing=self.dot_spacing, pitch=self.pitch)
        target = QcaCell((0.0, 0.0))
        drivers = [QcaCell((i * self.pitch, j * self.pitch)) for i, j in self.offsets]
        return geom, target, drivers


# Candidate search space: output cell plus 3 or 4 drivers taken from its
# eight surrounding grid sites. Dot spacing 9 nm is the engine default; 13 nm
# puts the 5 nm dots flush in the corners of an 18 nm cell.
SEARCH_PITCHES = (18.0, 20.0)
SEARCH_DOT_SPACINGS = (9.0, 13.0)
SEARCH_DRIVER_COUNTS = (3, 4)


def search_output_stage(params: EnergyParams = EnergyParams(),
                        pitches: Iterable[float] = SEARCH_PITCHES,
                        dot_spacings: Iterable[float] = SEARCH_DOT_SPACINGS,
                        driver_counts: Iterable[int] = SEARCH_DRIVER_COUNTS) -> list[StageCandidate]:
    """All candidate output-stage geometries, best match first."""
    found = []
    for pitch, ds, count in itertools.product(pitches, dot_spacings, driver_counts):
        geom = Geometry(cell_size=min(18.0, pitch), dot_spacing=ds, pitch=pitch)
        target = QcaCell((0.0, 0.0))
        for offsets in itertools.combinations(RING_OFFSETS, count):
            drivers = [QcaCell((i * pitch, j * pitch)) for i, j in offsets]
            for rest in itertools.product((1, -1), repeat=count - 1):
                pols = (1,) + rest
                e_opp, e_same, _ = stage_breakdown(target, drivers, geom, params, pols)
                found.append(StageCandidate(pitch, ds, offsets, pols, e_opp, e_same))
    found.sort(key=lambda c: (c.error, c.pitch, c.dot_spacing, c.offsets, c.driver_pols))
    return found


def best_output_stage(params: EnergyParams = EnergyParams()) -> StageCandidate:
    return search_output_stage(params)[0]


def format_energy(value: float) -> str:
    return f"{value:.5e}"
