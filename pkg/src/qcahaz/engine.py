"""Clocked bistable-approximation simulation of QCA layouts.

Every free cell follows ``P = x / sqrt(1 + x**2)`` with
``x = sum_j Ek(i, j) * P_j / (2 * gamma_zone(i))``, swept Gauss-Seidel style
in ascending cell index until the largest change drops below the tolerance.
Each sample starts from the previous sample's polarizations.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .energy import EnergyParams, kink_energy
from .layout import QcaLayout, validate


CLOCK_WAVEFORMS = ("trapezoid", "raised_cosine")


@dataclass(frozen=True)
class SimParams:
    samples: int = 12800
    convergence_tolerance: float = 0.001
    radius_of_effect: float = 65.0  # nm
    relative_permittivity: float = 12.9
    clock_high: float = 9.8e-22  # J
    clock_low: float = 3.8e-23  # J
    clock_amplitude_factor: float = 2.0
    clock_shift: float = 0.0  # J
    max_iterations_per_sample: int = 100
    layer_separation: float = 11.5  # nm, single-layer engine: unused
    clock_waveform: str = "trapezoid"  # or "raised_cosine"

    def __post_init__(self):
        if not self.clock_low < self.clock_high:
            raise ValueError("clock_low must be below clock_high")
        if self.convergence_tolerance <= 0:
            raise ValueError("convergence tolerance must be positive")
        if self.clock_waveform not in CLOCK_WAVEFORMS:
            raise ValueError(f"clock waveform must be one of {CLOCK_WAVEFORMS}")
        if self.samples < 4 or self.max_iterations_per_sample < 1:
            raise ValueError("samples and iteration limits must be positive")

    def check_inputs(self, n_inputs: int) -> None:
        if self.samples < 4 * 2 ** n_inputs:
            raise ValueError(f"{self.samples} samples is fewer than 4 per input combination")


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class NeighborGraph:
    """CSR adjacency: neighbours of cell i are ``indices[indptr[i]:indptr[i+1]]``."""

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    def neighbors(self, i: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.weights[lo:hi].tolist()))

    def __len__(self) -> int:
        return len(self.indptr) - 1


def build_neighbor_graph(layout: QcaLayout, params: SimParams = SimParams()) -> NeighborGraph:
    eparams = EnergyParams(relative_permittivity=params.relative_permittivity)
    cells = layout.cells
    n = len(cells)
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if math.dist(cells[i].center, cells[j].center) <= params.radius_of_effect:
                ek = kink_energy(cells[i], cells[j], layout.geometry, eparams)
                adj[i].append((j, ek))
                adj[j].append((i, ek))
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i, row in enumerate(adj):
        indptr[i + 1] = indptr[i] + len(row)
    indices = np.array([j for row in adj for j, _ in sorted(row)], dtype=np.int64)
    weights = np.array([w for row in adj for _, w in sorted(row)], dtype=np.float64)
    return NeighborGraph(indptr, indices, weights)


def _clock_raw(phase, params: SimParams):
    hi, lo = params.clock_high, params.clock_low
    if params.clock_waveform == "raised_cosine":
        return params.clock_amplitude_factor * (hi / 2) * (1 + np.cos(phase)) + params.clock_shift
    # Overdriven cosine about the mid level; clipping flattens it into a
    # trapezoid whose hold plateau overlaps the next zone's switching ramp.
    return params.clock_amplitude_factor * (hi - lo) * np.cos(phase) + (hi + lo) / 2 + params.clock_shift


def clock_value(zone: int, sample: float, params: SimParams, input_count: int) -> float:
    """Clock energy of ``zone`` at ``sample``; one period per input combination.

    Zone ``z`` lags zone 0 by a quarter period per step. A high value relaxes
    the zone's cells, a low value lets them latch (hold).
    """
    period = params.samples / 2 ** input_count
    phase = 2 * math.pi * sample / period - zone * math.pi / 2
    return float(min(max(_clock_raw(phase, params), params.clock_low), params.clock_high))


def clock_table(samples: np.ndarray, params: SimParams, input_count: int) -> np.ndarray:
    period = params.samples / 2 ** input_count
    phase = 2 * np.pi * np.asarray(samples, dtype=np.float64)[:, None] / period - np.arange(4)[None, :] * np.pi / 2
    return np.clip(_clock_raw(phase, params), params.clock_low, params.clock_high)


def input_combination(sample: int, params: SimParams, input_count: int) -> int:
    return (sample * 2 ** input_count) // params.samples


def drive_inputs(input_count: int, sample: int, params: SimParams) -> list[float]:
    """Input polarizations at ``sample``: binary counting, input 0 most significant."""
    if input_count < 1:
        raise ValueError("need at least one input")
    k = input_combination(sample, params, input_count) % 2 ** input_count
    return [1.0 if (k >> (input_count - 1 - i)) & 1 else -1.0 for i in range(input_count)]


@njit(cache=True)
def _relax(indptr, indices, weights, pol, free, zone, gamma, tol, max_iter):
    iterations = 0
    while iterations < max_iter:
        iterations += 1
        worst = 0.0
        for i in free:
            acc = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                acc += weights[k] * pol[indices[k]]
            x = acc / (2.0 * gamma[zone[i]])
            new = x / math.sqrt(1.0 + x * x)
            delta = abs(new - pol[i])
            if delta > worst:
                worst = delta
            pol[i] = new
        if worst < tol:
            return iterations, True
    return iterations, False


@njit(cache=True)
def _run(indptr, indices, weights, pol, free, zone, input_idx, input_pols, clocks, tol, max_iter, record_from):
    n_samples = clocks.shape[0]
    out = np.empty((n_samples - record_from, pol.shape[0]))
    iters = np.empty(n_samples - record_from, dtype=np.int64)
    converged = np.empty(n_samples - record_from, dtype=np.bool_)
    for s in range(n_samples):
        for k in range(input_idx.shape[0]):
            pol[input_idx[k]] = input_pols[s, k]
        it, ok = _relax(indptr, indices, weights, pol, free, zone, clocks[s], tol, max_iter)
        if s >= record_from:
            out[s - record_from] = pol
            iters[s - record_from] = it
            converged[s - record_from] = ok
    return out, iters, converged


def _initial_state(layout: QcaLayout) -> np.ndarray:
    return np.array([c.polarization if c.role == "fixed" else 0.0 for c in layout.cells], dtype=np.float64)


def _free_indices(layout: QcaLayout) -> np.ndarray:
    return np.array([i for i, c in enumerate(layout.cells) if c.is_free], dtype=np.int64)


def relax_sample(graph: NeighborGraph, layout: QcaLayout, polarizations, clocks,
                 params: SimParams = SimParams()) -> tuple[np.ndarray, int, bool]:
    """One sample's fixed-point sweep; returns (polarizations, iterations, converged).

    Fixed and input cells must already hold their values in ``polarizations``.
    """
    pol = np.array(polarizations, dtype=np.float64)
    zone = np.array([c.zone for c in layout.cells], dtype=np.int64)
    it, ok = _relax(graph.indptr, graph.indices, graph.weights, pol, _free_indices(layout), zone,
                    np.asarray(clocks, dtype=np.float64), params.convergence_tolerance,
                    params.max_iterations_per_sample)
    return pol, int(it), bool(ok)


# -- pipeline depth and read-out ---------------------------------------------

def zone_depths(layout: QcaLayout, graph: NeighborGraph | None = None) -> dict[int, int]:
    """Quarter clock periods from the inputs to each output along the layout.

    Walks cell adjacency (nearest and diagonal neighbours); moving from zone
    a into zone b costs ``(b - a) % 4``. An output's depth is the largest,
    over inputs, of the cheapest path from that input.
    """
    cells = layout.cells
    pitch = layout.geometry.pitch
    reach = pitch * math.sqrt(2) + 1e-6
    adj: list[list[int]] = [[] for _ in cells]
    for i, a in enumerate(cells):
        for j in range(i + 1, len(cells)):
            if math.dist(a.center, cells[j].center) <= reach:
                adj[i].append(j)
                adj[j].append(i)
    depths: dict[int, int] = {o: 0 for o in layout.outputs}
    for src in layout.inputs:
        dist = {src: 0}
        heap = [(0, src)]
        while heap:
            d, i = heapq.heappop(heap)
            if d > dist[i]:
                continue
            for j in adj[i]:
                if cells[j].role in ("fixed", "input"):
                    continue
                nd = d + (cells[j].zone - cells[i].zone) % 4
                if nd < dist.get(j, 1 << 30):
                    dist[j] = nd
                    heapq.heappush(heap, (nd, j))
        for o in depths:
            if o in dist:
                depths[o] = max(depths[o], dist[o] + cells[src].zone)
    return depths


def readout_offset(depth: int, period: float) -> int:
    """Samples from the start of an input window to the output's hold centre."""
    return int(math.floor(period * (2 + depth) / 4))


# -- full run ----------------------------------------------------------------

@dataclass(frozen=True)
class Trace:
    clocks: np.ndarray  # (samples, 4)
    polarizations: np.ndarray  # (samples, cells)
    input_labels: tuple[str, ...]
    output_labels: tuple[str, ...]
    input_cells: tuple[int, ...]
    output_cells: tuple[int, ...]
    iterations: np.ndarray
    converged: np.ndarray
    params: SimParams = field(repr=False)

    @property
    def samples(self) -> int:
        return self.clocks.shape[0]

    @property
    def nonconverged_fraction(self) -> float:
        return float(1.0 - self.converged.mean())

    def column(self, label: str) -> np.ndarray:
        if label in self.input_labels:
            return self.polarizations[:, self.input_cells[self.input_labels.index(label)]]
        return self.polarizations[:, self.output_cells[self.output_labels.index(label)]]


def run(layout: QcaLayout, params: SimParams = SimParams()) -> Trace:
    """Simulate every input combination once, in binary counting order.

    Before sample 0 the engine pre-rolls enough windows of the final input
    combinations to fill the clock pipeline, so read-outs that spill past the
    last sample wrap around onto a steady-state trace.
    """
    problems = validate(layout, params.radius_of_effect)
    if problems:
        raise SimulationError("invalid layout: " + "; ".join(problems))
    inputs, outputs = layout.inputs, layout.outputs
    if not inputs or not outputs:
        raise SimulationError("layout needs at least one input and one output cell")
    n = len(inputs)
    params.check_inputs(n)
    graph = build_neighbor_graph(layout, params)
    period = params.samples / 2 ** n
    depth = max(zone_depths(layout, graph).values())
    windows = math.ceil((readout_offset(depth, period) + 1) / period)
    preroll = min(max(windows, 1), 2 ** n) * int(round(period))
    samples = np.arange(-preroll, params.samples)
    clocks = clock_table(samples.astype(np.float64), params, n)
    combos = ((samples % params.samples) * 2 ** n) // params.samples
    bits = (combos[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    input_pols = np.where(bits == 1, 1.0, -1.0)
    zone = np.array([c.zone for c in layout.cells], dtype=np.int64)
    pol, iters, conv = _run(graph.indptr, graph.indices, graph.weights, _initial_state(layout),
                            _free_indices(layout), zone, np.array(inputs, dtype=np.int64), input_pols,
                            clocks, params.convergence_tolerance, params.max_iterations_per_sample,
                            preroll)
    return Trace(clocks[preroll:], pol, tuple(layout.labels("input")), tuple(layout.labels("output")),
                 tuple(inputs), tuple(outputs), iters, conv, params)


@dataclass(frozen=True)
class TruthRow:
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    polarizations: tuple[float, ...]
    weak: tuple[bool, ...]


def extract_truth_table(trace: Trace, layout: QcaLayout, weak_threshold: float = 0.5) -> list[TruthRow]:
    """Logic value of each output for each input combination.

    Each output is read at its hold centre: half a period into the input
    window plus a quarter period per clock zone crossed on the way from the
    inputs, wrapping past the last sample.
    """
    n = len(trace.input_labels)
    S = trace.samples
    period = S / 2 ** n
    depths = zone_depths(layout)
    rows = []
    for k in range(2 ** n):
        start = int(round(k * period))
        values, pols, weak = [], [], []
        for o in trace.output_cells:
            s = (start + readout_offset(depths[o], period)) % S
            p = float(trace.polarizations[s, o])
            pols.append(p)
            values.append(1 if p > 0 else 0)
            weak.append(abs(p) < weak_threshold)
        bits = tuple((k >> (n - 1 - i)) & 1 for i in range(n))
        rows.append(TruthRow(bits, tuple(values), tuple(pols), tuple(weak)))
    return rows


def write_trace_csv(trace: Trace, fh, trace_all: bool = False) -> None:
    labels = list(trace.input_labels) + list(trace.output_labels)
    cols = list(trace.input_cells) + list(trace.output_cells)
    if trace_all:
        extra = [i for i in range(trace.polarizations.shape[1])]
        labels += [f"cell_{i}" for i in extra]
        cols += extra
    fh.write(",".join(["sample", "clock0", "clock1", "clock2", "clock3"] + labels) + "\n")
    for s in range(trace.samples):
        vals = [f"{v:.5e}" for v in trace.clocks[s]] + [f"{trace.polarizations[s, c]:.5e}" for c in cols]
        fh.write(f"{s}," + ",".join(vals) + "\n")
