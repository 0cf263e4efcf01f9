"""Monte Carlo exploration of random signed clovers.

Every run draws a clover from its own stream ``SeedSequence(seed, spawn_key=(run,))``,
so results do not depend on how runs are distributed over workers. The same
stream index is used in every (p, q) cell, which makes cells directly
comparable (common random numbers).

Per-basin indicators are averaged within each run first and then across runs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .clover import CloverNetwork, assign_signs, generate_clover, signed_majority_network
from .errors import BoundViolation
from .induced import conjugacy
from .landscape import check_bounds

INDICATORS = ("N_A", "P", "size_ratio", "delta_tau", "delta_tau_max", "ell")
PER_BASIN = ("size_ratio", "delta_tau", "delta_tau_max")


@dataclass(frozen=True)
class EnsembleParams:
    n: int
    p: float
    q: float
    runs: int
    master_seed: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if not 0 <= self.q <= 1:
            raise ValueError("q must lie in [0, 1]")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer")


@dataclass(frozen=True)
class RunRecord:
    run_index: int
    ell: int
    depth: int
    n_attractors: int
    mean_period: float
    size_ratios: tuple
    delta_tau: tuple
    delta_tau_max: tuple
    bounds_ok: bool

    def indicator(self, name: str) -> float:
        """Within-run value of one of :data:`INDICATORS`."""
        if name == "N_A":
            return float(self.n_attractors)
        if name == "P":
            return self.mean_period
        if name == "ell":
            return float(self.ell)
        values = {"size_ratio": self.size_ratios, "delta_tau": self.delta_tau,
                  "delta_tau_max": self.delta_tau_max}[name]
        return math.fsum(values) / len(values)

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


def run_stream(master_seed: int, run_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(run_index,)))


def run_clover(params: EnsembleParams, run_index: int) -> CloverNetwork:
    """The signed clover drawn by run ``run_index`` of a cell."""
    rng = run_stream(params.master_seed, run_index)
    return assign_signs(generate_clover(params.n, params.p, rng), params.q, rng)


def run_one(params: EnsembleParams, run_index: int) -> RunRecord:
    """One clover, both landscapes, the indicators, and the bound checks."""
    net = signed_majority_network(run_clover(params, run_index))
    conj = conjugacy(net, [1])
    land_f, land_g = conj.network_landscape(), conj.induced_landscape()
    report = check_bounds(land_f, land_g, conj.h, 1, conj.depth, conj.ell)
    if not report.all_satisfied:
        bad = ", ".join(c.clause for c in report.failures())
        raise BoundViolation(f"run {run_index} (p={params.p}, q={params.q}): failed {bad}")

    ratios, dtau, dtau_max = [], [], []
    for basin in land_f.basins:
        # basins are paired through h on a cycle state; comparisons are
        # against the whole induced basin
        target = land_g.basins[int(land_g.component[conj.h[basin.cycle_states[0]]])]
        ratios.append(target.basin_size / basin.basin_size)
        dtau.append(float(basin.mean_transient - target.mean_transient))
        dtau_max.append(float(basin.max_transient - target.max_transient))
    if not all(0 <= v <= conj.depth for v in dtau_max):
        raise BoundViolation(f"run {run_index}: maximal transient reduction outside [0, {conj.depth}]")
    return RunRecord(
        run_index=run_index,
        ell=conj.ell,
        depth=conj.depth,
        n_attractors=land_f.n_attractors,
        mean_period=float(land_f.mean_period()),
        size_ratios=tuple(ratios),
        delta_tau=tuple(dtau),
        delta_tau_max=tuple(dtau_max),
        bounds_ok=True,
    )


def _run_task(args):
    return run_one(*args)


def run_records(params: EnsembleParams, workers: int = 1) -> list:
    """All runs of one cell, ordered by run index."""
    tasks = [(params, i) for i in range(params.runs)]
    if workers <= 1:
        return [run_one(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


@dataclass(frozen=True)
class CellStats:
    n: int
    p: float
    q: float
    runs: int
    means: dict
    stderrs: dict
    pooled: dict = field(default_factory=dict)


def _mean_se(values: Sequence[float]):
    values = list(values)
    mean = math.fsum(values) / len(values)
    if len(values) < 2:
        return mean, float("nan")
    var = math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return mean, math.sqrt(var / len(values))


def aggregate(params: EnsembleParams, records: Iterable[RunRecord]) -> CellStats:
    records = sorted(records, key=lambda r: r.run_index)
    if len(records) != params.runs:
        raise ValueError(f"expected {params.runs} run records, got {len(records)}")
    means, ses = {}, {}
    for name in INDICATORS:
        means[name], ses[name] = _mean_se([r.indicator(name) for r in records])
    pooled = {}
    for name, attr in zip(PER_BASIN, ("size_ratios", "delta_tau", "delta_tau_max")):
        values = [v for r in records for v in getattr(r, attr)]
        pooled[name] = math.fsum(values) / len(values)
    return CellStats(params.n, params.p, params.q, params.runs, means, ses, pooled)


def run_ensemble(params: EnsembleParams, workers: int = 1, runlog=None) -> CellStats:
    """Run one (p, q) cell. ``runlog`` is an optional text stream for JSON lines."""
    records = run_records(params, workers)
    if runlog is not None:
        for r in records:
            runlog.write(json.dumps({"p": params.p, "q": params.q, **json.loads(r.to_json())},
                                    separators=(",", ":")) + "\n")
    return aggregate(params, records)


def run_grid(n: int, ps: Sequence[float], qs: Sequence[float], runs: int, seed: int,
             workers: int = 1, runlog=None) -> list:
    """Cells in (p, q) order, p outermost."""
    return [run_ensemble(EnsembleParams(n, p, q, runs, seed), workers, runlog) for p in ps for q in qs]


# ---------------------------------------------------------------------------
# CSV


def _header(verbose: bool) -> list:
    cols = ["n", "p", "q", "runs"]
    for name in INDICATORS:
        cols += [f"mean_{name}", f"se_{name}"]
    if verbose:
        cols += [f"pooled_{name}" for name in PER_BASIN]
    return cols


def _num(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.10g}"


def stats_to_csv(cells: Sequence[CellStats], verbose: bool = False) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_header(verbose))
    for c in cells:
        row = [c.n, _num(c.p), _num(c.q), c.runs]
        for name in INDICATORS:
            row += [_num(c.means[name]), _num(c.stderrs[name])]
        if verbose:
            row += [_num(c.pooled[name]) for name in PER_BASIN]
        writer.writerow(row)
    return out.getvalue()


def parse_stats_csv(text: str) -> list:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames not in (_header(False), _header(True)):
        raise ValueError("unrecognised ensemble CSV header")
    cells = []
    for row in reader:
        cells.append(CellStats(
            n=int(row["n"]), p=float(row["p"]), q=float(row["q"]), runs=int(row["runs"]),
            means={k: float(row[f"mean_{k}"]) for k in INDICATORS},
            stderrs={k: float(row[f"se_{k}"]) for k in INDICATORS},
            pooled={k: float(row[f"pooled_{k}"]) for k in PER_BASIN if f"pooled_{k}" in row},
        ))
    return cells
