"""Seeded batch runner for simulation experiments and parameter sweeps."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import FeatureMatrix, LabeledGraph, ModelParams, SigmoidParams
from .dynamics import GenSeed, generate_features
from .metrics import clustering_coefficient, reachable_pairs
from .network import build_network, calibrate_theta, similarity_histogram

log = logging.getLogger(__name__)

__all__ = [
    "map_jobs",
    "CellSpec",
    "Realization",
    "simulate_realization",
    "run_cell",
    "ExperimentGrid",
    "run_sweep",
    "AGGREGATE_FIELDS",
]


def map_jobs(fn: Callable, items: Sequence, n_jobs: int = 1) -> list:
    """Apply ``fn`` to each item; results come back in input order."""
    if n_jobs is None or n_jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class CellSpec:
    """One parameter combination of a simulation experiment.

    Exactly one of ``theta`` and ``ell`` is set; with ``ell`` the threshold
    is recalibrated on every realization so the expected number of
    first-phase links equals ``ell``.
    """

    n: int
    alpha: float
    beta: float
    delta: float
    p: float
    k_steep: float
    theta: float | None = None
    ell: float | None = None

    def __post_init__(self):
        if (self.theta is None) == (self.ell is None):
            raise ValueError("exactly one of theta and ell must be given")
        ModelParams(self.alpha, self.beta, self.delta, self.p)
        if not self.k_steep > 0:
            raise ValueError(f"K must be positive, got {self.k_steep}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.alpha, self.beta, self.delta, self.p)


@dataclass
class Realization:
    index: int
    features: FeatureMatrix
    graph: LabeledGraph
    sigmoid: SigmoidParams
    stats: dict = field(default_factory=dict)


def simulate_realization(cell: CellSpec, seed: int, index: int, h: int = 20, with_metrics: bool = True) -> Realization:
    gs = GenSeed(seed, index)
    F = generate_features(cell.n, cell.params, gs)
    S = F.similarity_matrix()
    if cell.ell is not None:
        sig = calibrate_theta(F, cell.k_steep, cell.ell, hist=similarity_histogram(F, S))
    else:
        sig = SigmoidParams(cell.k_steep, cell.theta)
    g = build_network(F, sig, cell.p, gs, similarity=S)
    stats = {
        "realization": index,
        "theta": sig.theta,
        "n_features": F.n_features,
        "links": g.n_edges,
        "first_phase_links": int(np.count_nonzero(g.phase == 1)),
    }
    if with_metrics:
        rp, h_star = reachable_pairs(g, h)
        stats.update({"clustering": clustering_coefficient(g), "rp": rp, "h_star": h_star})
    return Realization(index, F, g, sig, stats)


def _cell_job(args):
    cell, seed, index, h = args
    r = simulate_realization(cell, seed, index, h)
    return r.stats


AGGREGATE_FIELDS = ["links", "first_phase_links", "clustering", "rp", "h_star", "n_features", "theta"]


def run_cell(cell: CellSpec, realizations: int, seed: int, h: int = 20, n_jobs: int = 1) -> list[dict]:
    """Per-realization statistics for one cell, ordered by realization index."""
    jobs = [(cell, seed, r, h) for r in range(realizations)]
    return map_jobs(_cell_job, jobs, n_jobs)


def aggregate(rows: Iterable[dict]) -> dict:
    rows = list(rows)
    out = {"realizations": len(rows)}
    for key in AGGREGATE_FIELDS:
        vals = np.array([r[key] for r in rows if key in r], dtype=float)
        if len(vals):
            out[f"mean_{key}"] = float(vals.mean())
            out[f"sd_{key}"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
    if rows and "h_star" in rows[0]:
        out["max_h_star"] = int(max(r["h_star"] for r in rows))
    return out


@dataclass
class ExperimentGrid:
    """Cells of a parameter sweep, read from a CSV with one row per cell.

    Columns: ``n, alpha, beta, delta, p, K`` and either ``theta`` or ``ell``.
    """

    cells: list[CellSpec]

    @classmethod
    def read_csv(cls, path) -> "ExperimentGrid":
        cells = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(line for line in fh if line.strip() and not line.lstrip().startswith("#"))
            for lineno, row in enumerate(reader, start=2):
                try:
                    cells.append(
                        CellSpec(
                            n=int(row.get("n") or 1000),
                            alpha=float(row["alpha"]),
                            beta=float(row["beta"]),
                            delta=float(row["delta"]),
                            p=float(row["p"]),
                            k_steep=float(row["K"]),
                            theta=_opt_float(row.get("theta")),
                            ell=_opt_float(row.get("ell")),
                        )
                    )
                except (KeyError, ValueError) as exc:
                    raise ValueError(f"{path}:{lineno}: invalid grid row: {exc}") from exc
        if not cells:
            raise ValueError(f"{path}: grid has no cells")
        return cls(cells)

    @classmethod
    def default(cls, deltas=(0.1, 0.5), ks=(1.0, 4.0, 10.0), ps=(0.0, 0.1, 0.5), n=1000, ell=4000.0):
        return cls([
            CellSpec(n, 10.0, 0.5, d, p, k, ell=ell) for k in ks for p in ps for d in deltas
        ])


def _opt_float(v):
    return None if v is None or str(v).strip() == "" else float(v)


def run_sweep(grid: ExperimentGrid, realizations: int, seed: int, h: int = 20, n_jobs: int = 1) -> list[dict]:
    """One aggregate row per cell; every cell reuses the same realization seeds."""
    out = []
    for ci, cell in enumerate(grid.cells):
        log.info("cell %d/%d: %s", ci + 1, len(grid.cells), cell)
        agg = aggregate(run_cell(cell, realizations, seed, h, n_jobs))
        out.append({**{k: v for k, v in asdict(cell).items()}, **agg})
    return out


def write_rows(path: Path, rows: list[dict]):
    if not rows:
        return
    fields = list(rows[0].keys())
    for r in rows[1:]:
        fields += [k for k in r if k not in fields]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow(r)
