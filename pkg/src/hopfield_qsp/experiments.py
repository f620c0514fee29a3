"""Batch harnesses: capacity scans and end-to-end runs of the two worked examples."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .designer import DesignParams, SpectralMetrics, design_ground_states, spectral_metrics
from .hopfield import PatternSet
from .lhz import LhzLayout, Plaquette, build_layout, fixture_plaquettes, map_config, validate_constraints
from .optimizer import OptimizationResult, OptimizerOptions, TargetDistribution, optimize_constraints
from .quantum import SweepProblem, SweepSchedule, evolve_sweep
from .spinmodel import SpinGlassHamiltonian, restricted_spectrum

# ---------------------------------------------------------------------------
# capacity


@dataclass
class CapacityPoint:
    n: int
    capacity: float  # mean over subgroups of the per-subgroup maximum M
    subgroup_max: list[int]
    success_rates: dict[int, float]  # M -> fraction of all realizations that converged


@dataclass
class CapacityCurve:
    orders: tuple[int, ...]
    points: list[CapacityPoint]
    sp: float
    n_realizations: int
    subgroup_size: int
    params: DesignParams
    seed: int

    @property
    def ns(self) -> np.ndarray:
        return np.array([p.n for p in self.points])

    @property
    def capacities(self) -> np.ndarray:
        return np.array([p.capacity for p in self.points])

    def linear_fit(self) -> tuple[float, float]:
        """Slope and intercept of capacity against ``N``."""
        slope, intercept = np.polyfit(self.ns, self.capacities, 1)
        return float(slope), float(intercept)


def _realization_seed(seed: int, n: int, m: int, index: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(n, m, index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _design_job(job) -> bool:
    n, m, orders, params, seed = job
    rng = np.random.default_rng(seed)
    patterns = PatternSet.random(n, m, rng)
    return design_ground_states(patterns, orders, replace(params, seed=seed)).converged


def capacity_experiment(ns: Sequence[int], orders: Sequence[int], params: DesignParams,
                        n_realizations: int = 100, subgroup_size: int = 20, sp: float = 0.99,
                        seed: int = 0, workers: int = 1) -> CapacityCurve:
    """Largest pattern count the design protocol stores reliably, for each ``N``.

    For each ``M = 1, 2, ...`` the realizations are split into subgroups; a
    subgroup keeps ``M`` as its maximum while its success fraction is at least
    ``sp``.  The scan stops once every subgroup has failed.
    """
    if n_realizations % subgroup_size:
        raise ValueError("subgroup size must divide the number of realizations")
    if not 0 < sp <= 1:
        raise ValueError("sp must lie in (0, 1]")
    orders = tuple(sorted(set(orders)))
    n_groups = n_realizations // subgroup_size
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    points = []
    try:
        for n in ns:
            best = np.zeros(n_groups, dtype=int)
            alive = np.ones(n_groups, dtype=bool)
            rates = {}
            m = 1
            while alive.any() and m <= 2**n:
                jobs = [(n, m, orders, params, _realization_seed(seed, n, m, i)) for i in range(n_realizations)]
                ok = np.array(list(pool.map(_design_job, jobs)) if pool else [_design_job(j) for j in jobs])
                rates[m] = float(ok.mean())
                frac = ok.reshape(n_groups, subgroup_size).mean(axis=1)
                passed = alive & (frac >= sp)
                best[passed] = m
                alive = passed
                m += 1
            points.append(CapacityPoint(n, float(best.mean()), best.tolist(), rates))
    finally:
        if pool:
            pool.shutdown()
    return CapacityCurve(orders, points, sp, n_realizations, subgroup_size, params, seed)


def capacity_csv_rows(curve: CapacityCurve) -> list[list]:
    rows = [["N", "capacity", "subgroup_max"]]
    for p in curve.points:
        rows.append([p.n, repr(p.capacity), " ".join(map(str, p.subgroup_max))])
    return rows


# ---------------------------------------------------------------------------
# worked examples


class FixtureError(RuntimeError):
    pass


@dataclass
class ExampleFixture:
    name: str
    hamiltonian: SpinGlassHamiltonian
    patterns: list[str]
    physical_patterns: list[str]
    plaquette_fixture: str
    reported_delta: float
    reference_strengths: list[float]
    reference_effective_strengths: list[float]
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def layout(self) -> LhzLayout:
        return build_layout(self.hamiltonian)

    def plaquettes(self, strengths: Sequence[float] | None = None) -> list[Plaquette]:
        return fixture_plaquettes(self.layout, self.plaquette_fixture,
                                  strengths if strengths is not None else self.reference_strengths)

    def problem(self, total_time: float = 100.0, n_steps: int = 4000, n_samples: int = 200,
                strengths: Sequence[float] | None = None) -> SweepProblem:
        return SweepProblem.from_logical(self.layout, self.plaquettes(strengths), self.patterns,
                                         SweepSchedule(total_time, n_steps, n_samples))


def load_example(which: int | str) -> ExampleFixture:
    """Coupling fixture of worked example 1 (2D) or 2 (3D)."""
    name = f"example{which}" if str(which).isdigit() else str(which)
    try:
        text = resources.files("hopfield_qsp.data").joinpath(f"{name}.json").read_text()
    except FileNotFoundError as exc:
        raise FixtureError(f"no fixture named {name!r}") from exc
    data = json.loads(text)
    return ExampleFixture(
        name=name,
        hamiltonian=SpinGlassHamiltonian.from_dict(data),
        patterns=list(data["patterns"]),
        physical_patterns=list(data["physical_patterns"]),
        plaquette_fixture=data["plaquette_fixture"],
        reported_delta=float(data["reported_delta"]),
        reference_strengths=list(data["reference_strengths"]),
        reference_effective_strengths=list(data["reference_effective_strengths"]),
        raw=data,
    )


def example_metrics(fx: ExampleFixture) -> SpectralMetrics:
    """Logical spectrum metrics over the full configuration space."""
    h = fx.hamiltonian
    return spectral_metrics(restricted_spectrum(h, fx.patterns, h.n))


def verify_fixture(fx: ExampleFixture) -> None:
    layout = fx.layout
    images = [str(map_config(layout, x)) for x in fx.patterns]
    if images != fx.physical_patterns:
        raise FixtureError(f"parity images {images} differ from the recorded {fx.physical_patterns}")
    report = validate_constraints(layout, fx.plaquettes())
    if not report.ok:
        raise FixtureError("; ".join(report.failures))


@dataclass
class SweepTable:
    header: list[str]
    rows: np.ndarray

    @property
    def columns(self) -> dict[str, np.ndarray]:
        return {h: self.rows[:, i] for i, h in enumerate(self.header)}

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.header.index(name)]


def sweep_table(p: SweepProblem) -> SweepTable:
    """Populations, low spectrum and adiabaticity parameters at the sample times.

    Columns: ``t, p_1..p_M, p_bulk, E_1..E_{M+3}, A_nm (n < m <= M), B_1..B_M``.
    The adiabaticity columns are NaN at the two endpoints.
    """
    M = len(p.patterns)
    n_levels = min(M + 3, p.dim)
    traj = evolve_sweep(p, n_levels=n_levels, adiabaticity=True)
    ad = traj.adiabaticity
    pairs = [(n, m) for n in range(M) for m in range(n + 1, M)]
    header = (["t"] + [f"p_{n + 1}" for n in range(M)] + ["p_bulk"]
              + [f"E_{k + 1}" for k in range(n_levels)]
              + [f"A_{n + 1}{m + 1}" if M < 10 else f"A_{n + 1}_{m + 1}" for n, m in pairs] + [f"B_{n + 1}" for n in range(M)])
    a_cols = np.stack([ad.A[:, n, m] for n, m in pairs], axis=1) if pairs else np.zeros((len(ad.sample_times), 0))
    rows = np.column_stack([traj.sample_times, traj.overlaps, traj.p_bulk, traj.energies, a_cols, ad.B])
    return SweepTable(header, rows)


@dataclass
class ExampleRun:
    total_time: float
    optimization: OptimizationResult
    populations: np.ndarray


@dataclass
class ExampleReport:
    fixture: ExampleFixture
    metrics: SpectralMetrics
    runs: list[ExampleRun]
    best: ExampleRun
    table: SweepTable | None

    def summary(self) -> dict:
        return {
            "example": self.fixture.name,
            "delta_p": self.metrics.delta_p,
            "delta_b": self.metrics.delta_b,
            "delta": self.metrics.delta,
            "physical_patterns": self.fixture.physical_patterns,
            "runs": [
                {"T": r.total_time, "populations": [float(x) for x in r.populations],
                 **r.optimization.to_dict()}
                for r in self.runs
            ],
            "best_T": self.best.total_time,
            "reference_strengths": self.fixture.reference_strengths,
        }


def reproduce_example(which: int, t_grid: Sequence[float] = (50.0, 100.0, 200.0), seed: int = 0,
                      opts: OptimizerOptions | None = None, n_steps: int = 4000, n_samples: int = 200,
                      trace: bool = True, out_dir: str | Path | None = None) -> ExampleReport:
    """Verify the fixture, optimize the constraints per sweep time and trace the best run."""
    fx = load_example(which)
    verify_fixture(fx)
    metrics = example_metrics(fx)
    opts = replace(opts or OptimizerOptions(), seed=seed)
    targets = TargetDistribution.uniform(len(fx.patterns))
    runs = []
    for T in t_grid:
        p = fx.problem(T, n_steps, n_samples)
        res = optimize_constraints(p, targets, "exact", opts)
        runs.append(ExampleRun(float(T), res, np.abs(res.best_amplitudes) ** 2))
    best = min(runs, key=lambda r: r.optimization.best_cost)
    table = None
    if trace:
        table = sweep_table(fx.problem(best.total_time, n_steps, n_samples, best.optimization.best_c))
    report = ExampleReport(fx, metrics, runs, best, table)
    if out_dir is not None:
        write_example_outputs(report, Path(out_dir), seed)
    return report


def write_example_outputs(report: ExampleReport, out_dir: Path, seed: int) -> None:
    from .files import metadata, write_csv, write_json

    out_dir.mkdir(parents=True, exist_ok=True)
    fx = report.fixture
    meta = metadata(seed, {"example": fx.name, "T_grid": [r.total_time for r in report.runs]})
    write_json(out_dir / "summary.json", {"metadata": meta, **report.summary()})
    h = fx.hamiltonian
    values = np.arange(1 << h.n)
    energies = h.energies(values)
    spec_rows = [["config", "energy", "is_pattern"]]
    pats = set(fx.patterns)
    for v, e in zip(values, energies):
        s = format(int(v), f"0{h.n}b")
        spec_rows.append([s, repr(float(e)), int(s in pats)])
    write_csv(out_dir / "logical_spectrum.csv", spec_rows, meta)
    if report.table is not None:
        write_csv(out_dir / "sweep_trace.csv", [report.table.header] + report.table.rows.tolist(), meta)
