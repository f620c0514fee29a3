"""Tuning of the constraint strengths so the sweep ends in a target distribution."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.optimize import minimize

from .quantum import SweepProblem, final_amplitudes

Backend = Literal["exact", "effective"]


@dataclass(frozen=True)
class TargetDistribution:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("targets must be a non-empty vector")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("target probabilities must lie in [0, 1]")
        if p.sum() > 1 + 1e-9:
            raise ValueError("target probabilities sum to more than 1")
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def uniform(cls, m: int) -> "TargetDistribution":
        return cls(np.full(m, 1.0 / m))

    def __len__(self) -> int:
        return len(self.probabilities)


def cost(amplitudes, targets: TargetDistribution | Sequence[float]) -> float:
    """``sum_n (|a_n|^2 - p_n)^2``."""
    p = targets.probabilities if isinstance(targets, TargetDistribution) else np.asarray(targets, dtype=float)
    a = np.asarray(amplitudes)
    if a.shape != p.shape:
        raise ValueError(f"{a.size} amplitudes for {p.size} targets")
    return float(np.sum((np.abs(a) ** 2 - p) ** 2))


@dataclass
class OptimizerOptions:
    tol: float = 1e-4
    n_starts: int = 5
    max_evaluations: int = 400  # per start
    c_min: float = 0.1  # in units of max|J|
    c_max: float = 20.0
    spread: float = 0.3  # log-normal width of the perturbed starts
    initial: Sequence[float] | None = None  # replaces the first start
    seed: int = 0
    order: int = 4  # effective backend
    t0_ratio: float = 1.0


@dataclass
class OptimizationResult:
    best_c: np.ndarray
    best_cost: float
    evaluations: int
    history: list[tuple[np.ndarray, float]]  # best-so-far after every evaluation
    backend: str
    converged: bool
    best_amplitudes: np.ndarray | None = None
    start_costs: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "best_c": [float(c) for c in self.best_c],
            "best_cost": float(self.best_cost),
            "evaluations": self.evaluations,
            "converged": self.converged,
            "best_populations": None if self.best_amplitudes is None
            else [float(x) for x in np.abs(self.best_amplitudes) ** 2],
            "history": [{"c": [float(x) for x in c], "cost": float(v)} for c, v in self.history],
        }


class _Done(Exception):
    pass


def amplitude_function(problem: SweepProblem, backend: Backend = "exact", order: int = 4,
                       t0_ratio: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """Map a strength vector to the final pattern amplitudes with the chosen backend."""
    if backend == "exact":
        return lambda c: final_amplitudes(problem.with_strengths(c))
    if backend == "effective":
        from .sw import effective_evolve, effective_terms

        def run(c):
            p = problem.with_strengths(c)
            return effective_evolve(effective_terms(p, order=order), p, "hybrid", t0_ratio)

        return run
    raise ValueError(f"unknown backend {backend!r}")


def optimize_constraints(problem: SweepProblem, targets: TargetDistribution | Sequence[float],
                         backend: Backend = "exact", opts: OptimizerOptions | None = None) -> OptimizationResult:
    """Multi-start Nelder-Mead over ``log C`` inside ``[c_min, c_max] * max|J|``."""
    opts = opts or OptimizerOptions()
    if not isinstance(targets, TargetDistribution):
        targets = TargetDistribution(np.asarray(targets, dtype=float))
    if len(targets) != len(problem.patterns):
        raise ValueError(f"{len(targets)} targets for {len(problem.patterns)} patterns")
    n_c = len(problem.plaquettes)
    j_max = float(np.max(np.abs(problem.layout.fields)))
    lo, hi = np.log(opts.c_min * j_max), np.log(opts.c_max * j_max)
    amplitudes = amplitude_function(problem, backend, opts.order, opts.t0_ratio)

    rng = np.random.default_rng(opts.seed)
    x_centre = np.full(n_c, np.log(2.0 * j_max))
    starts = [x_centre] + [x_centre + rng.normal(0.0, opts.spread, n_c) for _ in range(opts.n_starts - 1)]
    if opts.initial is not None:
        starts[0] = np.log(np.asarray(opts.initial, dtype=float))
    starts = [np.clip(x, lo, hi) for x in starts]

    history: list[tuple[np.ndarray, float]] = []
    best = {"cost": np.inf, "c": np.exp(starts[0]), "a": None}

    def objective(x):
        c = np.exp(np.clip(x, lo, hi))
        a = amplitudes(c)
        value = cost(a, targets)
        if value < best["cost"]:
            best.update(cost=value, c=c.copy(), a=a)
        history.append((best["c"], best["cost"]))
        if best["cost"] < opts.tol:
            raise _Done
        return value

    start_costs = []
    for x0 in starts:
        try:
            minimize(objective, x0, method="Nelder-Mead", bounds=[(lo, hi)] * n_c,
                     options={"maxfev": opts.max_evaluations, "xatol": 1e-4, "fatol": 1e-9})
        except _Done:
            start_costs.append(best["cost"])
            break
        start_costs.append(best["cost"])
    return OptimizationResult(best["c"], best["cost"], len(history), history, backend,
                              best["cost"] < opts.tol, best["a"], start_costs)
