"""Command-line entry points (``hopfield-qsp <command>``)."""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import files
from .designer import DesignParams, design_ground_states
from .experiments import capacity_csv_rows, capacity_experiment, reproduce_example, sweep_table
from .lhz import FIXTURE_LABELS, build_layout, find_constraints, fixture_plaquettes, map_config, validate_constraints
from .optimizer import OptimizerOptions, TargetDistribution, optimize_constraints
from .quantum import SweepProblem, SweepSchedule
from .sw import effective_evolve, effective_terms


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _load_problem(args) -> SweepProblem:
    layout, plaquettes, physical = files.read_layout(args.layout)
    if not physical:
        raise SystemExit(f"{args.layout}: layout file lists no patterns")
    if getattr(args, "constraints", None):
        strengths = files.read_strengths(args.constraints)
        if len(strengths) != len(plaquettes):
            raise SystemExit(f"{len(strengths)} strengths for {len(plaquettes)} plaquettes")
        plaquettes = [p.with_strength(c) for p, c in zip(plaquettes, strengths)]
    schedule = SweepSchedule(args.T, args.steps, getattr(args, "samples", 200))
    return SweepProblem(layout, tuple(plaquettes), tuple(physical), schedule)


def cmd_design(args) -> None:
    patterns = files.read_patterns(args.patterns)
    params = DesignParams(
        delta_star=args.delta_star, radius=args.radius, r=args.r, p_relearn=args.p_relearn,
        phi_max=args.phi_max, eta_max=args.eta_max, temp_mc=args.temp, max_steps=args.max_steps,
        seed=args.seed,
    )
    report = design_ground_states(patterns, _ints(args.orders), params)
    meta = files.metadata(args.seed, {"orders": _ints(args.orders), **asdict(params)})
    fm = report.final_metrics
    files.write_hamiltonian(
        args.out, report.final_hamiltonian, [str(p) for p in patterns], meta,
        {"design": {"converged": report.converged, "steps": report.steps,
                    "delta_p": fm.delta_p, "delta_b": fm.delta_b, "delta": fm.delta}},
    )
    if args.trace:
        files.write_csv(args.trace, [["step", "kind", "accepted", "delta_p", "delta_b", "delta"]]
                        + [[s, k, a, dp, db, float("nan") if d is None else d]
                           for s, k, a, dp, db, d in report.trace.rows()], meta)
    status = "converged" if report.converged else "did not converge"
    print(f"{status} after {report.steps} steps; delta = {fm.delta}")


def cmd_map_lhz(args) -> None:
    h, patterns = files.read_hamiltonian(args.hamiltonian)
    layout = build_layout(h)
    c0 = args.strength if args.strength is not None else 2.0 * float(np.max(np.abs(layout.fields)))
    if args.fixture:
        plaquettes = fixture_plaquettes(layout, args.fixture, [c0] * len(FIXTURE_LABELS[args.fixture]))
        report = validate_constraints(layout, plaquettes)
        if not report.ok:
            raise SystemExit("fixture does not fit this layout: " + "; ".join(report.failures))
    else:
        plaquettes = [p.with_strength(c0) for p in find_constraints(layout)]
    physical = [str(map_config(layout, x)) for x in patterns] if patterns else None
    meta = files.metadata(None, {"hamiltonian": str(args.hamiltonian), "fixture": args.fixture, "strength": c0})
    files.write_layout(args.out, layout, plaquettes, patterns, physical, meta)
    print(f"{layout.n_physical} physical qubits, {len(plaquettes)} plaquettes")


def cmd_sweep(args) -> None:
    p = _load_problem(args)
    table = sweep_table(p)
    meta = files.metadata(None, {"T": args.T, "steps": args.steps, "samples": args.samples,
                                 "strengths": p.strengths.tolist()})
    files.write_csv(args.out_traces, [table.header] + table.rows.tolist(), meta)
    final = table.rows[-1, 1:1 + len(p.patterns)]
    print("final populations: " + " ".join(f"{x:.4f}" for x in final))


def cmd_swe(args) -> None:
    p = _load_problem(args)
    model = effective_terms(p, order=args.order)
    a = effective_evolve(model, p, args.mode, args.t0_ratio)
    data = model.to_dict()
    data["amplitudes"] = {"real": a.real.tolist(), "imag": a.imag.tolist()}
    data["populations"] = (np.abs(a) ** 2).tolist()
    data["metadata"] = files.metadata(None, {"order": args.order, "t0_ratio": args.t0_ratio,
                                             "mode": args.mode, "T": args.T, "steps": args.steps,
                                             "strengths": p.strengths.tolist()})
    files.write_json(args.out, data)
    print("populations: " + " ".join(f"{x:.4f}" for x in data["populations"]))


def cmd_optimize(args) -> None:
    p = _load_problem(args)
    targets = TargetDistribution(np.asarray(_floats(args.targets)))
    opts = OptimizerOptions(tol=args.tol, n_starts=args.starts, max_evaluations=args.max_evals,
                            seed=args.seed, order=args.order,
                            initial=p.strengths if args.constraints else None)
    res = optimize_constraints(p, targets, args.backend, opts)
    out = res.to_dict()
    out["metadata"] = files.metadata(args.seed, {"targets": targets.probabilities.tolist(), "T": args.T,
                                                 "steps": args.steps, **asdict(opts)})
    files.write_json(args.out, out)
    print(f"cost {res.best_cost:.3e} after {res.evaluations} evaluations; C = "
          + " ".join(f"{c:.3f}" for c in res.best_c))


def cmd_capacity(args) -> None:
    params = DesignParams(delta_star=args.delta_star, radius=args.radius, r=args.r,
                          p_relearn=args.p_relearn, temp_mc=args.temp, max_steps=args.max_steps)
    ns = list(range(args.n_min, args.n_max + 1, args.n_step))
    curve = capacity_experiment(ns, _ints(args.orders), params, args.realizations, args.subgroup,
                                args.sp, args.seed, args.workers)
    meta = files.metadata(args.seed, {"orders": _ints(args.orders), "N": ns, "realizations": args.realizations,
                                      "subgroup": args.subgroup, "sp": args.sp, **asdict(params)})
    files.write_csv(args.out, capacity_csv_rows(curve), meta)
    for pt in curve.points:
        print(f"N={pt.n}: capacity {pt.capacity:.2f}")


def cmd_example(args) -> None:
    opts = OptimizerOptions(tol=args.tol, max_evaluations=args.max_evals)
    report = reproduce_example(args.which, _floats(args.T), args.seed, opts, args.steps, args.samples,
                               out_dir=Path(args.out_dir))
    for run in report.runs:
        print(f"T={run.total_time:g}: cost {run.optimization.best_cost:.3e}, populations "
              + " ".join(f"{x:.4f}" for x in run.populations))


def _sweep_args(sp, samples: bool = True) -> None:
    sp.add_argument("--layout", required=True)
    sp.add_argument("--constraints", help="JSON with constraint strengths (defaults to the layout's)")
    sp.add_argument("--T", type=float, default=100.0, help="total sweep time")
    sp.add_argument("--steps", type=int, default=4000)
    if samples:
        sp.add_argument("--samples", type=int, default=200)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hopfield-qsp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="design couplings with the given patterns as ground states")
    d.add_argument("--patterns", required=True)
    d.add_argument("--orders", default="1,2,3")
    d.add_argument("--delta-star", type=float, default=0.05)
    d.add_argument("--radius", type=int, default=2)
    d.add_argument("--r", type=int, default=1)
    d.add_argument("--p-relearn", type=float, default=2 / 3)
    d.add_argument("--phi-max", type=float, default=0.02)
    d.add_argument("--eta-max", type=float, default=0.02)
    d.add_argument("--temp", type=float, default=1.0, help="Monte Carlo temperature")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--max-steps", type=int, default=100_000)
    d.add_argument("--out", required=True)
    d.add_argument("--trace")
    d.set_defaults(func=cmd_design)

    m = sub.add_parser("map-lhz", help="parity-encode a Hamiltonian file")
    m.add_argument("--hamiltonian", required=True)
    m.add_argument("--out", required=True)
    m.add_argument("--fixture", choices=sorted(FIXTURE_LABELS))
    m.add_argument("--strength", type=float, help="initial constraint strength (default 2 max|J|)")
    m.set_defaults(func=cmd_map_lhz)

    s = sub.add_parser("sweep", help="simulate the sweep and write traces")
    _sweep_args(s)
    s.add_argument("--out-traces", required=True)
    s.set_defaults(func=cmd_sweep)

    w = sub.add_parser("swe", help="effective low-energy model of the sweep")
    _sweep_args(w, samples=False)
    w.add_argument("--order", type=int, default=4)
    w.add_argument("--t0-ratio", type=float, default=1.0)
    w.add_argument("--mode", choices=["hybrid", "effective_only"], default="hybrid")
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_swe)

    o = sub.add_parser("optimize", help="tune constraint strengths towards target populations")
    _sweep_args(o, samples=False)
    o.add_argument("--targets", required=True)
    o.add_argument("--backend", choices=["exact", "effective"], default="exact")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--tol", type=float, default=1e-4)
    o.add_argument("--starts", type=int, default=5)
    o.add_argument("--max-evals", type=int, default=400, help="evaluation cap per start")
    o.add_argument("--order", type=int, default=4, help="expansion order of the effective backend")
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_optimize)

    c = sub.add_parser("capacity", help="storage capacity of the design protocol")
    c.add_argument("--orders", default="1,2")
    c.add_argument("--n-min", type=int, default=6)
    c.add_argument("--n-max", type=int, default=12)
    c.add_argument("--n-step", type=int, default=2)
    c.add_argument("--realizations", type=int, default=100)
    c.add_argument("--subgroup", type=int, default=20)
    c.add_argument("--sp", type=float, default=0.99)
    c.add_argument("--delta-star", type=float, default=0.1)
    c.add_argument("--radius", type=int, default=4)
    c.add_argument("--r", type=int, default=1)
    c.add_argument("--p-relearn", type=float, default=2 / 3)
    c.add_argument("--temp", type=float, default=1.0)
    c.add_argument("--max-steps", type=int, default=100_000)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_capacity)

    e = sub.add_parser("example", help="run one of the two bundled worked examples end to end")
    e.add_argument("--which", type=int, choices=[1, 2], required=True)
    e.add_argument("--T", default="50,100,200", help="comma-separated sweep times")
    e.add_argument("--steps", type=int, default=4000)
    e.add_argument("--samples", type=int, default=200, help="trace sample count")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--tol", type=float, default=1e-4)
    e.add_argument("--max-evals", type=int, default=400)
    e.add_argument("--out-dir", required=True)
    e.set_defaults(func=cmd_example)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
