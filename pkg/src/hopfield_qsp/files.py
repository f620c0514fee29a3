"""On-disk formats: patterns, Hamiltonians, layouts, constraint strengths, CSV and JSON outputs.

Every output starts with a metadata record (package version, seed, parameters).
CSV files carry it as a single leading ``# {json}`` comment line; JSON files
as a top-level ``metadata`` key.  Floats are written with ``repr`` so output is
byte-identical across repeated runs.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .hopfield import PatternSet
from .lhz import LhzLayout, Plaquette
from .spinmodel import SpinGlassHamiltonian


def metadata(seed: int | None, params: Mapping[str, Any]) -> dict:
    return {"version": __version__, "seed": seed, "parameters": _plain(dict(params))}


def _plain(x):
    if isinstance(x, Mapping):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "nan" if math.isnan(x) else repr(x)
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    return str(x)


def write_csv(path: str | Path, rows: Iterable[Sequence], meta: Mapping | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if meta is not None:
            fh.write("# " + json.dumps(_plain(meta), sort_keys=True) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for row in rows:
            w.writerow([_cell(x) for x in row])


def read_csv(path: str | Path) -> tuple[dict | None, list[list[str]]]:
    """Metadata record (if any) and the remaining rows as strings."""
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    meta = None
    if lines and lines[0].startswith("# "):
        meta = json.loads(lines[0][2:])
        lines = lines[1:]
    return meta, list(csv.reader(lines))


def write_json(path: str | Path, data: Mapping) -> None:
    with open(path, "w") as fh:
        json.dump(_plain(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def read_patterns(path: str | Path) -> PatternSet:
    """JSON with a ``patterns`` list, or plain text with one bit string per line."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        lines = [ln.strip() for ln in text.splitlines()]
        return PatternSet.from_strings([ln for ln in lines if ln and not ln.startswith("#")])
    if isinstance(data, list):
        return PatternSet.from_strings(data)
    return PatternSet.from_dict(data)


def write_hamiltonian(path: str | Path, h: SpinGlassHamiltonian, patterns: Sequence[str] | None = None,
                      meta: Mapping | None = None, extra: Mapping | None = None) -> None:
    data = h.to_dict()
    if patterns is not None:
        data["patterns"] = list(patterns)
    if extra:
        data.update(extra)
    if meta is not None:
        data["metadata"] = meta
    write_json(path, data)


def read_hamiltonian(path: str | Path) -> tuple[SpinGlassHamiltonian, list[str] | None]:
    data = read_json(path)
    return SpinGlassHamiltonian.from_dict(data), data.get("patterns")


def write_layout(path: str | Path, layout: LhzLayout, plaquettes: Sequence[Plaquette],
                 logical_patterns: Sequence[str] | None, physical_patterns: Sequence[str] | None,
                 meta: Mapping | None = None) -> None:
    data = {
        "layout": layout.to_dict(),
        "plaquettes": [
            {"members": list(p.members), "labels": [list(layout.qubits[m]) for m in p.members],
             "strength": p.strength}
            for p in plaquettes
        ],
        "logical_patterns": list(logical_patterns) if logical_patterns is not None else None,
        "physical_patterns": list(physical_patterns) if physical_patterns is not None else None,
    }
    if meta is not None:
        data["metadata"] = meta
    write_json(path, data)


def read_layout(path: str | Path) -> tuple[LhzLayout, list[Plaquette], list[str] | None]:
    """Layout, plaquettes and the physical pattern strings."""
    data = read_json(path)
    layout = LhzLayout.from_dict(data["layout"])
    plaquettes = [Plaquette(tuple(p["members"]), float(p["strength"])) for p in data["plaquettes"]]
    return layout, plaquettes, data.get("physical_patterns")


def read_strengths(path: str | Path) -> np.ndarray:
    """Constraint strengths from ``{"strengths": [...]}``, an optimizer output or a bare list."""
    data = read_json(path)
    if isinstance(data, list):
        return np.asarray(data, dtype=float)
    for key in ("strengths", "best_c"):
        if key in data:
            return np.asarray(data[key], dtype=float)
    raise KeyError(f"{path}: no 'strengths' or 'best_c' entry")
