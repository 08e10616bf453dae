"""JSON decomposition files.

Waring decomposition::

    {"n": 3, "D": 3, "terms": [{"weight": 1.0, "direction": [1, 0, 0]}, ...]}

Partially symmetric decomposition::

    {"sizes": [3, 2], "degrees": [2, 1],
     "terms": [{"weight": 1.0, "directions": [[1, 0, 0], [0, 1]]}, ...]}

Directions are normalized on load.
"""
from __future__ import annotations

import json
import warnings
from pathlib import Path

import numpy as np

from .terracini import PsrdDecomposition, PsrdTerm, SymmetricTerm, WaringDecomposition

NORM_WARN_TOL = 1e-8


def _normalize(x, where: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x)
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError(f"{where}: direction has norm {norm}")
    if abs(norm - 1.0) > NORM_WARN_TOL:
        warnings.warn(f"{where}: direction norm {norm:.12g} differs from 1; normalizing")
    return x / norm


def decomposition_from_dict(data: dict) -> WaringDecomposition | PsrdDecomposition:
    if "sizes" in data:
        terms = [
            PsrdTerm(t["weight"], tuple(_normalize(a, f"term {r}, group {k}") for k, a in enumerate(t["directions"])))
            for r, t in enumerate(data["terms"])
        ]
        return PsrdDecomposition(sizes=tuple(data["sizes"]), degrees=tuple(data["degrees"]), terms=tuple(terms))
    terms = [SymmetricTerm(t["weight"], _normalize(t["direction"], f"term {r}")) for r, t in enumerate(data["terms"])]
    return WaringDecomposition(n=int(data["n"]), D=int(data["D"]), terms=tuple(terms))


def decomposition_to_dict(dec: WaringDecomposition | PsrdDecomposition) -> dict:
    if isinstance(dec, PsrdDecomposition):
        return {
            "sizes": list(dec.sizes),
            "degrees": list(dec.degrees),
            "terms": [{"weight": t.weight, "directions": [a.tolist() for a in t.directions]} for t in dec.terms],
        }
    return {
        "n": dec.n,
        "D": dec.D,
        "terms": [{"weight": t.weight, "direction": t.direction.tolist()} for t in dec.terms],
    }


def load_decomposition(path) -> WaringDecomposition | PsrdDecomposition:
    with open(path) as fh:
        return decomposition_from_dict(json.load(fh))


def save_decomposition(dec, path) -> None:
    Path(path).write_text(json.dumps(decomposition_to_dict(dec), indent=2) + "\n")
