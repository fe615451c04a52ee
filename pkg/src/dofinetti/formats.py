"""Text formats: dataset CSV and query description files."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .core import ExchangeableDataset, InterventionSet, Query
from .harness import parse_keyvalue


def write_dataset(dataset: ExchangeableDataset, path) -> None:
    """CSV with header ``env,pos,x0,x1,...``; one row per (environment, position)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["env", "pos"] + [f"x{i}" for i in range(dataset.num_vars)])
        for e in range(dataset.num_envs):
            for n in range(dataset.num_positions):
                w.writerow([e, n, *dataset.values[e, n].tolist()])


def read_dataset(path, cardinalities=None) -> ExchangeableDataset:
    """Inverse of :func:`write_dataset`; cardinalities default to observed max + 1."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["env", "pos"]:
            raise ValueError(f"{path}: header must start with 'env,pos'")
        rows = np.array([[int(v) for v in row] for row in reader if row], dtype=np.int64)
    d = len(header) - 2
    if rows.size == 0:
        raise ValueError(f"{path}: no data rows")
    E, N = rows[:, 0].max() + 1, rows[:, 1].max() + 1
    if len(rows) != E * N:
        raise ValueError(f"{path}: expected {E * N} rows for {E} environments x {N} positions, got {len(rows)}")
    values = np.full((E, N, d), -1, dtype=np.int64)
    values[rows[:, 0], rows[:, 1]] = rows[:, 2:]
    if np.any(values < 0):
        raise ValueError(f"{path}: missing (env, pos) rows")
    if cardinalities is None:
        cardinalities = tuple(int(c) for c in np.maximum(values.max(axis=(0, 1)) + 1, 2))
    return ExchangeableDataset(values, cardinalities)


def parse_query(text: str) -> Query:
    """Fields ``intervene = [(var,pos,value),...]``, ``target = [(var,pos),...]``, ``given = [(var,pos,value),...]``."""
    raw = parse_keyvalue(text)
    unknown = set(raw) - {"intervene", "target", "given"}
    if unknown:
        raise ValueError(f"unknown query fields: {sorted(unknown)}")
    if "target" not in raw:
        raise ValueError("query needs a 'target' field")
    return Query(
        targets=tuple(tuple(t) for t in raw["target"]),
        intervention=InterventionSet.of(*raw.get("intervene", [])),
        conditioning={(i, n): v for i, n, v in raw.get("given", [])},
    )


def read_query(path) -> Query:
    return parse_query(Path(path).read_text())
