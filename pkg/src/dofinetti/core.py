"""Graphs, grouped datasets, and dense probability tables.

Variables are addressed by an ``(var, pos)`` pair: ``var`` is the variable
index ``0 <= var < d`` and ``pos`` the 0-based position inside an
environment's block. Tables are dense arrays over the full configuration
lattice of their axes, which keeps every operation exact at the sizes this
package targets (a bivariate, two-position binary block has 16 cells).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Mapping, Sequence

import numpy as np

Axis = tuple[int, int]

NORMALIZATION_TOL = 1e-12


class ZeroMassContext(ValueError):
    """Conditioning on an event of probability zero."""


class ZeroMassWarning(UserWarning):
    """Emitted each time a zero-mass context is replaced by a uniform conditional."""


class DimensionMismatch(ValueError):
    pass


# --------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class Dag:
    num_vars: int
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("a DAG needs at least one variable")
        edges = frozenset((int(a), int(b)) for a, b in self.edges)
        for a, b in edges:
            if not (0 <= a < self.num_vars and 0 <= b < self.num_vars):
                raise ValueError(f"edge {(a, b)} out of range for {self.num_vars} variables")
            if a == b:
                raise ValueError(f"self loop on variable {a}")
        object.__setattr__(self, "edges", edges)
        try:
            order = tuple(TopologicalSorter(self._parent_map()).static_order())
        except CycleError as exc:
            raise ValueError(f"graph has a cycle: {exc.args[1]}") from None
        object.__setattr__(self, "_order", order)

    def _parent_map(self) -> dict[int, list[int]]:
        parents = {i: [] for i in range(self.num_vars)}
        for a, b in self.edges:
            parents[b].append(a)
        return parents

    def parents(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(a for a, b in self.edges if b == i))

    def children(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(b for a, b in self.edges if a == i))

    def topological_order(self) -> tuple[int, ...]:
        return self._order

    @classmethod
    def from_string(cls, text: str, num_vars: int | None = None) -> "Dag":
        """Parse ``"X->Y"``, ``"Y->X"``, ``"X|Y"`` or an edge list like ``"0>1,1>2"``."""
        text = text.strip()
        if text in BIVARIATE_GRAPHS:
            return BIVARIATE_GRAPHS[text]
        edges = []
        for part in filter(None, (p.strip() for p in text.split(","))):
            a, b = part.split(">")
            edges.append((int(a), int(b)))
        n = num_vars if num_vars is not None else 1 + max((max(e) for e in edges), default=0)
        return cls(n, frozenset(edges))

    def __str__(self):
        name = bivariate_name(self)
        if name is not None:
            return name
        return ",".join(f"{a}>{b}" for a, b in sorted(self.edges)) or f"empty({self.num_vars})"


BIVARIATE_GRAPHS: dict[str, Dag] = {
    "X->Y": Dag(2, frozenset({(0, 1)})),
    "Y->X": Dag(2, frozenset({(1, 0)})),
    "X|Y": Dag(2, frozenset()),
}


def bivariate_name(dag: Dag) -> str | None:
    for name, g in BIVARIATE_GRAPHS.items():
        if g == dag:
            return name
    return None


def block_axes(num_vars: int, num_positions: int) -> tuple[Axis, ...]:
    """Canonical axis order: position-major, so ``X1, Y1, X2, Y2`` for d=2, N=2."""
    return tuple((i, n) for n in range(num_positions) for i in range(num_vars))


# --------------------------------------------------------------------------
# data


@dataclass(frozen=True, eq=False)
class ExchangeableDataset:
    """Grouped data: ``values[e, n, i]`` is variable ``i`` at position ``n`` of environment ``e``."""

    values: np.ndarray
    cardinalities: tuple[int, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=np.int64)
        if values.ndim != 3:
            raise DimensionMismatch("values must have shape (envs, positions, vars)")
        cards = tuple(int(c) for c in self.cardinalities)
        if len(cards) != values.shape[2]:
            raise DimensionMismatch(f"{len(cards)} cardinalities for {values.shape[2]} variables")
        if values.size and (values.min() < 0 or np.any(values.max(axis=(0, 1)) >= np.array(cards))):
            raise ValueError("value outside its variable's cardinality")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "cardinalities", cards)

    @property
    def num_envs(self) -> int:
        return self.values.shape[0]

    @property
    def num_positions(self) -> int:
        return self.values.shape[1]

    @property
    def num_vars(self) -> int:
        return self.values.shape[2]

    def column(self, axis: Axis) -> np.ndarray:
        i, n = axis
        return self.values[:, n, i]

    def permute_positions(self, perm: Sequence[int]) -> "ExchangeableDataset":
        return ExchangeableDataset(self.values[:, list(perm), :], self.cardinalities)

    def swap_vars(self, perm: Sequence[int]) -> "ExchangeableDataset":
        perm = list(perm)
        return ExchangeableDataset(self.values[:, :, perm], tuple(self.cardinalities[p] for p in perm))

    def __eq__(self, other):
        if not isinstance(other, ExchangeableDataset):
            return NotImplemented
        return self.cardinalities == other.cardinalities and np.array_equal(self.values, other.values)


# --------------------------------------------------------------------------
# interventions and queries


@dataclass(frozen=True)
class InterventionSet:
    """Forced values keyed by ``(var, pos)``."""

    assignments: Mapping[Axis, int] = field(default_factory=dict)

    def __post_init__(self):
        items = self.assignments.items() if isinstance(self.assignments, Mapping) else self.assignments
        clean: dict[Axis, int] = {}
        for (i, n), v in items:
            key = (int(i), int(n))
            if key in clean:
                raise ValueError(f"duplicate intervention on {key}")
            clean[key] = int(v)
        object.__setattr__(self, "assignments", dict(sorted(clean.items())))

    @classmethod
    def of(cls, *triples: tuple[int, int, int]) -> "InterventionSet":
        return cls({(i, n): v for i, n, v in triples})

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.assignments)

    def positions(self, i: int) -> frozenset[int]:
        return frozenset(n for j, n in self.assignments if j == i)

    def __len__(self):
        return len(self.assignments)

    def __hash__(self):
        return hash(tuple(self.assignments.items()))


@dataclass(frozen=True)
class Query:
    targets: tuple[Axis, ...]
    intervention: InterventionSet = field(default_factory=InterventionSet)
    conditioning: Mapping[Axis, int] = field(default_factory=dict)

    def __post_init__(self):
        targets = tuple((int(i), int(n)) for i, n in self.targets)
        if len(set(targets)) != len(targets):
            raise ValueError("duplicate target axis")
        cond = {(int(i), int(n)): int(v) for (i, n), v in dict(self.conditioning).items()}
        if set(targets) & set(self.intervention.assignments):
            raise ValueError("target axes overlap the intervention")
        if set(targets) & set(cond):
            raise ValueError("target axes overlap the conditioning set")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "conditioning", cond)


# --------------------------------------------------------------------------
# tables


@dataclass(frozen=True, eq=False)
class JointTable:
    """Dense joint distribution over ``axes``; ``probs`` has one dimension per axis."""

    axes: tuple[Axis, ...]
    probs: np.ndarray

    def __post_init__(self):
        axes = tuple((int(i), int(n)) for i, n in self.axes)
        if len(set(axes)) != len(axes):
            raise ValueError("axes must be distinct")
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != len(axes):
            raise DimensionMismatch(f"{len(axes)} axes but probs has {probs.ndim} dimensions")
        if np.any(probs < 0):
            raise ValueError("negative probability")
        total = probs.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL * max(1.0, probs.size**0.5):
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", probs)

    @property
    def cards(self) -> tuple[int, ...]:
        return self.probs.shape

    def card(self, axis: Axis) -> int:
        return self.probs.shape[self.index(axis)]

    def index(self, axis: Axis) -> int:
        try:
            return self.axes.index(tuple(axis))
        except ValueError:
            raise KeyError(f"axis {tuple(axis)} not in table") from None

    def __getitem__(self, config: Mapping[Axis, int]) -> float:
        """Probability of a full configuration given as ``{axis: value}``."""
        return float(self.probs[tuple(config[a] for a in self.axes)])

    def transpose(self, axes: Sequence[Axis]) -> "JointTable":
        axes = tuple(tuple(a) for a in axes)
        if sorted(axes) != sorted(self.axes):
            raise KeyError("transpose needs a permutation of the table's axes")
        return JointTable(axes, np.transpose(self.probs, [self.index(a) for a in axes]))

    def configurations(self) -> Iterable[tuple[tuple[int, ...], float]]:
        for config in itertools.product(*(range(c) for c in self.cards)):
            yield config, float(self.probs[config])

    def allclose(self, other: "JointTable", atol: float = 1e-12) -> bool:
        if sorted(self.axes) != sorted(other.axes):
            return False
        return bool(np.allclose(self.probs, other.transpose(self.axes).probs, rtol=0, atol=atol))

    def max_abs_diff(self, other: "JointTable") -> float:
        return float(np.abs(self.probs - other.transpose(self.axes).probs).max())

    def to_text(self) -> str:
        header = " ".join(f"{i}:{n}:{c}" for (i, n), c in zip(self.axes, self.cards))
        rows = [header]
        for config, p in self.configurations():
            rows.append(f"{' '.join(map(str, config))},{p!r}")
        return "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "JointTable":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        axes, cards = [], []
        for token in lines[0].split():
            i, n, c = (int(t) for t in token.split(":"))
            axes.append((i, n))
            cards.append(c)
        probs = np.zeros(cards)
        for line in lines[1:]:
            config, p = line.rsplit(",", 1)
            idx = tuple(int(t) for t in config.split())
            probs[idx] = float(p)
        return cls(tuple(axes), probs)


def marginalize(table: JointTable, keep: Iterable[Axis]) -> JointTable:
    """Sum out every axis not in ``keep``; result axes follow ``keep``'s order."""
    keep = tuple(tuple(a) for a in keep)
    idx = [table.index(a) for a in keep]
    drop = tuple(k for k in range(len(table.axes)) if k not in idx)
    summed = table.probs.sum(axis=drop) if drop else table.probs
    remaining = [k for k in range(len(table.axes)) if k in idx]
    order = [remaining.index(k) for k in idx]
    return JointTable(keep, np.transpose(summed, order))


def condition(
    table: JointTable, given: Mapping[Axis, int], zero_mass: str = "raise"
) -> JointTable:
    """Distribution of the remaining axes given ``given``.

    ``zero_mass="uniform"`` returns the uniform table over the remaining axes
    (with a :class:`ZeroMassWarning`) instead of raising :class:`ZeroMassContext`.
    """
    given = {tuple(a): int(v) for a, v in given.items()}
    index = [slice(None)] * len(table.axes)
    for a, v in given.items():
        k = table.index(a)
        if not 0 <= v < table.cards[k]:
            raise ValueError(f"value {v} out of range for axis {a}")
        index[k] = v
    rest = tuple(a for a in table.axes if a not in given)
    sliced = table.probs[tuple(index)]
    mass = sliced.sum()
    if mass <= 0:
        if zero_mass != "uniform":
            raise ZeroMassContext(f"P({given}) = 0")
        warnings.warn(f"uniform fallback for zero-mass context {given}", ZeroMassWarning, stacklevel=2)
        return JointTable(rest, np.full(sliced.shape, 1.0 / max(sliced.size, 1)))
    return JointTable(rest, sliced / mass)


def product(tables: Sequence[JointTable]) -> JointTable:
    """Outer product of tables over disjoint axes."""
    axes: list[Axis] = []
    probs = np.ones(())
    for t in tables:
        if set(axes) & set(t.axes):
            raise ValueError(f"overlapping axes {sorted(set(axes) & set(t.axes))}")
        axes.extend(t.axes)
        probs = np.multiply.outer(probs, t.probs)
    return JointTable(tuple(axes), probs)


def point_mass(axes: Sequence[Axis], cards: Sequence[int], values: Sequence[int]) -> JointTable:
    probs = np.zeros(tuple(cards))
    probs[tuple(values)] = 1.0
    return JointTable(tuple(axes), probs)


def table_positions(table: JointTable) -> tuple[int, int]:
    """``(num_vars, num_positions)`` of a table covering a full ``d x N`` block."""
    vars_ = sorted({i for i, _ in table.axes})
    pos = sorted({n for _, n in table.axes})
    d, N = len(vars_), len(pos)
    if vars_ != list(range(d)) or pos != list(range(N)) or len(table.axes) != d * N:
        raise DimensionMismatch("table does not cover a complete d x N block")
    return d, N


def permute_positions(table: JointTable, perm: Sequence[int]) -> JointTable:
    """Relabel position ``n`` as ``perm[n]``."""
    axes = tuple((i, perm[n]) for i, n in table.axes)
    return JointTable(axes, table.probs)


def symmetrize_positions(table: JointTable) -> JointTable:
    """Average a full-block table over all permutations of its positions."""
    _, N = table_positions(table)
    acc = np.zeros(table.cards)
    perms = list(itertools.permutations(range(N)))
    for perm in perms:
        acc += permute_positions(table, perm).transpose(table.axes).probs
    return JointTable(table.axes, acc / len(perms))
