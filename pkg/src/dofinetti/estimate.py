"""Histogram fitting and the exchangeable truncated factorization."""

from __future__ import annotations

import warnings
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import (
    Axis,
    Dag,
    DimensionMismatch,
    ExchangeableDataset,
    InterventionSet,
    JointTable,
    Query,
    ZeroMassContext,
    ZeroMassWarning,
    block_axes,
    condition,
    marginalize,
    table_positions,
)


class ConditioningInconsistent(ValueError):
    """The conditioning event contradicts the forced values of the intervention."""


class InconsistentInterventionPattern(ValueError):
    """Intervened variable sets differ between positions."""


def fit_joint(
    dataset: ExchangeableDataset,
    positions: Sequence[int] | None = None,
    smoothing: float = 0.0,
) -> JointTable:
    """Histogram of whole environment blocks: one sample per environment.

    ``smoothing`` adds a pseudo-count to every cell before normalizing.
    """
    if dataset.num_envs == 0:
        raise ValueError("empty dataset")
    positions = list(range(dataset.num_positions)) if positions is None else list(positions)
    axes = block_axes(dataset.num_vars, len(positions))
    shape = tuple(dataset.cardinalities[i] for i, _ in axes)
    cols = tuple(dataset.values[:, positions[n], i] for i, n in axes)
    flat = np.ravel_multi_index(cols, shape)
    counts = np.bincount(flat, minlength=int(np.prod(shape))).astype(float) + smoothing
    return JointTable(axes, (counts / counts.sum()).reshape(shape))


def fit_pooled(dataset: ExchangeableDataset, positions: Sequence[int] | None = None) -> JointTable:
    """Histogram of single-position tuples pooled over environments and positions (the i.i.d. view).

    Axes are ``(i, 0)`` for every variable.
    """
    positions = list(range(dataset.num_positions)) if positions is None else list(positions)
    vals = dataset.values[:, positions, :].reshape(-1, dataset.num_vars)
    shape = dataset.cardinalities
    flat = np.ravel_multi_index(tuple(vals.T), shape)
    counts = np.bincount(flat, minlength=int(np.prod(shape))).astype(float)
    return JointTable(block_axes(dataset.num_vars, 1), (counts / counts.sum()).reshape(shape))


def _check_intervention(table: JointTable, intervention: InterventionSet):
    for axis, v in intervention.assignments.items():
        if axis not in table.axes:
            raise DimensionMismatch(f"intervened axis {axis} not in table")
        if not 0 <= v < table.card(axis):
            raise ValueError(f"forced value {v} out of range for axis {axis}")


def _conditional_factor(
    table: JointTable, child: list[Axis], parents: list[Axis]
) -> tuple[np.ndarray, np.ndarray, list[Axis]]:
    """``P(child | parents)`` on the axes ``child + parents``, plus a mask of undefined contexts."""
    joint = marginalize(table, child + parents).probs
    denom = joint.sum(axis=tuple(range(len(child))), keepdims=True)
    undefined = np.broadcast_to(denom <= 0, joint.shape)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(denom > 0, joint / np.where(denom > 0, denom, 1.0), 0.0)
    return cond, undefined, child + parents


def _place(arr: np.ndarray, axes: Sequence[Axis], full_axes: Sequence[Axis]) -> np.ndarray:
    """Reshape an array over ``axes`` so it broadcasts against a lattice over ``full_axes``."""
    axes = list(axes)
    order = [axes.index(a) for a in full_axes if a in axes]
    arr = np.transpose(arr, order)
    shape = [arr.shape[order.index(axes.index(a))] if a in axes else 1 for a in full_axes]
    return arr.reshape(shape)


def _expand(arr: np.ndarray, axes: Sequence[Axis], table: JointTable) -> np.ndarray:
    return _place(arr, axes, table.axes)


def truncated_factorization(
    table: JointTable,
    dag: Dag,
    intervention: InterventionSet,
    zero_mass: str = "raise",
) -> JointTable:
    """Post-interventional block distribution from pre-interventional conditionals.

    Every variable ``i`` keeps its conditional ``P(x_i | pa_i)`` jointly over
    the positions where it was not forced; the forced axes become point masses.
    With ``zero_mass="uniform"`` an undefined conditional that some consistent,
    positive-weight configuration needs is replaced by the uniform
    distribution and a :class:`ZeroMassWarning` is issued per context.
    """
    d, N = table_positions(table)
    if d != dag.num_vars:
        raise DimensionMismatch(f"table has {d} variables, graph has {dag.num_vars}")
    _check_intervention(table, intervention)

    consistent = np.ones(table.cards, dtype=bool)
    for axis, v in intervention.assignments.items():
        sel = np.zeros(table.card(axis), dtype=bool)
        sel[v] = True
        consistent &= _expand(sel, [axis], table)

    weight = np.ones(table.cards)
    factors = []
    for i in range(d):
        free = [n for n in range(N) if n not in intervention.positions(i)]
        if not free:
            continue
        child = [(i, n) for n in free]
        parents = [(j, n) for j in dag.parents(i) for n in free]
        cond, undefined, axes = _conditional_factor(table, child, parents)
        factors.append((child, parents, cond, undefined, axes))
        weight = weight * _expand(np.where(undefined, 1.0, cond), axes, table)

    weight = np.where(consistent, weight, 0.0)
    for child, parents, cond, undefined, axes in factors:
        if not undefined.any():
            continue
        needed = _expand(undefined, axes, table) & (weight > 0)
        if not needed.any():
            continue
        if zero_mass != "uniform":
            raise ZeroMassContext(f"conditional of {child} given {parents} needed on a zero-mass context")
        # one warning per distinct parent context that was needed
        ctx_needed = needed.any(axis=tuple(k for k, a in enumerate(table.axes) if a not in parents))
        for _ in range(int(np.count_nonzero(ctx_needed))):
            warnings.warn(f"uniform fallback for {child} given {parents}", ZeroMassWarning, stacklevel=2)
        n_child = int(np.prod([table.card(a) for a in child]))
        uniform_part = _expand(undefined, axes, table) * (1.0 / n_child)
        # weight used 1.0 for undefined entries; swap in the uniform value
        weight = np.where(_expand(undefined, axes, table) & (weight > 0), weight * uniform_part, weight)
    return JointTable(table.axes, weight)


def iid_truncated_factorization(
    pair_table: JointTable,
    dag: Dag,
    intervention: InterventionSet,
    num_positions: int,
    zero_mass: str = "raise",
) -> JointTable:
    """The classical i.i.d. truncated factorization applied position by position.

    ``pair_table`` is a single-position table over axes ``(i, 0)``; the block
    prediction is the product over positions of each position's truncated
    factorization. Cross-position dependence is absent by construction.
    """
    d = dag.num_vars
    if sorted(pair_table.axes) != [(i, 0) for i in range(d)]:
        raise DimensionMismatch("pair table must have axes (i, 0) for every variable")
    cards = [pair_table.card((i, 0)) for i in range(d)]
    axes = block_axes(d, num_positions)
    out = np.ones(tuple(cards[i] for i, _ in axes))
    for n in range(num_positions):
        for i in range(d):
            if (i, n) in intervention.assignments:
                arr = np.zeros(cards[i])
                arr[intervention.assignments[(i, n)]] = 1.0
                local = [(i, n)]
            else:
                pa = list(dag.parents(i))
                family = marginalize(pair_table, [(i, 0)] + [(j, 0) for j in pa])
                arr = np.empty([cards[j] for j in [i] + pa])
                for pa_vals in np.ndindex(*[cards[j] for j in pa]):
                    given = {(j, 0): v for j, v in zip(pa, pa_vals)}
                    arr[(slice(None),) + pa_vals] = condition(family, given, zero_mass).probs
                local = [(j, n) for j in [i] + pa]
            out = out * _place(arr, local, axes)
    return JointTable(axes, out)


def answer_query(
    table: JointTable,
    dag: Dag,
    query: Query,
    zero_mass: str = "raise",
) -> JointTable:
    """``P(targets | do(intervention), conditioning)`` over ``query.targets`` in their given order."""
    for axis, v in query.conditioning.items():
        forced = query.intervention.assignments.get(axis)
        if forced is not None and forced != v:
            raise ConditioningInconsistent(f"{axis} forced to {forced} but conditioned on {v}")
    post = truncated_factorization(table, dag, query.intervention, zero_mass)
    given = {a: v for a, v in query.conditioning.items() if a not in query.intervention.assignments}
    if given:
        try:
            post = condition(post, given)
        except ZeroMassContext as exc:
            raise ConditioningInconsistent(f"conditioning event impossible after intervention: {exc}") from None
    return marginalize(post, query.targets)


def parent_adjustment(
    table: JointTable,
    dag: Dag,
    intervention: InterventionSet,
    targets: Iterable[Axis],
) -> JointTable:
    """Adjust for the parents of the intervened variables at the intervened positions.

    Requires the same variable set forced at every intervened position, and
    targets located at those positions. Computes
    ``sum_pa P(targets | x, pa) P(pa)`` from the block marginal over those positions.
    """
    targets = [tuple(a) for a in targets]
    by_pos: dict[int, set[int]] = {}
    for i, n in intervention.assignments:
        by_pos.setdefault(n, set()).add(i)
    var_sets = {frozenset(s) for s in by_pos.values()}
    if len(var_sets) > 1:
        raise InconsistentInterventionPattern(f"positions force different variables: {by_pos}")
    positions = set(by_pos)
    if any(n not in positions for _, n in targets):
        raise ValueError("targets must sit at intervened positions")
    if set(targets) & set(intervention.assignments):
        raise ValueError("targets overlap the intervention")
    forced_vars = next(iter(var_sets)) if var_sets else frozenset()
    pa_vars = sorted({j for i in forced_vars for j in dag.parents(i)} - forced_vars)
    pa_axes = [(j, n) for j in pa_vars for n in sorted(positions)]
    x_axes = list(intervention.assignments)
    x_vals = tuple(intervention.assignments[a] for a in x_axes)

    union = targets + [a for a in pa_axes if a not in targets]
    joint = marginalize(table, union + x_axes).probs[(Ellipsis,) + x_vals]
    pa_x = marginalize(table, pa_axes + x_axes).probs[(Ellipsis,) + x_vals]
    pa = marginalize(table, pa_axes).probs
    if np.any((pa > 0) & (pa_x <= 0)):
        raise ZeroMassContext("forced value has zero mass in a parent context of positive mass")
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(pa_x > 0, pa / np.where(pa_x > 0, pa_x, 1.0), 0.0)
    # align the parent-only ratio with the union axes
    shape = [table.card(a) if a in pa_axes else 1 for a in union]
    order = [pa_axes.index(a) for a in union if a in pa_axes]
    weighted = joint * np.transpose(ratio, order).reshape(shape)
    drop = tuple(k for k, a in enumerate(union) if a not in targets)
    out = weighted.sum(axis=drop) if drop else weighted
    return JointTable(tuple(targets), out)
