"""Bivariate graph discovery from grouped data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import chi2

from .core import BIVARIATE_GRAPHS, Axis, Dag, ExchangeableDataset
from .simulate import Seed, make_rng


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class CiTestResult:
    statistic: float
    degrees_of_freedom: int
    p_value: float


def g_test(
    a: np.ndarray,
    b: np.ndarray,
    cond: Sequence[np.ndarray] = (),
    cards: Sequence[int] | None = None,
    strict: bool = False,
) -> CiTestResult:
    """Likelihood-ratio test of ``a _||_ b | cond`` on paired categorical samples.

    ``cards`` lists the cardinalities of ``a``, ``b`` and each conditioning
    column; by default they are inferred from the observed maxima.
    """
    cols = [np.asarray(a), np.asarray(b), *map(np.asarray, cond)]
    if cards is None:
        cards = [int(c.max()) + 1 if c.size else 1 for c in cols]
    ca, cb, *cc = (int(c) for c in cards)
    n_strata = int(np.prod(cc)) if cc else 1
    stratum = np.ravel_multi_index(tuple(cols[2:]), cc) if cc else np.zeros(len(cols[0]), dtype=np.int64)
    flat = (stratum * ca + cols[0]) * cb + cols[1]
    counts = np.bincount(flat, minlength=n_strata * ca * cb).reshape(n_strata, ca, cb).astype(float)

    totals = counts.sum(axis=(1, 2), keepdims=True)
    expected = np.divide(
        counts.sum(axis=2, keepdims=True) * counts.sum(axis=1, keepdims=True),
        totals,
        out=np.zeros_like(counts),
        where=totals > 0,
    )
    if strict and np.any(expected < 5):
        raise InsufficientData("a conditioning stratum has expected counts below 5")
    mask = counts > 0
    stat = 2.0 * float(np.sum(counts[mask] * np.log(counts[mask] / expected[mask])))
    stat = max(stat, 0.0)
    dof = (ca - 1) * (cb - 1) * n_strata
    return CiTestResult(stat, dof, float(chi2.sf(stat, dof)))


def ci_test(
    dataset: ExchangeableDataset,
    a: Axis,
    b: Axis,
    cond: Sequence[Axis] = (),
    strict: bool = False,
) -> CiTestResult:
    """G-test across environments, each contributing one sample of ``(a, b, cond)``."""
    axes = [tuple(a), tuple(b), *map(tuple, cond)]
    if len(set(axes)) != len(axes):
        raise ValueError("test axes must be distinct")
    cols = [dataset.column(ax) for ax in axes]
    cards = [dataset.cardinalities[ax[0]] for ax in axes]
    return g_test(cols[0], cols[1], cols[2:], cards, strict)


X1, Y1, X2, Y2 = (0, 0), (1, 0), (0, 1), (1, 1)


@dataclass(frozen=True)
class DiscoveryReport:
    p_independent: float
    p_forward: float
    p_backward: float
    graph: Dag
    significance: float

    def to_text(self) -> str:
        return (
            f"graph = {str(self.graph)!r}\n"
            f"significance = {self.significance!r}\n"
            f"p_independent = {self.p_independent!r}\n"
            f"p_forward = {self.p_forward!r}\n"
            f"p_backward = {self.p_backward!r}\n"
        )


def discover_bivariate_report(
    dataset: ExchangeableDataset, significance: float = 0.05, strict: bool = False
) -> DiscoveryReport:
    """Decide among X->Y, Y->X and X|Y using the first two positions.

    ``X1 _||_ Y1`` not rejected gives X|Y. Otherwise X->Y predicts
    ``Y1 _||_ X2 | X1`` and Y->X predicts ``X1 _||_ Y2 | Y1``; the direction
    whose independence has the larger p-value wins, ties going to X->Y.
    """
    if dataset.num_vars != 2:
        raise ValueError("bivariate discovery needs exactly two variables")
    if dataset.num_positions < 2:
        raise ValueError("discovery needs at least two positions per environment")
    p_ind = ci_test(dataset, X1, Y1, (), strict).p_value
    p_fwd = ci_test(dataset, Y1, X2, (X1,), strict).p_value
    p_bwd = ci_test(dataset, X1, Y2, (Y1,), strict).p_value
    if p_ind > significance:
        name = "X|Y"
    elif p_fwd >= p_bwd:
        name = "X->Y"
    else:
        name = "Y->X"
    return DiscoveryReport(p_ind, p_fwd, p_bwd, BIVARIATE_GRAPHS[name], significance)


def discover_bivariate(dataset: ExchangeableDataset, significance: float = 0.05) -> Dag:
    return discover_bivariate_report(dataset, significance).graph


def discover_bivariate_iid_baseline(
    dataset: ExchangeableDataset, significance: float = 0.05, seed: Seed = 0
) -> Dag:
    """PC on pooled pairs: test adjacency, then orient the lone edge by a seeded coin flip."""
    if dataset.num_vars != 2:
        raise ValueError("bivariate discovery needs exactly two variables")
    x = dataset.values[:, :, 0].ravel()
    y = dataset.values[:, :, 1].ravel()
    p = g_test(x, y, (), dataset.cardinalities).p_value
    if p > significance:
        return BIVARIATE_GRAPHS["X|Y"]
    flip = make_rng(seed).integers(2)
    return BIVARIATE_GRAPHS["X->Y" if flip == 0 else "Y->X"]
