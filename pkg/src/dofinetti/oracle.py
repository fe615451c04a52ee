"""Ground truth for the bivariate Beta-Bernoulli XOR process.

Two independent routes to the same tables: conjugate closed forms
(Beta-function ratios) and a numerical integral over the mechanism
parameters on a Gauss-Legendre grid.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np
from scipy.special import betaln, gammaln

from .core import (
    Dag,
    InterventionSet,
    JointTable,
    block_axes,
)
from .simulate import BetaPrior, mechanism_bits


@dataclass(frozen=True)
class ConjugateCounts:
    successes: int
    trials: int
    prior: BetaPrior

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise ValueError("need 0 <= successes <= trials")

    @classmethod
    def from_sequence(cls, z: Sequence[int], prior: BetaPrior) -> "ConjugateCounts":
        z = np.asarray(z, dtype=np.int64)
        return cls(int(z.sum()), int(z.size), prior)

    @property
    def alpha_post(self) -> float:
        return self.successes + self.prior.alpha

    @property
    def beta_post(self) -> float:
        return self.trials - self.successes + self.prior.beta


def log_marginal_likelihood(z: Sequence[int], prior: BetaPrior) -> float:
    c = ConjugateCounts.from_sequence(z, prior)
    return float(betaln(c.alpha_post, c.beta_post) - betaln(prior.alpha, prior.beta))


def marginal_likelihood(z: Sequence[int], prior: BetaPrior) -> float:
    """Probability of a specific binary sequence under a Beta-Bernoulli mixture."""
    return float(np.exp(log_marginal_likelihood(z, prior)))


def _binary_lattice(num_positions: int) -> tuple[np.ndarray, np.ndarray]:
    """All 4^N configurations of the canonical block, as ``x`` and ``y`` arrays of shape (4^N, N)."""
    cells = np.array(list(itertools.product((0, 1), repeat=2 * num_positions)), dtype=np.int64)
    return cells[:, 0::2], cells[:, 1::2]


def _lattice_table(num_positions: int, values: np.ndarray) -> JointTable:
    shape = (2,) * (2 * num_positions)
    return JointTable(block_axes(2, num_positions), values.reshape(shape))


def _free_mask(intervention: InterventionSet, var: int, num_positions: int) -> np.ndarray:
    forced = intervention.positions(var)
    return np.array([n not in forced for n in range(num_positions)])


def _consistent(x: np.ndarray, y: np.ndarray, intervention: InterventionSet) -> np.ndarray:
    ok = np.ones(len(x), dtype=bool)
    for (i, n), v in intervention.assignments.items():
        ok &= (x if i == 0 else y)[:, n] == v
    return ok


def _check_bivariate_intervention(intervention: InterventionSet, num_positions: int):
    for i, n in intervention.assignments:
        if i not in (0, 1) or not 0 <= n < num_positions:
            raise ValueError(f"intervention axis {(i, n)} outside the bivariate block")


def analytic_post_interventional(
    graph: Dag | str,
    prior: BetaPrior,
    intervention: InterventionSet | None = None,
    num_positions: int = 2,
) -> JointTable:
    """Exact post-interventional block table from conjugate marginal likelihoods.

    Each mechanism contributes the Beta-Bernoulli marginal likelihood of its
    Bernoulli draws at the positions where it was not replaced by a forced
    value; forced axes become point masses.
    """
    intervention = intervention or InterventionSet()
    _check_bivariate_intervention(intervention, num_positions)
    x, y = _binary_lattice(num_positions)
    bx, by = mechanism_bits(graph, x, y)
    a, b = prior.alpha, prior.beta
    logp = np.zeros(len(x))
    for bits, var in ((bx, 0), (by, 1)):
        free = _free_mask(intervention, var, num_positions)
        m = (bits * free).sum(axis=1)
        n = free.sum()
        logp += betaln(a + m, b + n - m) - betaln(a, b)
    p = np.where(_consistent(x, y, intervention), np.exp(logp), 0.0)
    return _lattice_table(num_positions, p)


def analytic_block_table(graph: Dag | str, prior: BetaPrior, num_positions: int = 2) -> JointTable:
    if 2 * num_positions > 16:
        raise ValueError("at most 8 positions")
    return analytic_post_interventional(graph, prior, InterventionSet(), num_positions)


# --------------------------------------------------------------------------
# quadrature


@lru_cache(maxsize=32)
def _graded_legendre(nodes: int, grading: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on (0, 1) after the substitution ``t = I_u(k, k)``.

    The map is polynomial and flat to order ``k`` at both ends, which turns
    Beta endpoint singularities ``t^(a-1)`` into ``u^(k a - 1)``. Returns
    ``(t, 1 - t, weights)`` with ``1 - t`` computed without cancellation.
    """
    u, w = np.polynomial.legendre.leggauss(nodes)
    u = (u + 1.0) / 2.0
    w = w / 2.0
    k = grading

    def incomplete(s):
        return sum(comb(2 * k - 1, j) * s**j * (1 - s) ** (2 * k - 1 - j) for j in range(k, 2 * k))

    t = incomplete(u)
    t_c = incomplete(1.0 - u)
    dens = np.exp((k - 1) * (np.log(u) + np.log1p(-u)) - betaln(k, k))
    return t, t_c, w * dens


def beta_quadrature(prior: BetaPrior, nodes: int = 64, grading: int = 8) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes ``(t, 1 - t)`` and weights integrating functions against the Beta density.

    The integration window is clipped to 30 standard deviations around the
    mean so that sharply peaked priors are still resolved. Weights are
    normalized numerically; no Beta-function value enters.
    """
    a, b = prior.alpha, prior.beta
    mean = a / (a + b)
    sd = np.sqrt(a * b / ((a + b) ** 2 * (a + b + 1)))
    lo = max(0.0, mean - 30 * sd)
    hi = min(1.0, mean + 30 * sd)
    s, s_c, w = _graded_legendre(nodes, grading)
    t = lo + (hi - lo) * s
    t_c = (1.0 - hi) + (hi - lo) * s_c
    logf = (a - 1) * np.log(t) + (b - 1) * np.log(t_c)
    f = w * (hi - lo) * np.exp(logf - logf.max())
    return t, t_c, f / f.sum()


def _quadrature_table(
    graph: Dag | str,
    prior: BetaPrior,
    intervention: InterventionSet,
    num_positions: int,
    nodes: int,
) -> JointTable:
    if nodes < 16:
        raise ValueError("use at least 16 quadrature nodes")
    _check_bivariate_intervention(intervention, num_positions)
    x, y = _binary_lattice(num_positions)
    bx, by = mechanism_bits(graph, x, y)
    t, t_c, w = beta_quadrature(prior, nodes)
    log_t, log_tc = np.log(t), np.log(t_c)

    def mechanism_likelihood(bits, var):
        # (cells, nodes): product over free positions of t^bit (1-t)^(1-bit)
        free = _free_mask(intervention, var, num_positions)
        m = (bits * free).sum(axis=1)[:, None]
        n = free.sum()
        return np.exp(m * log_t + (n - m) * log_tc)

    lx = mechanism_likelihood(bx, 0)
    ly = mechanism_likelihood(by, 1)
    # tensor grid over (theta, psi)
    p = np.einsum("ca,cb,a,b->c", lx, ly, w, w)
    p = np.where(_consistent(x, y, intervention), p, 0.0)
    return _lattice_table(num_positions, p)


def quadrature_block_table(
    graph: Dag | str, prior: BetaPrior, num_positions: int = 2, nodes: int = 64
) -> JointTable:
    return _quadrature_table(graph, prior, InterventionSet(), num_positions, nodes)


def quadrature_post_interventional(
    graph: Dag | str,
    prior: BetaPrior,
    intervention: InterventionSet,
    num_positions: int = 2,
    nodes: int = 64,
) -> JointTable:
    return _quadrature_table(graph, prior, intervention, num_positions, nodes)


# --------------------------------------------------------------------------
# general discrete ICM processes


def dirichlet_block_table(
    dag: Dag,
    cardinalities: Sequence[int],
    concentration: float,
    num_positions: int,
) -> JointTable:
    """Exact block table of the Dirichlet-categorical ICM process.

    Matches :func:`dofinetti.simulate.sample_icm_general`: each variable has
    an independent symmetric Dirichlet row per parent configuration, so the
    block probability is a product of Dirichlet-multinomial sequence
    probabilities, one per (variable, parent configuration).
    """
    cards = tuple(int(c) for c in cardinalities)
    axes = block_axes(dag.num_vars, num_positions)
    shape = tuple(cards[i] for i, _ in axes)
    cells = np.array(list(itertools.product(*(range(c) for c in shape))), dtype=np.int64)
    vals = cells.reshape(len(cells), num_positions, dag.num_vars)
    logp = np.zeros(len(cells))
    c = concentration
    for i in range(dag.num_vars):
        pa = dag.parents(i)
        if pa:
            ctx = np.ravel_multi_index(tuple(vals[:, :, j] for j in pa), tuple(cards[j] for j in pa))
            n_ctx = int(np.prod([cards[j] for j in pa]))
        else:
            ctx = np.zeros((len(cells), num_positions), dtype=np.int64)
            n_ctx = 1
        for k in range(n_ctx):
            in_ctx = ctx == k
            total = in_ctx.sum(axis=1)
            logp += gammaln(cards[i] * c) - gammaln(cards[i] * c + total)
            for v in range(cards[i]):
                cnt = (in_ctx & (vals[:, :, i] == v)).sum(axis=1)
                logp += gammaln(c + cnt) - gammaln(c)
    return JointTable(axes, np.exp(logp).reshape(shape))
