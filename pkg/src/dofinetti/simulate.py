"""Samplers for ICM generative processes and the causal Polya urn."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from .core import BIVARIATE_GRAPHS, Dag, ExchangeableDataset, bivariate_name

Seed = int | Sequence[int]


def make_rng(seed: Seed) -> np.random.Generator:
    """Counter-based (Philox) generator; a tuple seed ``(master, *path)`` names a sub-stream."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (int, np.integer)):
        ss = np.random.SeedSequence(int(seed))
    else:
        master, *path = (int(s) for s in seed)
        ss = np.random.SeedSequence(master, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class BetaPrior:
    alpha: float = 1.0
    beta: float = 3.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"Beta prior needs positive parameters, got {self.alpha}, {self.beta}")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def integer_params(self) -> tuple[int, int]:
        a, b = self.alpha, self.beta
        if a != int(a) or b != int(b):
            raise ValueError("the urn needs integer alpha and beta")
        return int(a), int(b)


# --------------------------------------------------------------------------
# ICM samplers


def mechanism_bits(graph: Dag | str, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bernoulli draws of the X- and Y-mechanisms that produce ``(x, y)`` under a bivariate graph.

    Each mechanism is ``Ber(param) XOR parents``, so the bits are recovered
    by xor-ing the parent back out.
    """
    name = graph if isinstance(graph, str) else bivariate_name(graph)
    if name == "X->Y":
        return x, x ^ y
    if name == "Y->X":
        return x ^ y, y
    if name == "X|Y":
        return x, y
    raise ValueError(f"not a bivariate graph: {graph}")


def sample_icm_bivariate(
    graph: Dag | str,
    prior: BetaPrior,
    num_envs: int,
    num_positions: int,
    seed: Seed,
) -> ExchangeableDataset:
    """XOR Beta-Bernoulli process: one ``(theta, psi)`` per environment, positions i.i.d. given them."""
    name = graph if isinstance(graph, str) else bivariate_name(graph)
    if name not in BIVARIATE_GRAPHS:
        raise ValueError(f"not a bivariate graph: {graph}")
    if num_envs < 1 or num_positions < 1:
        raise ValueError("need at least one environment and one position")
    rng = make_rng(seed)
    theta = rng.beta(prior.alpha, prior.beta, size=num_envs)
    psi = rng.beta(prior.alpha, prior.beta, size=num_envs)
    u = (rng.random((num_envs, num_positions)) < theta[:, None]).astype(np.int64)
    v = (rng.random((num_envs, num_positions)) < psi[:, None]).astype(np.int64)
    if name == "X->Y":
        x, y = u, v ^ u
    elif name == "Y->X":
        y = v
        x = u ^ y
    else:
        x, y = u, v
    return ExchangeableDataset(np.stack([x, y], axis=-1), (2, 2))


def sample_icm_general(
    dag: Dag,
    cardinalities: Sequence[int],
    dirichlet_concentration: float = 1.0,
    num_envs: int = 1000,
    num_positions: int = 2,
    seed: Seed = 0,
) -> ExchangeableDataset:
    """Dirichlet-categorical ICM process.

    Every environment draws, for each variable and each parent configuration,
    an independent conditional row from a symmetric Dirichlet. Positions are
    then sampled i.i.d. given those rows, in topological order.
    """
    cards = tuple(int(c) for c in cardinalities)
    if len(cards) != dag.num_vars or min(cards) < 2:
        raise ValueError("need one cardinality >= 2 per variable")
    rng = make_rng(seed)
    values = np.zeros((num_envs, num_positions, dag.num_vars), dtype=np.int64)
    for i in dag.topological_order():
        pa = dag.parents(i)
        n_ctx = int(np.prod([cards[j] for j in pa])) if pa else 1
        rows = rng.dirichlet(np.full(cards[i], dirichlet_concentration), size=(num_envs, n_ctx))
        if pa:
            ctx = np.ravel_multi_index(tuple(values[:, :, j] for j in pa), tuple(cards[j] for j in pa))
        else:
            ctx = np.zeros((num_envs, num_positions), dtype=np.int64)
        probs = rows[np.arange(num_envs)[:, None], ctx]  # (E, N, card)
        cdf = np.cumsum(probs, axis=-1)
        u = rng.random((num_envs, num_positions, 1))
        values[:, :, i] = np.minimum((u > cdf).sum(axis=-1), cards[i] - 1)
    return ExchangeableDataset(values, cards)


# --------------------------------------------------------------------------
# causal Polya urn
#
# Colour convention: value 1 is "black". The left compartment starts with
# alpha black and beta white balls, so P(X_1 = 1) = alpha / (alpha + beta),
# and likewise on the right for Z = X xor Y. This is the convention under
# which the closed-form joint probability below holds.


@dataclass(frozen=True)
class UrnState:
    step: int
    left_black: int
    left_white: int
    right_black: int
    right_white: int

    @classmethod
    def initial(cls, prior: BetaPrior) -> "UrnState":
        a, b = prior.integer_params()
        return cls(0, a, b, a, b)

    @property
    def left_total(self) -> int:
        return self.left_black + self.left_white

    @property
    def right_total(self) -> int:
        return self.right_black + self.right_white

    def observe(self, x: int, y: int) -> "UrnState":
        """State after one step whose observables were ``(x, y)``."""
        z = x ^ y
        return UrnState(
            self.step + 1,
            self.left_black + x,
            self.left_white + 1 - x,
            self.right_black + z,
            self.right_white + 1 - z,
        )

    @classmethod
    def after_history(cls, prior: BetaPrior, xs: Sequence[int], ys: Sequence[int]) -> "UrnState":
        state = cls.initial(prior)
        for x, y in zip(xs, ys):
            state = state.observe(int(x), int(y))
        return state


@dataclass(frozen=True, eq=False)
class UrnTrace:
    xs: np.ndarray
    ys: np.ndarray
    zs: np.ndarray
    interventions: Mapping[int, int] = field(default_factory=dict)
    states: tuple[UrnState, ...] = ()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "x", "y", "z", "intervened",
                        "left_black", "left_white", "right_black", "right_white"])
            for n in range(len(self.xs)):
                s = self.states[n + 1]
                w.writerow([n, int(self.xs[n]), int(self.ys[n]), int(self.zs[n]),
                            int(n in self.interventions),
                            s.left_black, s.left_white, s.right_black, s.right_white])


def polya_urn_sample(
    prior: BetaPrior,
    n_steps: int,
    n_runs: int,
    interventions: Mapping[int, int] | None = None,
    seed: Seed = 0,
    initial: UrnState | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Run ``n_runs`` independent urns in lockstep; returns ``(xs, ys)`` of shape ``(n_runs, n_steps)``.

    An intervention at step ``n`` replaces the left ball by one of the forced
    colour before ``Y_n`` is read out; replacement then uses the forced colour.
    """
    interventions = dict(interventions or {})
    if any(not 0 <= n < n_steps for n in interventions):
        raise ValueError("intervention position outside the run")
    state = initial or UrnState.initial(prior)
    rng = make_rng(seed)
    lb = np.full(n_runs, state.left_black, dtype=np.int64)
    lt = np.full(n_runs, state.left_total, dtype=np.int64)
    rb = np.full(n_runs, state.right_black, dtype=np.int64)
    rt = np.full(n_runs, state.right_total, dtype=np.int64)
    xs = np.empty((n_runs, n_steps), dtype=np.int64)
    ys = np.empty((n_runs, n_steps), dtype=np.int64)
    for n in range(n_steps):
        u = rng.random((2, n_runs))
        left = (u[0] * lt < lb).astype(np.int64)
        right = (u[1] * rt < rb).astype(np.int64)
        x = np.full(n_runs, interventions[n], dtype=np.int64) if n in interventions else left
        y = x ^ right
        xs[:, n], ys[:, n] = x, y
        lb += x
        rb += right
        lt += 1
        rt += 1
    return xs, ys


def polya_urn_run(
    prior: BetaPrior,
    n_steps: int,
    interventions: Mapping[int, int] | None = None,
    seed: Seed = 0,
    initial: UrnState | None = None,
) -> UrnTrace:
    interventions = {int(k): int(v) for k, v in (interventions or {}).items()}
    xs, ys = polya_urn_sample(prior, n_steps, 1, interventions, seed, initial)
    xs, ys = xs[0], ys[0]
    states = [initial or UrnState.initial(prior)]
    for x, y in zip(xs, ys):
        states.append(states[-1].observe(int(x), int(y)))
    return UrnTrace(xs, ys, xs ^ ys, interventions, tuple(states))


def _log_rising(a: float, k: int) -> float:
    # log of a (a+1) ... (a+k-1)
    return gammaln(a + k) - gammaln(a)


def polya_joint_log_prob(xs: Sequence[int], ys: Sequence[int], prior: BetaPrior) -> float:
    """Log-probability of an unintervened urn outcome sequence.

    Depends on the sequence only through ``n``, ``#{x=1}`` and ``#{z=1}``.
    """
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    if xs.shape != ys.shape or xs.ndim != 1 or len(xs) < 1:
        raise ValueError("need two equal-length, nonempty sequences")
    n = len(xs)
    a, b = prior.alpha, prior.beta
    m1 = int(xs.sum())
    m2 = int((xs ^ ys).sum())
    num = _log_rising(a, m1) + _log_rising(b, n - m1) + _log_rising(a, m2) + _log_rising(b, n - m2)
    return float(num - 2 * _log_rising(a + b, n))
