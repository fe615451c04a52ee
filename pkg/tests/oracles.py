"""Slow, loop-based reference computations kept independent of the package internals."""

import itertools
import math

import numpy as np
from scipy import integrate, stats

from dofinetti.core import JointTable


def cells(table: JointTable):
    for config in itertools.product(*(range(c) for c in table.cards)):
        yield dict(zip(table.axes, config)), float(table.probs[config])


def prob(table: JointTable, event: dict) -> float:
    """P(event) by summing matching cells."""
    return sum(p for cfg, p in cells(table) if all(cfg[a] == v for a, v in event.items()))


def brute_truncated_factorization(table: JointTable, dag, intervention) -> dict:
    """Evaluate the exchangeable truncated factorization cell by cell.

    Returns ``{config tuple in table.axes order: probability}``.
    """
    N = 1 + max(n for _, n in table.axes)
    out = {}
    for cfg, _ in cells(table):
        if any(cfg[a] != v for a, v in intervention.assignments.items()):
            out[tuple(cfg[a] for a in table.axes)] = 0.0
            continue
        value = 1.0
        for i in range(dag.num_vars):
            free = [n for n in range(N) if (i, n) not in intervention.assignments]
            if not free:
                continue
            child = {(i, n): cfg[(i, n)] for n in free}
            parents = {(j, n): cfg[(j, n)] for j in dag.parents(i) for n in free}
            denom = prob(table, parents)
            value *= prob(table, {**child, **parents}) / denom if denom > 0 else float("nan")
            if value == 0:
                break
        out[tuple(cfg[a] for a in table.axes)] = value
    return out


def beta_bernoulli_sequence_prob(bits, a, b) -> float:
    """P(bits) = int t^m (1-t)^(n-m) Beta(t; a, b) dt by adaptive quadrature."""
    m, n = int(sum(bits)), len(bits)
    val, _ = integrate.quad(lambda t: t**m * (1 - t) ** (n - m) * stats.beta.pdf(t, a, b), 0, 1,
                            epsabs=1e-14, epsrel=1e-12, limit=200)
    return val


def urn_sequence_prob(xs, ys, a: int, b: int) -> float:
    """Probability of an urn outcome sequence by stepping through the draws with exact fractions."""
    from fractions import Fraction

    lb, lt, rb, rt = a, a + b, a, a + b
    p = Fraction(1)
    for x, y in zip(xs, ys):
        z = x ^ y
        p *= Fraction(lb if x else lt - lb, lt)
        p *= Fraction(rb if z else rt - rb, rt)
        lb += x
        rb += z
        lt += 1
        rt += 1
    return float(p)


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n)
