"""Deterministic local strategies and factorized probability constructions.

These are the classical side of every inequality here: exhaustive
enumeration for CHSH, and per-hidden-state factorized detection
probabilities for the time-bin statistic, whose mixtures realize every
local model the statistic is bounded against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from collections.abc import Sequence

from .inequalities import CHSH_SIGNS, chsh_value, k_statistic_from_probs
from .tables import CountTable, TriCountTable


@dataclass(frozen=True)
class LhvStrategy:
    """Deterministic outcome assignment (+1/-1) per setting, both sides."""

    a: tuple[int, int]
    b: tuple[int, int]

    def __post_init__(self) -> None:
        for v in self.a + self.b:
            if v not in (-1, 1):
                raise ValueError("outcomes must be +1 or -1")

    def correlator(self, x: int, y: int) -> float:
        return float(self.a[x] * self.b[y])

    def count_table(self, trials_per_cell: int = 1) -> CountTable:
        """Exact counts this strategy would produce (outcome +1 -> bit 0)."""
        table = CountTable()
        for x in (0, 1):
            for y in (0, 1):
                a_bit = 0 if self.a[x] == 1 else 1
                b_bit = 0 if self.b[y] == 1 else 1
                table.add(x, y, a_bit, b_bit, trials_per_cell)
        return table


def all_strategies() -> list[LhvStrategy]:
    outs = list(itertools.product((-1, 1), repeat=2))
    return [LhvStrategy(a=a, b=b) for a in outs for b in outs]


def chsh_of_strategy(strategy: LhvStrategy, signs: Sequence[int] = CHSH_SIGNS) -> float:
    corrs = [strategy.correlator(x, y) for x in (0, 1) for y in (0, 1)]
    return chsh_value(corrs, signs)


def enumerate_deterministic_chsh(
    signs: Sequence[int] = CHSH_SIGNS,
) -> tuple[float, list[LhvStrategy]]:
    """Exact CHSH value over all 16 deterministic strategies.

    Returns the maximum (2 for any proper sign pattern) and the
    strategies achieving it.
    """
    best = float("-inf")
    argmax: list[LhvStrategy] = []
    for strategy in all_strategies():
        s = chsh_of_strategy(strategy, signs)
        if s > best + 1e-12:
            best = s
            argmax = [strategy]
        elif abs(s - best) <= 1e-12:
            argmax.append(strategy)
    return best, argmax


def product_tri_table(
    a: tuple[int, int], b: tuple[int, int], c: tuple[int, int],
    trials_per_cell: int = 1,
) -> TriCountTable:
    """Tripartite counts from a product of three deterministic strategies."""
    tri = TriCountTable()
    for x in (0, 1):
        for y in (0, 1):
            for z in (0, 1):
                bits = tuple(0 if s[i] == 1 else 1 for s, i in ((a, x), (b, y), (c, z)))
                tri.add(x, y, z, *bits, n=trials_per_cell)
    return tri


def timebin_bracket(p_a: float, p_b: float, p_ap: float, p_bp: float) -> float:
    """Per-hidden-state, per-bin bracket of the time-bin statistic.

    For detection probabilities in [0, 1] this is never positive, which
    is exactly why the statistic is classically bounded by zero:

        p_a*p_b - p_ap*p_bp - p_b + p_b*p_ap - p_a + p_a*p_bp
    """
    return (
        p_a * p_b - p_ap * p_bp - p_b + p_b * p_ap - p_a + p_a * p_bp
    )


def factorized_timebin_probs(
    bins_a: Sequence[Sequence[float]],
    bins_b: Sequence[Sequence[float]],
) -> tuple[float, float, float, float, float, float]:
    """Six term probabilities of a factorized (local) detection model.

    ``bins_a[s][i]`` is the probability that the left side detects in
    bin i (i >= 1; index 0 is no detection) under setting s, for one
    hidden state.  Settings order: 0 = unprimed, 1 = primed.
    """
    pa, pap = bins_a
    pb, pbp = bins_b
    n = len(pa) - 1
    for dist in (pa, pap, pb, pbp):
        if len(dist) != n + 1:
            raise ValueError("all distributions need the same bin count")
        if any(v < 0 for v in dist) or abs(sum(dist) - 1.0) > 1e-9:
            raise ValueError("index 0 must absorb the no-detection mass; "
                             "each distribution must sum to 1")

    t1 = sum(pa[i] * pb[i] for i in range(1, n + 1))
    t2 = sum(pap[i] * pbp[i] for i in range(1, n + 1))
    t3 = sum(pap[0] * pb[i] for i in range(1, n + 1))
    t4 = sum(
        pap[j] * pb[i]
        for i in range(1, n + 1) for j in range(1, n + 1) if j != i
    )
    t5 = sum(pa[i] * pbp[0] for i in range(1, n + 1))
    t6 = sum(
        pa[i] * pbp[j]
        for i in range(1, n + 1) for j in range(1, n + 1) if j != i
    )
    return (t1, t2, t3, t4, t5, t6)


def mix_timebin_probs(
    weights: Sequence[float],
    components: Sequence[tuple[float, float, float, float, float, float]],
) -> tuple[float, ...]:
    """Convex mixture of per-hidden-state term probabilities."""
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError("weights must sum to 1")
    return tuple(
        sum(w * comp[i] for w, comp in zip(weights, components)) for i in range(6)
    )


def factorized_k(
    bins_a: Sequence[Sequence[float]], bins_b: Sequence[Sequence[float]]
) -> float:
    """Time-bin statistic of a single factorized hidden state (always <= 0)."""
    return k_statistic_from_probs(factorized_timebin_probs(bins_a, bins_b))
