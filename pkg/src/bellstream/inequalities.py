"""Inequality evaluations over count tables, with standard errors.

All functions are pure; standard errors assume independent, identically
distributed trials with per-cell multinomial counting statistics,
combined in quadrature.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence

from .tables import BellResult, CountTable, NoDataError, ShapeError, TimeBinCounts, TriCountTable

CHSH_BOUND = 2.0
STEERING_BOUND_16 = 0.511
BILOCALITY_BOUND = 1.0
TIMEBIN_BOUND = 0.0

# Standard CHSH sign pattern over settings (0,0), (0,1), (1,0), (1,1).
CHSH_SIGNS = (1, 1, 1, -1)

ProbAccessor = Callable[[int, int, int, int], float]


def sigma(value: float, bound: float, stderr: float) -> float:
    """Number of standard deviations by which ``value`` exceeds ``bound``."""
    if stderr <= 0:
        raise ValueError("stderr must be > 0")
    return (value - bound) / stderr


def correlator(table: CountTable, x: int, y: int) -> float:
    """E(x,y) = sum((-1)^(a+b) N(a,b|x,y)) / trials(x,y)."""
    n = table.trials(x, y)
    if n == 0:
        raise NoDataError(f"no trials recorded at settings ({x},{y})")
    total = 0
    for a in (0, 1):
        for b in (0, 1):
            total += (-1) ** (a + b) * table.count(x, y, a, b)
    return total / n


def correlator_stderr(table: CountTable, x: int, y: int) -> float:
    """Multinomial standard error of E(x,y): sqrt((1 - E^2) / N)."""
    n = table.trials(x, y)
    if n == 0:
        raise NoDataError(f"no trials recorded at settings ({x},{y})")
    e = correlator(table, x, y)
    return math.sqrt(max(0.0, 1.0 - e * e) / n)


def chsh_value(correlators: Sequence[float], signs: Sequence[int] = CHSH_SIGNS) -> float:
    """Signed sum of four correlators ordered (0,0), (0,1), (1,0), (1,1)."""
    if len(correlators) != 4 or len(signs) != 4:
        raise ShapeError("CHSH needs exactly four correlators and four signs")
    return sum(s * e for s, e in zip(signs, correlators))


def chsh(table: CountTable, signs: Sequence[int] = CHSH_SIGNS) -> BellResult:
    """CHSH combination of the four correlators of a 2x2 settings table."""
    if table.n_settings_a != 2 or table.n_settings_b != 2:
        raise ShapeError("CHSH requires 2x2 settings")
    cells = [(x, y) for x in (0, 1) for y in (0, 1)]
    corrs = [correlator(table, x, y) for x, y in cells]
    value = chsh_value(corrs, signs)
    var = sum(correlator_stderr(table, x, y) ** 2 for x, y in cells)
    return BellResult.from_error(value, CHSH_BOUND, math.sqrt(var))


def steering_s16(
    correlators: Sequence[float],
    stderrs: Sequence[float] | None = None,
) -> BellResult:
    """Mean of sixteen conditioned correlators against the steering bound.

    Per-correlator standard errors, when supplied, combine in quadrature;
    without them the result carries stderr 0.
    """
    if len(correlators) != 16:
        raise ShapeError(f"steering needs 16 correlators, got {len(correlators)}")
    for e in correlators:
        if not -1.0 <= e <= 1.0:
            raise ValueError(f"correlator {e} outside [-1, 1]")
    value = sum(correlators) / 16
    if stderrs is None:
        err = 0.0
    else:
        if len(stderrs) != 16:
            raise ShapeError("need 16 stderrs")
        err = math.sqrt(sum(s * s for s in stderrs)) / 16
    return BellResult.from_error(value, STEERING_BOUND_16, err)


def steering_s16_from_table(table: CountTable) -> BellResult:
    """Steering statistic from a 16x16 table, using the diagonal cells."""
    if table.n_settings_a != 16 or table.n_settings_b != 16:
        raise ShapeError("steering table requires 16 settings per side")
    corrs = [correlator(table, k, k) for k in range(16)]
    errs = [correlator_stderr(table, k, k) for k in range(16)]
    return steering_s16(corrs, errs)


def tri_correlator(tri: TriCountTable, x: int, y: int, z: int) -> float:
    """<A_x B_y C_z> = sum((-1)^(a+b+c) N(abc|xyz)) / trials(xyz)."""
    n = tri.trials(x, y, z)
    if n == 0:
        raise NoDataError(f"no trials recorded at settings ({x},{y},{z})")
    total = 0
    for a in (0, 1):
        for b in (0, 1):
            for c in (0, 1):
                total += (-1) ** (a + b + c) * tri.count(x, y, z, a, b, c)
    return total / n


def _tri_correlator_var(tri: TriCountTable, x: int, y: int, z: int) -> float:
    n = tri.trials(x, y, z)
    e = tri_correlator(tri, x, y, z)
    return max(0.0, 1.0 - e * e) / n


def bilocality(tri: TriCountTable) -> BellResult:
    """Bilocality statistic B = sqrt|I| + sqrt|J| with bound 1.

    I averages the tripartite correlators at the middle party's setting 0,
    J the alternating-sign combination at setting 1.
    """
    i_val = sum(tri_correlator(tri, x, 0, z) for x in (0, 1) for z in (0, 1)) / 4
    j_val = sum(
        (-1) ** (x + z) * tri_correlator(tri, x, 1, z) for x in (0, 1) for z in (0, 1)
    ) / 4
    value = math.sqrt(abs(i_val)) + math.sqrt(abs(j_val))

    var_i = sum(_tri_correlator_var(tri, x, 0, z) for x in (0, 1) for z in (0, 1)) / 16
    var_j = sum(_tri_correlator_var(tri, x, 1, z) for x in (0, 1) for z in (0, 1)) / 16
    # dB/dI = 1 / (2 sqrt|I|); degenerate at I = 0, where the stderr blows up.
    var = 0.0
    for term, term_var in ((i_val, var_i), (j_val, var_j)):
        mag = abs(term)
        if term_var == 0.0:
            continue
        if mag == 0.0:
            return BellResult.from_error(value, BILOCALITY_BOUND, float("inf"))
        var += term_var / (4 * mag)
    return BellResult.from_error(value, BILOCALITY_BOUND, math.sqrt(var))


def bilocality_value(i_val: float, j_val: float) -> float:
    return math.sqrt(abs(i_val)) + math.sqrt(abs(j_val))


def mdl_threshold_from_chsh(s: float) -> float:
    """Measurement-dependence level below which a relaxed-freedom local
    model could still reach the CHSH value ``s``.

    The maximal CHSH value reachable at dependence level I is 4(1 - 2I);
    solving for equality gives I* = (4 - S) / 8.
    """
    if not 0.0 <= s <= 4.0:
        raise ValueError("CHSH value must lie in [0, 4]")
    return (4.0 - s) / 8.0


def _as_accessor(p) -> ProbAccessor:
    if callable(p):
        return p
    if isinstance(p, Mapping):
        return lambda a, b, x, y: p[(a, b, x, y)]
    if isinstance(p, CountTable):
        return p.prob
    raise TypeError("need a callable, mapping, or CountTable")


def mdl_inequality(p, level: float) -> float:
    """Left-hand side of the measurement-dependent locality inequality.

    ``p`` exposes conditional probabilities P(ab|xy) indexed (a, b, x, y);
    positive return values mean no local model with setting-choice
    dependence bounded below by ``level`` can reproduce the data.
    """
    if not 0.0 <= level <= 0.25:
        raise ValueError("dependence level must lie in [0, 1/4]")
    acc = _as_accessor(p)
    p0000 = acc(0, 0, 0, 0)
    q = acc(0, 1, 0, 1) + acc(1, 0, 1, 0) + acc(0, 0, 1, 1)
    return level * p0000 - (1.0 - 3.0 * level) * q


def mdl_i0(p, trials: Mapping[tuple[int, int], int] | None = None) -> BellResult:
    """Boundary dependence level I0 at which the MDL inequality sits at zero.

    Setting the left-hand side I*P - (1-3I)*Q to zero and solving for I
    gives I0 = Q / (P + 3Q): the minimum setting-choice dependence a
    relaxed local model would need to explain the data.  Larger I0 means
    a harder-to-explain violation.  ``trials`` (per settings pair) enables
    binomial error propagation; bound is reported as 0 since any positive
    I0 certifies nonclassicality under full measurement independence.
    """
    acc = _as_accessor(p)
    p0000 = acc(0, 0, 0, 0)
    q_parts = [acc(0, 1, 0, 1), acc(1, 0, 1, 0), acc(0, 0, 1, 1)]
    q = sum(q_parts)
    denom = p0000 + 3.0 * q
    if denom <= 0.0:
        raise NoDataError("all referenced probabilities are zero")
    value = q / denom
    err = 0.0
    if trials is not None:
        # I0 = Q/(P+3Q): dI0/dP = -Q/denom^2, dI0/dQ = P/denom^2.
        var_p = p0000 * (1 - p0000) / trials[(0, 0)]
        var_q = 0.0
        for prob, key in zip(q_parts, [(0, 1), (1, 0), (1, 1)]):
            var_q += prob * (1 - prob) / trials[key]
        var = (q / denom**2) ** 2 * var_p + (p0000 / denom**2) ** 2 * var_q
        err = math.sqrt(var)
    return BellResult.from_error(value, 0.0, err)


def k_statistic_from_probs(probs: Sequence[float]) -> float:
    """Time-bin CH statistic from the six per-setting term probabilities."""
    if len(probs) != 6:
        raise ShapeError("need six term probabilities")
    p1, p2, p3, p4, p5, p6 = probs
    return p1 - p2 - p3 - p4 - p5 - p6


def k_statistic(t: TimeBinCounts) -> BellResult:
    """Time-bin CH statistic K with binomial error propagation, bound 0.

    Each term is events/trials at its settings pair; the first (same-bin
    coincidences at the unprimed settings) enters positively, the other
    five negatively.
    """
    if any(n == 0 for n in t.trials):
        raise NoDataError("every term needs a positive trial count")
    probs = [e / n for e, n in zip(t.events, t.trials)]
    value = k_statistic_from_probs(probs)
    var = sum(p * (1 - p) / n for p, n in zip(probs, t.trials))
    return BellResult.from_error(value, TIMEBIN_BOUND, math.sqrt(var))


def bias_stats(bits) -> dict[str, float]:
    """Zero-fraction and adjacent-alternation fraction of a bit sequence."""
    seq = [int(b) for b in bits]
    if not seq:
        raise ValueError("empty input")
    p0 = seq.count(0) / len(seq)
    if len(seq) < 2:
        raise ValueError("alternation needs at least two bits")
    diffs = sum(1 for u, v in zip(seq, seq[1:]) if u != v)
    return {"p0": p0, "alternation": diffs / (len(seq) - 1)}
