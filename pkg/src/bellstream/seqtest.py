"""Pre-registered hypothesis-test protocol for the time-bin statistic.

A training prefix of the trial stream estimates the rate of relevant
events; the stopping point is set to 90% of the estimated remaining
events, and the p-value comes from a binomial tail: under a local model
with equiprobable settings, a relevant event lands in the positive term
with probability at most 1/2.

The binomial null is only valid when the four settings pairs really are
equiprobable, so the protocol first checks the observed settings
distribution and refuses (p = 1 with a warning) when it deviates beyond
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections.abc import Mapping, Sequence

TRAIN_FRACTION = 0.05
CUT_FRACTION = 0.9
BIAS_TOLERANCE = 0.002


@dataclass(frozen=True)
class RelevantEvent:
    trial_index: int
    plus: bool  # True when the event feeds the positive term


@dataclass(frozen=True)
class HypothesisReport:
    p_value: float
    n_cut: int
    bias_warning: bool
    n_plus: int = 0
    max_setting_deviation: float = 0.0


def _log_pmf(j: int, n: int, p: float) -> float:
    return (
        math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)
        + j * math.log(p) + (n - j) * math.log1p(-p)
    )


def _sum_tail(start: int, n: int, p: float, step: int) -> float:
    """Sum binomial pmf terms from ``start`` outward in direction ``step``.

    The anchor term must be the largest of the summed range, so the
    running total never overflows the log-space rescaling.
    """
    scale = _log_pmf(start, n, p)
    if scale < -745.0:
        return 0.0
    ratio_log = math.log(p) - math.log1p(-p)
    log_term = scale
    total = 0.0
    j = start
    while 0 <= j <= n:
        total += math.exp(log_term - scale)
        nxt = j + step
        if not 0 <= nxt <= n:
            break
        if step > 0:
            log_term += math.log(n - j) - math.log(j + 1) + ratio_log
        else:
            log_term += math.log(j) - math.log(n - j + 1) - ratio_log
        if log_term - scale < -745.0:
            break
        j = nxt
    return math.exp(scale) * total


def binom_sf(k: int, n: int, p: float = 0.5) -> float:
    """P[X >= k] for X ~ Binomial(n, p), exact in log space.

    Above the mean the upper tail is summed directly; below it the lower
    tail is summed and complemented, so terms always decrease away from
    the anchor.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    if k > n * p:
        return min(1.0, _sum_tail(k, n, p, +1))
    return min(1.0, max(0.0, 1.0 - _sum_tail(k - 1, n, p, -1)))


def settings_deviation(setting_freqs: Mapping[tuple[int, int], float] | Sequence[float]) -> float:
    """Largest absolute deviation of the four settings frequencies from 1/4."""
    if isinstance(setting_freqs, Mapping):
        freqs = [setting_freqs.get((x, y), 0.0) for x in (0, 1) for y in (0, 1)]
    else:
        freqs = list(setting_freqs)
    if len(freqs) != 4:
        raise ValueError("need frequencies for the four settings pairs")
    total = sum(freqs)
    if total <= 0:
        raise ValueError("settings frequencies must sum to a positive value")
    return max(abs(f / total - 0.25) for f in freqs)


def hypothesis_test(
    events: Sequence[RelevantEvent],
    n_trials: int,
    setting_freqs,
    *,
    train_fraction: float = TRAIN_FRACTION,
    cut_fraction: float = CUT_FRACTION,
    bias_tolerance: float = BIAS_TOLERANCE,
) -> HypothesisReport:
    """Run the pre-registered stopping-rule test over an ordered event stream.

    ``events`` holds the relevant events in trial order with their term
    polarity; ``n_trials`` is the total number of trials the stream spans.
    """
    deviation = settings_deviation(setting_freqs)
    if deviation > bias_tolerance:
        return HypothesisReport(
            p_value=1.0, n_cut=0, bias_warning=True,
            max_setting_deviation=deviation,
        )

    train_trials = int(n_trials * train_fraction)
    train = [ev for ev in events if ev.trial_index < train_trials]
    test = [ev for ev in events if ev.trial_index >= train_trials]
    if not train:
        raise ValueError("no relevant events in the training segment")
    rate = len(train) / train_trials
    est_remaining = rate * (n_trials - train_trials)
    n_cut = int(cut_fraction * est_remaining)
    if n_cut < 1:
        raise ValueError("stopping point below one event; stream too short")
    if len(test) < n_cut:
        raise ValueError(
            f"stream ended with {len(test)} relevant events, needed {n_cut}"
        )
    selected = test[:n_cut]
    n_plus = sum(1 for ev in selected if ev.plus)
    p_value = binom_sf(n_plus, n_cut, 0.5)
    return HypothesisReport(
        p_value=p_value, n_cut=n_cut, bias_warning=False,
        n_plus=n_plus, max_setting_deviation=deviation,
    )
