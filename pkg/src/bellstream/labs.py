"""Simulated lab processes: consume setting bits, emit trial outcomes.

Each lab kind maps a fixed number of bits per trial to measurement
settings, samples outcomes from its quantum model, and accumulates the
count structure its inequality needs.  A slow per-trial path records a
full trial trace; a vectorized path handles multi-million-trial runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .quantum import BlochPairModel, PolarizationPairModel, nonmax_pair_model, singlet_model
from .seqtest import RelevantEvent
from .sources import BitSource
from .tables import CountTable, TimeBinCounts, TriCountTable

BITS_PER_TRIAL = {"chsh": 2, "steering": 8, "bilocal": 3, "timebin": 2, "mdl": 2}

TIMEBIN_N_BINS = 15
TIMEBIN_PAIR_PROB = 0.002

# Non-maximal polarization state and analyzer angles (degrees) used by
# the high-efficiency time-bin lab.
TIMEBIN_STATE = (0.982, 0.191)
TIMEBIN_ANGLES_A = (-3.7, 23.6)
TIMEBIN_ANGLES_B = (3.7, -23.6)
TIMEBIN_ETA = 0.90


@dataclass(frozen=True)
class LabSpec:
    lab_id: str
    kind: str
    rate: int = 1000  # bits per distribution interval
    burst: bool = False
    visibility: float = 1.0
    eta: float = 1.0
    pair_prob: float = TIMEBIN_PAIR_PROB
    seed: int = 0
    angles_a_deg: tuple[float, ...] | None = None  # per-setting analyzer angles
    angles_b_deg: tuple[float, ...] | None = None
    trace_path: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in BITS_PER_TRIAL:
            raise ValueError(f"unknown lab kind {self.kind!r}")
        if self.rate < 0:
            raise ValueError("rate must be >= 0")

    @property
    def bits_per_trial(self) -> int:
        return BITS_PER_TRIAL[self.kind]


@dataclass(frozen=True)
class TrialRecord:
    lab_id: str
    trial_index: int
    settings: tuple[int, ...]
    outcomes: tuple[int | None, ...]
    bin: int | None = None
    bit_ids: tuple[int, ...] = ()

    def to_json(self) -> str:
        return json.dumps(
            {
                "lab": self.lab_id,
                "trial": self.trial_index,
                "settings": list(self.settings),
                "outcomes": [o for o in self.outcomes],
                "bin": self.bin,
                "bits": list(self.bit_ids),
            },
            separators=(",", ":"),
        )


@dataclass
class LabRunReport:
    spec: LabSpec
    counts: object
    trials: int
    bits_consumed: int
    starved: bool = False
    setting_counts: dict = field(default_factory=dict)
    events: list[RelevantEvent] = field(default_factory=list)


def default_model(spec: LabSpec):
    """Model instance for a lab kind at the spec's visibility/efficiency.

    Angle overrides are in degrees; omitted angles fall back to each
    kind's built-in optimum.
    """
    def deg(override, fallback_deg):
        src = override if override is not None else fallback_deg
        return tuple(math.radians(v) for v in src)

    if spec.kind == "chsh":
        fallback_a = tuple(math.degrees(v) for v in singlet_model().angles_a)
        fallback_b = tuple(math.degrees(v) for v in singlet_model().angles_b)
        return BlochPairModel(
            angles_a=deg(spec.angles_a_deg, fallback_a),
            angles_b=deg(spec.angles_b_deg, fallback_b),
            anticorrelated=True,
            visibility=spec.visibility, eta_a=spec.eta, eta_b=spec.eta,
        )
    if spec.kind == "steering":
        fallback = tuple(k * 180.0 / 8 for k in range(16))
        return BlochPairModel(
            angles_a=deg(spec.angles_a_deg, fallback),
            angles_b=deg(spec.angles_b_deg, fallback),
            anticorrelated=False,
            visibility=spec.visibility, eta_a=spec.eta, eta_b=spec.eta,
        )
    if spec.kind == "timebin":
        return nonmax_pair_model(
            *TIMEBIN_STATE,
            spec.angles_a_deg or TIMEBIN_ANGLES_A,
            spec.angles_b_deg or TIMEBIN_ANGLES_B,
            visibility=spec.visibility, eta=spec.eta,
        )
    if spec.kind == "bilocal":
        return TwoSourceModel(visibility=spec.visibility)
    if spec.kind == "mdl":
        return nonmax_pair_model(
            *MDL_STATE,
            spec.angles_a_deg or MDL_ANGLES_A,
            spec.angles_b_deg or MDL_ANGLES_B,
            basis="crossed", visibility=spec.visibility, eta=spec.eta,
        )
    raise ValueError(spec.kind)


# Non-maximal crossed-basis state for the measurement-dependence lab.
# Angles put the exact boundary dependence level near 0.108 while keeping
# P(00|00) large enough for decent counting statistics.
MDL_STATE = (math.cos(math.radians(69.1)), math.sin(math.radians(69.1)))
MDL_ANGLES_A = (0.0, 45.0)
MDL_ANGLES_B = (75.0, 105.0)


@dataclass(frozen=True)
class TwoSourceModel:
    """Tripartite outcome model for two independent entangled sources.

    Only the full three-party correlator survives: at the middle
    setting 0 it is constant, at setting 1 it alternates sign with the
    outer settings, which is the pattern that maximizes the bilocality
    statistic (sqrt(2) * visibility at unit strength).
    """

    visibility: float = 1.0

    def correlator(self, x: int, y: int, z: int) -> float:
        e = self.visibility ** 2 / 2.0
        return e if y == 0 else (-1) ** (x + z) * e

    def outcome_probs(self, x: int, y: int, z: int) -> dict[tuple[int, int, int], float]:
        e = self.correlator(x, y, z)
        probs = {}
        for a in (0, 1):
            for b in (0, 1):
                for c in (0, 1):
                    probs[(a, b, c)] = (1.0 + (-1) ** (a + b + c) * e) / 8.0
        return probs


def _sample_categorical(rng: np.random.Generator, outcomes, probs):
    u = rng.random()
    acc = 0.0
    for outcome, p in zip(outcomes, probs):
        acc += p
        if u < acc:
            return outcome
    return outcomes[-1]


def sample_trial(model, settings: tuple[int, int], rng: np.random.Generator,
                 lab_id: str = "", trial_index: int = 0,
                 bit_ids: tuple[int, ...] = ()) -> TrialRecord:
    """One two-party trial drawn from a pair model's outcome distribution."""
    dist = model.joint_outcome_probs(*settings)
    outcomes = list(dist.keys())
    outcome = _sample_categorical(rng, outcomes, [dist[o] for o in outcomes])
    return TrialRecord(
        lab_id=lab_id, trial_index=trial_index, settings=settings,
        outcomes=outcome, bit_ids=bit_ids,
    )


def simulate_timebin_trial(
    model: PolarizationPairModel,
    a_bit: int,
    b_bit: int,
    rng: np.random.Generator,
    *,
    n_bins: int = TIMEBIN_N_BINS,
    pair_prob: float = TIMEBIN_PAIR_PROB,
    lab_id: str = "",
    trial_index: int = 0,
    bit_ids: tuple[int, ...] = (),
) -> TrialRecord:
    """One multi-pulse trial: each pulse may create a pair; first detection
    per side is kept, 0 meaning no detection on that side."""
    a_det = 0
    b_det = 0
    dist = model.single_channel_probs(a_bit, b_bit)
    categories = list(dist.keys())
    probs = [dist[c] for c in categories]
    for pulse in range(1, n_bins + 1):
        if rng.random() >= pair_prob:
            continue
        det_a, det_b = _sample_categorical(rng, categories, probs)
        if det_a and a_det == 0:
            a_det = pulse
        if det_b and b_det == 0:
            b_det = pulse
    return TrialRecord(
        lab_id=lab_id, trial_index=trial_index, settings=(a_bit, b_bit),
        outcomes=(a_det if a_det else None, b_det if b_det else None),
        bin=a_det if a_det else (b_det if b_det else None),
        bit_ids=bit_ids,
    )


@dataclass
class TimebinAccumulator:
    """Per-term event/trial tallies plus the ordered relevant-event stream."""

    n_bins: int = TIMEBIN_N_BINS
    events: list[int] = field(default_factory=lambda: [0] * 6)
    setting_trials: dict = field(default_factory=lambda: {(x, y): 0 for x in (0, 1) for y in (0, 1)})
    stream: list[RelevantEvent] = field(default_factory=list)
    trials_seen: int = 0

    def add_trial(self, x: int, y: int, a_bin: int, b_bin: int,
                  collect_stream: bool = True) -> None:
        idx = self.trials_seen
        self.trials_seen += 1
        self.setting_trials[(x, y)] += 1
        term = _classify_timebin(x, y, a_bin, b_bin)
        if term is None:
            return
        self.events[term] += 1
        if collect_stream:
            self.stream.append(RelevantEvent(trial_index=idx, plus=(term == 0)))

    def counts(self) -> TimeBinCounts:
        t = self.setting_trials
        trials = (
            t[(0, 0)], t[(1, 1)], t[(1, 0)], t[(1, 0)], t[(0, 1)], t[(0, 1)],
        )
        return TimeBinCounts(events=tuple(self.events), trials=trials, n_bins=self.n_bins)

    def setting_freqs(self) -> dict[tuple[int, int], float]:
        total = max(1, self.trials_seen)
        return {k: v / total for k, v in self.setting_trials.items()}


def _classify_timebin(x: int, y: int, a_bin: int, b_bin: int) -> int | None:
    """Map one trial outcome to its term index (0..5), or None if irrelevant."""
    if x == 0 and y == 0:
        return 0 if (a_bin > 0 and a_bin == b_bin) else None
    if x == 1 and y == 1:
        return 1 if (a_bin > 0 and a_bin == b_bin) else None
    if x == 1 and y == 0:
        if b_bin > 0 and a_bin == 0:
            return 2
        if b_bin > 0 and a_bin > 0 and a_bin != b_bin:
            return 3
        return None
    if a_bin > 0 and b_bin == 0:
        return 4
    if a_bin > 0 and b_bin > 0 and b_bin != a_bin:
        return 5
    return None


def simulate_timebin_batch(
    model: PolarizationPairModel,
    a_bits: np.ndarray,
    b_bits: np.ndarray,
    rng: np.random.Generator,
    acc: TimebinAccumulator,
    *,
    n_bins: int = TIMEBIN_N_BINS,
    pair_prob: float = TIMEBIN_PAIR_PROB,
    collect_stream: bool = True,
) -> None:
    """Vectorized multi-pulse simulation of a batch of trials.

    Trials with zero pairs short-circuit; single-pair trials (the vast
    majority of the remainder) are sampled in bulk per settings group;
    the rare multi-pair trials fall back to the per-trial path.
    """
    n = len(a_bits)
    if len(b_bits) != n:
        raise ValueError("setting arrays must have equal length")
    base = acc.trials_seen
    npairs = rng.binomial(n_bins, pair_prob, size=n)
    a_bin = np.zeros(n, dtype=np.int16)
    b_bin = np.zeros(n, dtype=np.int16)

    one = np.flatnonzero(npairs == 1)
    if one.size:
        bins = rng.integers(1, n_bins + 1, size=one.size).astype(np.int16)
        cats = np.empty(one.size, dtype=np.int8)
        for sx in (0, 1):
            for sy in (0, 1):
                mask = (a_bits[one] == sx) & (b_bits[one] == sy)
                m = int(mask.sum())
                if m == 0:
                    continue
                dist = model.single_channel_probs(sx, sy)
                # category order: both, alice only, bob only, neither
                edges = np.cumsum([
                    dist[(True, True)], dist[(True, False)], dist[(False, True)],
                ])
                cats[mask] = np.searchsorted(edges, rng.random(m), side="right")
        alice_det = (cats == 0) | (cats == 1)
        bob_det = (cats == 0) | (cats == 2)
        a_bin[one[alice_det]] = bins[alice_det]
        b_bin[one[bob_det]] = bins[bob_det]

    multi = np.flatnonzero(npairs >= 2)
    for idx in multi:
        k = int(npairs[idx])
        pulses = np.sort(rng.choice(np.arange(1, n_bins + 1), size=k, replace=False))
        dist = model.single_channel_probs(int(a_bits[idx]), int(b_bits[idx]))
        categories = list(dist.keys())
        probs = [dist[c] for c in categories]
        for pulse in pulses:
            det_a, det_b = _sample_categorical(rng, categories, probs)
            if det_a and a_bin[idx] == 0:
                a_bin[idx] = pulse
            if det_b and b_bin[idx] == 0:
                b_bin[idx] = pulse

    # Tally per-setting trials in bulk, then walk only the event trials.
    for sx in (0, 1):
        for sy in (0, 1):
            acc.setting_trials[(sx, sy)] += int(((a_bits == sx) & (b_bits == sy)).sum())
    acc.trials_seen += n

    detected = np.flatnonzero((a_bin > 0) | (b_bin > 0))
    entries = []
    for idx in detected:
        term = _classify_timebin(
            int(a_bits[idx]), int(b_bits[idx]), int(a_bin[idx]), int(b_bin[idx])
        )
        if term is None:
            continue
        acc.events[term] += 1
        if collect_stream:
            entries.append(RelevantEvent(trial_index=base + int(idx), plus=(term == 0)))
    acc.stream.extend(entries)


def _chsh_like_counts(
    model, x_bits: np.ndarray, y_bits: np.ndarray, rng: np.random.Generator,
    n_settings: tuple[int, int],
) -> CountTable:
    """Multinomial per-cell sampling; only doubly detected trials counted."""
    table = CountTable(n_settings_a=n_settings[0], n_settings_b=n_settings[1])
    for x in range(n_settings[0]):
        for y in range(n_settings[1]):
            n_cell = int(((x_bits == x) & (y_bits == y)).sum())
            if n_cell == 0:
                continue
            dist = model.joint_outcome_probs(x, y)
            outcomes = list(dist.keys())
            draws = rng.multinomial(n_cell, [dist[o] for o in outcomes])
            for outcome, count in zip(outcomes, draws):
                a, b = outcome
                if a is None or b is None or count == 0:
                    continue
                table.add(x, y, a, b, int(count))
    return table


def _bits_to_settings(bits: np.ndarray, width: int) -> np.ndarray:
    """Fold consecutive bit groups into integers, most significant first."""
    grouped = bits.reshape(-1, width)
    weights = 1 << np.arange(width - 1, -1, -1)
    return (grouped * weights).sum(axis=1)


def run_lab(
    spec: LabSpec,
    bit_source: BitSource,
    n_trials: int,
    *,
    model=None,
    trace=None,
    collect_stream: bool = False,
    batch_size: int = 1_000_000,
) -> LabRunReport:
    """Consume setting bits in order and simulate ``n_trials`` trials.

    Stops early (and marks the run starved) when the source cannot
    supply a full trial's bits.  ``trace`` is an optional writable text
    stream receiving one JSON trial record per line; tracing forces the
    slower per-trial path.
    """
    if model is None:
        model = default_model(spec)
    rng = np.random.default_rng(spec.seed)
    width = spec.bits_per_trial
    bits = bit_source.take(n_trials * width)
    done = len(bits) // width
    starved = done < n_trials
    bits = bits[: done * width]

    if spec.kind == "timebin":
        acc = TimebinAccumulator()
        settings = bits.reshape(-1, 2)
        if trace is not None:
            for i in range(done):
                rec = simulate_timebin_trial(
                    model, int(settings[i, 0]), int(settings[i, 1]), rng,
                    pair_prob=spec.pair_prob, lab_id=spec.lab_id, trial_index=i,
                    bit_ids=(2 * i, 2 * i + 1),
                )
                trace.write(rec.to_json() + "\n")
                acc.add_trial(
                    int(settings[i, 0]), int(settings[i, 1]),
                    rec.outcomes[0] or 0, rec.outcomes[1] or 0,
                    collect_stream=collect_stream,
                )
        else:
            for start in range(0, done, batch_size):
                stop = min(done, start + batch_size)
                simulate_timebin_batch(
                    model, settings[start:stop, 0], settings[start:stop, 1], rng, acc,
                    pair_prob=spec.pair_prob, collect_stream=collect_stream,
                )
        return LabRunReport(
            spec=spec, counts=acc.counts(), trials=done,
            bits_consumed=done * width, starved=starved,
            setting_counts=dict(acc.setting_trials), events=acc.stream,
        )

    if spec.kind == "bilocal":
        tri = TriCountTable()
        settings = bits.reshape(-1, 3)
        setting_counts: dict = {}
        for x in (0, 1):
            for y in (0, 1):
                for z in (0, 1):
                    mask = (settings[:, 0] == x) & (settings[:, 1] == y) & (settings[:, 2] == z)
                    n_cell = int(mask.sum())
                    setting_counts[(x, y, z)] = n_cell
                    if n_cell == 0:
                        continue
                    dist = model.outcome_probs(x, y, z)
                    outcomes = list(dist.keys())
                    draws = rng.multinomial(n_cell, [dist[o] for o in outcomes])
                    for outcome, count in zip(outcomes, draws):
                        if count:
                            tri.add(x, y, z, *outcome, n=int(count))
        if trace is not None:
            for i in range(done):
                trace.write(TrialRecord(
                    lab_id=spec.lab_id, trial_index=i,
                    settings=tuple(int(v) for v in settings[i]), outcomes=(),
                    bit_ids=(3 * i, 3 * i + 1, 3 * i + 2),
                ).to_json() + "\n")
        return LabRunReport(
            spec=spec, counts=tri, trials=done, bits_consumed=done * width,
            starved=starved, setting_counts=setting_counts,
        )

    # chsh / steering / mdl: pairwise settings over a CountTable
    if spec.kind == "steering":
        grouped = bits.reshape(-1, 8)
        x_vals = _bits_to_settings(grouped[:, :4].reshape(-1), 4)
        y_vals = _bits_to_settings(grouped[:, 4:].reshape(-1), 4)
        shape = (16, 16)
    else:
        pairs = bits.reshape(-1, 2)
        x_vals, y_vals = pairs[:, 0].astype(int), pairs[:, 1].astype(int)
        shape = (2, 2)

    if trace is not None:
        table = CountTable(n_settings_a=shape[0], n_settings_b=shape[1])
        for i, (x, y) in enumerate(zip(x_vals, y_vals)):
            rec = sample_trial(
                model, (int(x), int(y)), rng, lab_id=spec.lab_id, trial_index=i,
                bit_ids=tuple(range(i * width, (i + 1) * width)),
            )
            trace.write(rec.to_json() + "\n")
            a, b = rec.outcomes
            if a is not None and b is not None:
                table.add(int(x), int(y), a, b)
    else:
        table = _chsh_like_counts(model, x_vals, y_vals, rng, shape)

    setting_counts = {}
    for x in range(shape[0]):
        for y in range(shape[1]):
            setting_counts[(x, y)] = int(((x_vals == x) & (y_vals == y)).sum())
    return LabRunReport(
        spec=spec, counts=table, trials=done, bits_consumed=done * width,
        starved=starved, setting_counts=setting_counts,
    )
