"""Count structures fed into the inequality evaluations, with CSV I/O.

Outcome encoding is fixed project-wide: +1 maps to bit 0, -1 maps to
bit 1.  A correlator is then sum((-1)^(a+b) N(a,b)) / trials.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field


class NoDataError(ValueError):
    """A referenced settings cell has zero recorded trials."""


class ShapeError(ValueError):
    """Input data does not match the shape an operation requires."""


@dataclass
class CountTable:
    """Counts N(a,b|x,y) over binary outcomes and integer settings."""

    n_settings_a: int = 2
    n_settings_b: int = 2
    counts: dict[tuple[int, int, int, int], int] = field(default_factory=dict)

    def add(self, x: int, y: int, a: int, b: int, n: int = 1) -> None:
        if n < 0:
            raise ValueError("counts must be nonnegative")
        key = (x, y, a, b)
        self.counts[key] = self.counts.get(key, 0) + n

    def count(self, x: int, y: int, a: int, b: int) -> int:
        return self.counts.get((x, y, a, b), 0)

    def trials(self, x: int, y: int) -> int:
        return sum(self.count(x, y, a, b) for a in (0, 1) for b in (0, 1))

    def total_trials(self) -> int:
        return sum(self.counts.values())

    def scaled(self, factor: int) -> "CountTable":
        if factor < 1:
            raise ValueError("scale factor must be a positive integer")
        return CountTable(
            self.n_settings_a,
            self.n_settings_b,
            {k: v * factor for k, v in self.counts.items()},
        )

    def prob(self, a: int, b: int, x: int, y: int) -> float:
        """Estimated conditional probability P(ab|xy)."""
        n = self.trials(x, y)
        if n == 0:
            raise NoDataError(f"no trials recorded at settings ({x},{y})")
        return self.count(x, y, a, b) / n

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["setting_x", "setting_y", "outcome_a", "outcome_b", "count"])
            for key in sorted(self.counts):
                writer.writerow(list(key) + [self.counts[key]])

    @classmethod
    def read_csv(cls, path) -> "CountTable":
        counts: dict[tuple[int, int, int, int], int] = {}
        max_x = max_y = 0
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            expected = {"setting_x", "setting_y", "outcome_a", "outcome_b", "count"}
            if reader.fieldnames is None or set(reader.fieldnames) != expected:
                raise ShapeError(f"expected columns {sorted(expected)}, got {reader.fieldnames}")
            for row in reader:
                x, y = int(row["setting_x"]), int(row["setting_y"])
                a, b = int(row["outcome_a"]), int(row["outcome_b"])
                n = int(row["count"])
                if a not in (0, 1) or b not in (0, 1):
                    raise ShapeError(f"outcomes must be bits, got a={a} b={b}")
                if n < 0:
                    raise ShapeError("counts must be nonnegative")
                counts[(x, y, a, b)] = counts.get((x, y, a, b), 0) + n
                max_x = max(max_x, x)
                max_y = max(max_y, y)
        return cls(n_settings_a=max_x + 1, n_settings_b=max_y + 1, counts=counts)


@dataclass
class TriCountTable:
    """Counts N(a,b,c|x,y,z) over binary outcomes and binary settings."""

    counts: dict[tuple[int, int, int, int, int, int], int] = field(default_factory=dict)

    def add(self, x: int, y: int, z: int, a: int, b: int, c: int, n: int = 1) -> None:
        if n < 0:
            raise ValueError("counts must be nonnegative")
        key = (x, y, z, a, b, c)
        self.counts[key] = self.counts.get(key, 0) + n

    def count(self, x, y, z, a, b, c) -> int:
        return self.counts.get((x, y, z, a, b, c), 0)

    def trials(self, x: int, y: int, z: int) -> int:
        return sum(
            self.count(x, y, z, a, b, c)
            for a in (0, 1) for b in (0, 1) for c in (0, 1)
        )

    def scaled(self, factor: int) -> "TriCountTable":
        if factor < 1:
            raise ValueError("scale factor must be a positive integer")
        return TriCountTable({k: v * factor for k, v in self.counts.items()})

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["setting_x", "setting_y", "setting_z",
                 "outcome_a", "outcome_b", "outcome_c", "count"]
            )
            for key in sorted(self.counts):
                writer.writerow(list(key) + [self.counts[key]])

    @classmethod
    def read_csv(cls, path) -> "TriCountTable":
        counts: dict[tuple[int, int, int, int, int, int], int] = {}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            expected = {"setting_x", "setting_y", "setting_z",
                        "outcome_a", "outcome_b", "outcome_c", "count"}
            if reader.fieldnames is None or set(reader.fieldnames) != expected:
                raise ShapeError(f"expected columns {sorted(expected)}, got {reader.fieldnames}")
            for row in reader:
                key = tuple(int(row[k]) for k in
                            ("setting_x", "setting_y", "setting_z",
                             "outcome_a", "outcome_b", "outcome_c"))
                counts[key] = counts.get(key, 0) + int(row["count"])
        return cls(counts=counts)


# Term order of the time-bin CH statistic: the one positive term first,
# then the five subtracted ones.  "ap"/"bp" denote the primed settings,
# "z" a no-detection outcome, "ij" detections in different bins.
TIMEBIN_TERMS = ("ii_ab", "ii_apbp", "zi_apb", "ji_apb", "iz_abp", "ij_abp")


@dataclass
class TimeBinCounts:
    """Event and trial counts for the six terms of the time-bin CH statistic.

    Terms 3 and 4 share the trial count of the (a',b) setting pair, terms
    5 and 6 that of (a,b').
    """

    events: tuple[int, int, int, int, int, int]
    trials: tuple[int, int, int, int, int, int]
    n_bins: int = 15

    def __post_init__(self) -> None:
        if len(self.events) != 6 or len(self.trials) != 6:
            raise ShapeError("exactly six terms required")
        for e, t in zip(self.events, self.trials):
            if e < 0 or t < 0:
                raise ValueError("events and trials must be nonnegative")
            if e > t:
                raise ValueError("events cannot exceed trials")

    def scaled(self, factor: int) -> "TimeBinCounts":
        if factor < 1:
            raise ValueError("scale factor must be a positive integer")
        return TimeBinCounts(
            tuple(e * factor for e in self.events),
            tuple(t * factor for t in self.trials),
            self.n_bins,
        )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["term", "events", "trials"])
            for name, e, t in zip(TIMEBIN_TERMS, self.events, self.trials):
                writer.writerow([name, e, t])

    @classmethod
    def read_csv(cls, path, n_bins: int = 15) -> "TimeBinCounts":
        rows: dict[str, tuple[int, int]] = {}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or set(reader.fieldnames) != {"term", "events", "trials"}:
                raise ShapeError(f"expected columns ['events', 'term', 'trials'], got {reader.fieldnames}")
            for row in reader:
                rows[row["term"]] = (int(row["events"]), int(row["trials"]))
        missing = [t for t in TIMEBIN_TERMS if t not in rows]
        if missing:
            raise ShapeError(f"missing terms: {missing}")
        events = tuple(rows[t][0] for t in TIMEBIN_TERMS)
        trials = tuple(rows[t][1] for t in TIMEBIN_TERMS)
        return cls(events=events, trials=trials, n_bins=n_bins)


@dataclass(frozen=True)
class BellResult:
    """An inequality evaluation: value, classical bound, standard error, significance.

    ``sigma`` is (value - bound) / stderr, so positive sigma means the
    classical bound is exceeded.  With stderr == 0 it degenerates to
    +/-inf (or 0 exactly on the bound).
    """

    value: float
    bound: float
    stderr: float
    sigma: float

    @classmethod
    def from_error(cls, value: float, bound: float, stderr: float) -> "BellResult":
        if stderr < 0:
            raise ValueError("stderr must be >= 0")
        if stderr > 0:
            sig = (value - bound) / stderr
        elif value == bound:
            sig = 0.0
        else:
            sig = float("inf") if value > bound else float("-inf")
        return cls(value=value, bound=bound, stderr=stderr, sigma=sig)

    def violates(self) -> bool:
        return self.value > self.bound
