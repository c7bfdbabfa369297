"""Online next-bit predictor (the Oracle).

Models a single user's bit stream as a Markov source: for every context
length L up to a cap, it keeps transition counts from L-bit contexts to
the following bit, and predicts the bit whose empirical conditional
frequency is highest across all usable context lengths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


DEFAULT_MAX_CONTEXT = 3


@dataclass(frozen=True)
class Prediction:
    bit: int
    confidence: float
    context_length: int


@dataclass(frozen=True)
class SessionScore:
    total: int
    unpredicted: int
    accuracy: float


@dataclass
class PredictorState:
    """Transition counts for context lengths 1..l_max plus the stream tail.

    ``counts[L-1]`` maps an L-character context string ('0'/'1') to a
    two-element list [count of next-bit 0, count of next-bit 1].  Only
    context occurrences that have a successor in the observed stream are
    counted, so the tail's own final occurrence never inflates a
    denominator.
    """

    l_max: int = DEFAULT_MAX_CONTEXT
    counts: list[dict[str, list[int]]] = field(default_factory=list)
    tail: str = ""
    seen: int = 0

    def __post_init__(self) -> None:
        if self.l_max < 1:
            raise ValueError("l_max must be >= 1")
        if not self.counts:
            self.counts = [{} for _ in range(self.l_max)]

    def observe(self, bit: int) -> "PredictorState":
        """Fold one bit into the model; returns self for chaining."""
        if bit not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {bit!r}")
        for length in range(1, min(self.seen, self.l_max) + 1):
            ctx = self.tail[-length:]
            pair = self.counts[length - 1].setdefault(ctx, [0, 0])
            pair[bit] += 1
        self.tail = (self.tail + str(bit))[-self.l_max:]
        self.seen += 1
        return self

    def predict(self) -> Prediction:
        """Predict the next bit without modifying the state.

        Maximizes the empirical conditional frequency over all usable
        context lengths.  Ties between bits go to the bit whose winning
        context is longer, then to 0.  With no usable context at any
        length the cold-start prediction is bit 0 at confidence 0.5.
        """
        best: tuple[float, int, int] | None = None  # (f, L, tiebreak-key)
        best_bit = 0
        for length in range(1, len(self.tail) + 1):
            ctx = self.tail[-length:]
            pair = self.counts[length - 1].get(ctx)
            if pair is None:
                continue
            total = pair[0] + pair[1]
            if total == 0:
                continue
            for bit in (0, 1):
                key = (pair[bit] / total, length, 1 - bit)
                if best is None or key > best:
                    best = key
                    best_bit = bit
        if best is None:
            return Prediction(bit=0, confidence=0.5, context_length=0)
        return Prediction(bit=best_bit, confidence=best[0], context_length=best[1])

    def to_json(self) -> str:
        """Serialize to a single self-describing JSON line (session resume)."""
        triples = []
        for idx, table in enumerate(self.counts):
            for ctx in sorted(table):
                pair = table[ctx]
                for bit in (0, 1):
                    if pair[bit]:
                        triples.append([idx + 1, ctx, bit, pair[bit]])
        return json.dumps(
            {"l_max": self.l_max, "seen": self.seen, "tail": self.tail, "counts": triples},
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "PredictorState":
        raw = json.loads(text)
        state = cls(l_max=raw["l_max"], tail=raw["tail"], seen=raw["seen"])
        for length, ctx, bit, count in raw["counts"]:
            pair = state.counts[length - 1].setdefault(ctx, [0, 0])
            pair[bit] = count
        return state


def observe(state: PredictorState, bit: int) -> PredictorState:
    return state.observe(bit)


def predict(state: PredictorState) -> Prediction:
    return state.predict()


def census_counts(bits: str, l_max: int = DEFAULT_MAX_CONTEXT) -> list[dict[str, list[int]]]:
    """Brute-force window census over a full sequence.

    Independent of the incremental update path; used to cross-check it.
    Counts, for each context length, every window position that has a
    successor.
    """
    counts: list[dict[str, list[int]]] = [{} for _ in range(l_max)]
    for length in range(1, l_max + 1):
        for start in range(len(bits) - length):
            ctx = bits[start:start + length]
            nxt = int(bits[start + length])
            pair = counts[length - 1].setdefault(ctx, [0, 0])
            pair[nxt] += 1
    return counts


def score_session(bits, l_max: int = DEFAULT_MAX_CONTEXT) -> SessionScore:
    """Replay a sequence through a fresh predictor, predicting before each bit.

    An empty sequence scores accuracy 0.5 by convention.
    """
    state = PredictorState(l_max=l_max)
    total = 0
    unpredicted = 0
    for bit in bits:
        bit = int(bit)
        if state.predict().bit != bit:
            unpredicted += 1
        state.observe(bit)
        total += 1
    accuracy = 0.5 if total == 0 else (total - unpredicted) / total
    return SessionScore(total=total, unpredicted=unpredicted, accuracy=accuracy)
