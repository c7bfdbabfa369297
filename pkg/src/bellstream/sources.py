"""Bit sources feeding simulated labs and synthetic users.

Every source yields bits in a fixed order given its seed and supports
batched extraction as a numpy array; labs consume bits strictly in
arrival order and never reuse them.
"""

from __future__ import annotations

import numpy as np

# Calibration targets for the synthetic human source: empirical zero
# bias and adjacent-pair alternation rate of crowd-entered bits.
HUMAN_P0 = 0.5237
HUMAN_ALTERNATION = 0.6406


class BitSource:
    def take(self, n: int) -> np.ndarray:
        """Next ``n`` bits as uint8; may return fewer when exhausted."""
        raise NotImplementedError

    def take_bits(self, n: int) -> str:
        return "".join("1" if b else "0" for b in self.take(n))


class FairCoinSource(BitSource):
    """Independent unbiased bits from a seeded generator."""

    def __init__(self, seed: int = 0):
        self._rng = np.random.default_rng(seed)

    def take(self, n: int) -> np.ndarray:
        return self._rng.integers(0, 2, size=n, dtype=np.uint8)


class MarkovBitSource(BitSource):
    """Two-state Markov chain with prescribed stationary bias and alternation.

    Flip probabilities follow from detailed balance: the stationary
    zero-fraction pins the ratio of the two flip rates and the
    alternation rate pins their scale.
    """

    def __init__(
        self,
        p0: float = HUMAN_P0,
        alternation: float = HUMAN_ALTERNATION,
        seed: int = 0,
    ):
        if not 0.0 < p0 < 1.0:
            raise ValueError("p0 must lie strictly inside (0, 1)")
        flip_from_0 = alternation / (2.0 * p0)
        flip_from_1 = alternation / (2.0 * (1.0 - p0))
        if not (0.0 <= flip_from_0 <= 1.0 and 0.0 <= flip_from_1 <= 1.0):
            raise ValueError(f"targets unreachable: flip probs {flip_from_0}, {flip_from_1}")
        self.p0 = p0
        self.alternation = alternation
        self._flip = (flip_from_0, flip_from_1)
        self._rng = np.random.default_rng(seed)
        self._state = 0 if self._rng.random() < p0 else 1

    def take(self, n: int) -> np.ndarray:
        u = self._rng.random(n)
        out = np.empty(n, dtype=np.uint8)
        state = self._state
        flip0, flip1 = self._flip
        for i in range(n):
            out[i] = state
            if u[i] < (flip0 if state == 0 else flip1):
                state = 1 - state
        self._state = state
        return out


def calibrated_human_source(seed: int = 0) -> MarkovBitSource:
    return MarkovBitSource(seed=seed)


class FileBitSource(BitSource):
    """Bits replayed from a text file of '0'/'1' characters."""

    def __init__(self, path):
        with open(path) as fh:
            text = fh.read()
        bits = [c for c in text if c in "01"]
        bad = {c for c in text if c not in "01 \t\n\r"}
        if bad:
            raise ValueError(f"non-bit characters in {path}: {sorted(bad)}")
        self._bits = np.array([int(c) for c in bits], dtype=np.uint8)
        self._pos = 0

    def take(self, n: int) -> np.ndarray:
        chunk = self._bits[self._pos:self._pos + n]
        self._pos += len(chunk)
        return chunk


class BufferSource(BitSource):
    """FIFO of bits pushed in from elsewhere (e.g. a hub delivery stream)."""

    def __init__(self):
        self._chunks: list[np.ndarray] = []
        self._length = 0

    def push(self, bits) -> None:
        if isinstance(bits, str):
            arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
            if arr.size and arr.max() > 1:
                raise ValueError("payload must be ASCII '0'/'1'")
            arr = arr.astype(np.uint8)
        else:
            arr = np.asarray(bits, dtype=np.uint8)
        self._chunks.append(arr)
        self._length += len(arr)

    def __len__(self) -> int:
        return self._length

    def take(self, n: int) -> np.ndarray:
        out = np.empty(min(n, self._length), dtype=np.uint8)
        filled = 0
        while filled < len(out):
            head = self._chunks[0]
            need = len(out) - filled
            if len(head) <= need:
                out[filled:filled + len(head)] = head
                filled += len(head)
                self._chunks.pop(0)
            else:
                out[filled:] = head[:need]
                self._chunks[0] = head[need:]
                filled = len(out)
        self._length -= len(out)
        return out


def make_source(kind: str, seed: int = 0, path=None) -> BitSource:
    if kind == "fair":
        return FairCoinSource(seed=seed)
    if kind == "human":
        return calibrated_human_source(seed=seed)
    if kind == "file":
        if path is None:
            raise ValueError("file source needs a path")
        return FileBitSource(path)
    raise ValueError(f"unknown source kind {kind!r}")
