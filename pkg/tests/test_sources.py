import numpy as np
import pytest

from bellstream.inequalities import bias_stats
from bellstream.sources import (
    BufferSource, FairCoinSource, FileBitSource, MarkovBitSource,
    calibrated_human_source, make_source,
)


class TestFairCoin:
    def test_deterministic(self):
        a = FairCoinSource(seed=1).take(1000)
        b = FairCoinSource(seed=1).take(1000)
        assert np.array_equal(a, b)

    def test_roughly_unbiased(self):
        bits = FairCoinSource(seed=2).take(100_000)
        assert abs(bits.mean() - 0.5) < 0.01


class TestMarkovSource:
    def test_calibration_small_run(self):
        bits = calibrated_human_source(seed=3).take(200_000)
        stats = bias_stats(bits.tolist())
        assert stats["p0"] == pytest.approx(0.5237, abs=0.005)
        assert stats["alternation"] == pytest.approx(0.6406, abs=0.005)

    def test_deterministic(self):
        a = MarkovBitSource(seed=4).take(5000)
        b = MarkovBitSource(seed=4).take(5000)
        assert np.array_equal(a, b)

    def test_unreachable_targets_rejected(self):
        with pytest.raises(ValueError):
            MarkovBitSource(p0=0.9, alternation=0.9)


class TestFileSource:
    def test_reads_bits(self, tmp_path):
        path = tmp_path / "bits.txt"
        path.write_text("0101 1100\n0011\n")
        source = FileBitSource(path)
        assert source.take_bits(12) == "010111000011"
        assert len(source.take(5)) == 0  # exhausted

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("01x1\n")
        with pytest.raises(ValueError):
            FileBitSource(path)


class TestBufferSource:
    def test_fifo_order(self):
        buf = BufferSource()
        buf.push("0101")
        buf.push("11")
        assert buf.take_bits(3) == "010"
        assert buf.take_bits(10) == "111"
        assert len(buf) == 0

    def test_rejects_non_bits(self):
        with pytest.raises(ValueError):
            BufferSource().push("012")


def test_make_source_kinds():
    assert isinstance(make_source("fair"), FairCoinSource)
    assert isinstance(make_source("human"), MarkovBitSource)
    with pytest.raises(ValueError):
        make_source("quantum")
