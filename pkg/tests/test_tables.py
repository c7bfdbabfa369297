import pytest

from bellstream.tables import (
    BellResult, CountTable, ShapeError, TimeBinCounts, TriCountTable,
)


class TestCountTable:
    def test_add_and_trials(self):
        t = CountTable()
        t.add(0, 1, 0, 0, 5)
        t.add(0, 1, 1, 1, 3)
        assert t.trials(0, 1) == 8
        assert t.trials(1, 0) == 0
        assert t.total_trials() == 8

    def test_csv_round_trip(self, tmp_path):
        t = CountTable()
        t.add(0, 0, 0, 0, 40)
        t.add(0, 0, 1, 1, 35)
        t.add(1, 1, 0, 1, 15)
        path = tmp_path / "t.csv"
        t.write_csv(path)
        back = CountTable.read_csv(path)
        assert back.counts == t.counts

    def test_read_rejects_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ShapeError):
            CountTable.read_csv(path)

    def test_read_rejects_non_bit_outcomes(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "setting_x,setting_y,outcome_a,outcome_b,count\n0,0,2,0,1\n")
        with pytest.raises(ShapeError):
            CountTable.read_csv(path)

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            CountTable().add(0, 0, 0, 0, -1)


class TestTriCountTable:
    def test_round_trip(self, tmp_path):
        tri = TriCountTable()
        tri.add(0, 1, 0, 1, 0, 1, 7)
        path = tmp_path / "tri.csv"
        tri.write_csv(path)
        assert TriCountTable.read_csv(path).counts == tri.counts

    def test_trials(self):
        tri = TriCountTable()
        for a in (0, 1):
            tri.add(0, 0, 0, a, 0, 0, 2)
        assert tri.trials(0, 0, 0) == 4


class TestTimeBinCounts:
    def test_events_cannot_exceed_trials(self):
        with pytest.raises(ValueError):
            TimeBinCounts(events=(2, 0, 0, 0, 0, 0), trials=(1, 1, 1, 1, 1, 1))

    def test_needs_six_terms(self):
        with pytest.raises(ShapeError):
            TimeBinCounts(events=(1, 2), trials=(3, 4))

    def test_csv_round_trip(self, tmp_path):
        t = TimeBinCounts(events=(5, 1, 2, 0, 3, 1), trials=(100,) * 6)
        path = tmp_path / "tb.csv"
        t.write_csv(path)
        back = TimeBinCounts.read_csv(path)
        assert back.events == t.events
        assert back.trials == t.trials


class TestBellResult:
    def test_sigma_from_error(self):
        r = BellResult.from_error(2.55, 2.0, 0.07)
        assert r.sigma == pytest.approx(7.857, abs=1e-3)
        assert r.violates()

    def test_zero_stderr_on_bound(self):
        assert BellResult.from_error(2.0, 2.0, 0.0).sigma == 0.0

    def test_zero_stderr_above_bound(self):
        assert BellResult.from_error(3.0, 2.0, 0.0).sigma == float("inf")
