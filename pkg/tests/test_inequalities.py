import math
import random
from pathlib import Path

import pytest

from bellstream.inequalities import (
    bias_stats, bilocality, bilocality_value, chsh, chsh_value, correlator,
    k_statistic, k_statistic_from_probs, mdl_i0, mdl_inequality,
    mdl_threshold_from_chsh, sigma, steering_s16,
)
from bellstream.lhv import (
    all_strategies, chsh_of_strategy, factorized_timebin_probs, factorized_k,
    mix_timebin_probs, product_tri_table, timebin_bracket,
)
from bellstream.tables import CountTable, NoDataError, TimeBinCounts, TriCountTable

DATA = Path(__file__).parent / "data"


def make_table(cells):
    """cells: {(x,y): (n_00, n_01, n_10, n_11)}"""
    t = CountTable()
    for (x, y), (n00, n01, n10, n11) in cells.items():
        t.add(x, y, 0, 0, n00)
        t.add(x, y, 0, 1, n01)
        t.add(x, y, 1, 0, n10)
        t.add(x, y, 1, 1, n11)
    return t


class TestCorrelator:
    def test_perfect_correlation(self):
        t = make_table({(0, 0): (50, 0, 0, 50)})
        assert correlator(t, 0, 0) == 1.0

    def test_symmetric_counts_vanish(self):
        t = make_table({(0, 0): (25, 25, 25, 25)})
        assert correlator(t, 0, 0) == 0.0

    def test_mixed_counts(self):
        t = make_table({(0, 0): (40, 15, 10, 35)})
        assert correlator(t, 0, 0) == pytest.approx(0.5)

    def test_no_data_raises(self):
        with pytest.raises(NoDataError):
            correlator(CountTable(), 0, 0)

    def test_always_in_unit_interval(self):
        rng = random.Random(4)
        for _ in range(200):
            t = make_table({(0, 0): tuple(rng.randrange(0, 50) for _ in range(4))})
            if t.trials(0, 0) == 0:
                continue
            assert -1.0 <= correlator(t, 0, 0) <= 1.0


class TestChsh:
    def test_published_correlator_fixture(self):
        t = CountTable.read_csv(DATA / "chsh_counts_hrn.csv")
        result = chsh(t, (1, -1, -1, -1))
        assert result.value == pytest.approx(2.6387, abs=1e-3)
        assert result.bound == 2.0

    def test_second_fixture(self):
        t = CountTable.read_csv(DATA / "chsh_counts_qrn.csv")
        result = chsh(t, (1, -1, -1, -1))
        assert result.value == pytest.approx(2.6434, abs=1e-3)

    def test_tsirelson_value_from_exact_table(self):
        e = math.sqrt(0.5)
        corr = [e, e, e, -e]
        assert chsh_value(corr) == pytest.approx(2 * math.sqrt(2))

    def test_every_deterministic_strategy_bounded(self):
        values = []
        for strategy in all_strategies():
            result = chsh(strategy.count_table(trials_per_cell=100))
            assert result.value <= 2.0 + 1e-12
            values.append(result.value)
        assert max(values) == pytest.approx(2.0)

    def test_missing_cell_raises(self):
        t = make_table({(0, 0): (1, 0, 0, 1), (0, 1): (1, 0, 0, 1),
                        (1, 0): (1, 0, 0, 1)})
        with pytest.raises(NoDataError):
            chsh(t)

    def test_scaling_leaves_value_fixed_and_shrinks_error(self):
        t = CountTable.read_csv(DATA / "chsh_counts_hrn.csv")
        r1 = chsh(t, (1, -1, -1, -1))
        r4 = chsh(t.scaled(4), (1, -1, -1, -1))
        assert r4.value == pytest.approx(r1.value)
        assert r4.stderr == pytest.approx(r1.stderr / 2)


class TestSteering:
    def test_maximum(self):
        assert steering_s16([1.0] * 16).value == 1.0

    def test_published_sigma(self):
        assert sigma(0.965, 0.511, 0.008) == pytest.approx(56.75)

    def test_boundary(self):
        r = steering_s16([0.511] * 16)
        assert r.value == pytest.approx(0.511)
        assert r.sigma == 0.0

    def test_permutation_invariance(self):
        rng = random.Random(8)
        corr = [rng.uniform(-1, 1) for _ in range(16)]
        shuffled = corr[:]
        rng.shuffle(shuffled)
        assert steering_s16(corr).value == pytest.approx(steering_s16(shuffled).value)

    def test_wrong_count_rejected(self):
        with pytest.raises(Exception):
            steering_s16([0.5] * 15)


class TestBilocality:
    def test_arithmetic(self):
        assert bilocality_value(0.49, 0.49) == pytest.approx(1.4)

    def test_null_case(self):
        assert bilocality_value(0.0, 0.0) == 0.0

    def test_published_sigma(self):
        assert sigma(1.2251, 1.0, 0.0066) == pytest.approx(34.1, abs=0.1)

    def test_product_strategies_bounded(self):
        rng = random.Random(5)
        for _ in range(64):
            a = tuple(rng.choice((-1, 1)) for _ in range(2))
            b = tuple(rng.choice((-1, 1)) for _ in range(2))
            c = tuple(rng.choice((-1, 1)) for _ in range(2))
            tri = product_tri_table(a, b, c, trials_per_cell=10)
            assert bilocality(tri).value <= 1.0 + 1e-9

    def test_missing_cell_raises(self):
        with pytest.raises(NoDataError):
            bilocality(TriCountTable())


class TestMdl:
    def test_threshold_published_value(self):
        assert mdl_threshold_from_chsh(2.804) == pytest.approx(0.1495)

    def test_threshold_endpoints(self):
        assert mdl_threshold_from_chsh(4.0) == 0.0
        assert mdl_threshold_from_chsh(2.0) == 0.25

    def test_inequality_vanishing_first_term(self):
        p = {(0, 0, 0, 0): 0.0, (0, 1, 0, 1): 0.1, (1, 0, 1, 0): 0.1,
             (0, 0, 1, 1): 0.1}
        for level in (0.0, 0.1, 0.25):
            assert mdl_inequality(p, level) <= 0.0

    def test_inequality_zero_level(self):
        p = {(0, 0, 0, 0): 0.9, (0, 1, 0, 1): 0.05, (1, 0, 1, 0): 0.03,
             (0, 0, 1, 1): 0.02}
        assert mdl_inequality(p, 0.0) == pytest.approx(-0.1)

    def test_inequality_arithmetic(self):
        p = {(0, 0, 0, 0): 0.25, (0, 1, 0, 1): 0.02, (1, 0, 1, 0): 0.0,
             (0, 0, 1, 1): 0.0}
        assert mdl_inequality(p, 0.1) == pytest.approx(0.011)

    def test_i0_zero_when_q_zero(self):
        p = {(0, 0, 0, 0): 0.5, (0, 1, 0, 1): 0.0, (1, 0, 1, 0): 0.0,
             (0, 0, 1, 1): 0.0}
        assert mdl_i0(p).value == 0.0

    def test_i0_hand_value(self):
        p = {(0, 0, 0, 0): 0.25, (0, 1, 0, 1): 0.05, (1, 0, 1, 0): 0.0,
             (0, 0, 1, 1): 0.0}
        assert mdl_i0(p).value == pytest.approx(0.125)

    def test_i0_is_root_of_inequality(self):
        rng = random.Random(11)
        for _ in range(300):
            p = {(0, 0, 0, 0): rng.uniform(0.01, 0.9),
                 (0, 1, 0, 1): rng.uniform(0.0, 0.3),
                 (1, 0, 1, 0): rng.uniform(0.0, 0.3),
                 (0, 0, 1, 1): rng.uniform(0.0, 0.3)}
            root = mdl_i0(p).value
            if root > 0.25:
                continue  # outside the inequality's domain
            assert mdl_inequality(p, root) == pytest.approx(0.0, abs=1e-15)

    def test_degenerate_raises(self):
        p = {(0, 0, 0, 0): 0.0, (0, 1, 0, 1): 0.0, (1, 0, 1, 0): 0.0,
             (0, 0, 1, 1): 0.0}
        with pytest.raises(NoDataError):
            mdl_i0(p)


class TestKStatistic:
    def test_human_run_fixture(self):
        t = TimeBinCounts.read_csv(DATA / "timebin_counts_human.csv")
        r = k_statistic(t)
        assert r.value == pytest.approx(1.697e-4, abs=0.005e-4)
        assert r.bound == 0.0
        assert r.sigma > 5

    def test_computer_run_fixture(self):
        t = TimeBinCounts.read_csv(DATA / "timebin_counts_computer.csv")
        assert k_statistic(t).value == pytest.approx(1.55e-4, abs=0.005e-4)

    def test_all_zero_events(self):
        t = TimeBinCounts(events=(0,) * 6, trials=(100,) * 6)
        assert k_statistic(t).value == 0.0

    def test_zero_trials_raises(self):
        t = TimeBinCounts(events=(0,) * 6, trials=(10, 10, 0, 10, 10, 10))
        with pytest.raises(NoDataError):
            k_statistic(t)

    def test_scaling_invariance(self):
        t = TimeBinCounts.read_csv(DATA / "timebin_counts_human.csv")
        assert k_statistic(t.scaled(3)).value == pytest.approx(k_statistic(t).value)


class TestTimebinClassicalBound:
    def test_bracket_never_positive_random(self):
        rng = random.Random(2024)
        for _ in range(10_000)              :
            vals = [rng.random() for _ in range(4)]
            assert timebin_bracket(*vals) <= 1e-12

    def test_bracket_vertices(self):
        for mask in range(16):
            vals = [(mask >> i) & 1 for i in range(4)]
            assert timebin_bracket(*vals) <= 0

    def test_factorized_models_never_violate(self):
        rng = random.Random(99)
        for _ in range(200):
            def dist():
                raw = [rng.random() for _ in range(16)]
                total = sum(raw)
                return [v / total for v in raw]
            assert factorized_k((dist(), dist()), (dist(), dist())) <= 1e-12

    def test_mixtures_never_violate(self):
        rng = random.Random(100)
        for _ in range(50):
            comps = []
            for _ in range(4):
                def dist():
                    raw = [rng.random() for _ in range(16)]
                    total = sum(raw)
                    return [v / total for v in raw]
                comps.append(factorized_timebin_probs((dist(), dist()), (dist(), dist())))
            w = [rng.random() for _ in range(4)]
            w = [v / sum(w) for v in w]
            mixed = mix_timebin_probs(w, comps)
            assert k_statistic_from_probs(mixed) <= 1e-12


class TestBiasStats:
    def test_all_zeros(self):
        stats = bias_stats("0000")
        assert stats == {"p0": 1.0, "alternation": 0.0}

    def test_alternating(self):
        stats = bias_stats("0101")
        assert stats["p0"] == 0.5
        assert stats["alternation"] == 1.0

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            bias_stats("")


class TestSigma:
    def test_published_rows(self):
        assert sigma(2.55, 2, 0.07) == pytest.approx(7.857, abs=1e-3)
        assert sigma(0.965, 0.511, 0.008) == pytest.approx(56.75)

    def test_on_bound(self):
        assert sigma(2, 2, 0.1) == 0.0

    def test_rejects_bad_stderr(self):
        with pytest.raises(ValueError):
            sigma(2.5, 2, 0.0)


class TestDeterministicChshExamples:
    def test_constant_strategies_reach_two(self):
        from bellstream.lhv import LhvStrategy
        s = LhvStrategy(a=(1, 1), b=(1, 1))
        assert chsh_of_strategy(s) == 2.0

    def test_enumeration_max(self):
        from bellstream.lhv import enumerate_deterministic_chsh
        best, argmax = enumerate_deterministic_chsh()
        assert best == 2.0
        assert len(argmax) == 8  # half the strategies saturate the bound
