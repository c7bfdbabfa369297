import pytest

from bellstream.lhv import (
    LhvStrategy, all_strategies, chsh_of_strategy, enumerate_deterministic_chsh,
)


class TestStrategies:
    def test_sixteen_strategies(self):
        strategies = all_strategies()
        assert len(strategies) == 16
        assert len(set(strategies)) == 16

    def test_constant_strategy_value(self):
        s = LhvStrategy(a=(1, 1), b=(1, 1))
        assert chsh_of_strategy(s) == 2.0

    def test_alternating_alice_constant_bob(self):
        # a(x) = (-1)^x against constant b: the sign pattern's single minus
        # lands on a cell whose correlator is already -1, so the terms line
        # up to the classical maximum rather than cancelling.
        s = LhvStrategy(a=(1, -1), b=(1, 1))
        assert chsh_of_strategy(s) == 2.0

    def test_outcomes_validated(self):
        with pytest.raises(ValueError):
            LhvStrategy(a=(0, 1), b=(1, 1))


class TestEnumeration:
    def test_maximum_is_two(self):
        best, argmax = enumerate_deterministic_chsh()
        assert best == 2.0
        assert all(chsh_of_strategy(s) == 2.0 for s in argmax)

    def test_all_values_within_classical_range(self):
        values = sorted(chsh_of_strategy(s) for s in all_strategies())
        assert values[0] == -2.0
        assert values[-1] == 2.0
        assert all(v in (-2.0, 2.0) for v in values)

    def test_custom_sign_pattern(self):
        best, _ = enumerate_deterministic_chsh(signs=(1, -1, -1, -1))
        assert best == 2.0
