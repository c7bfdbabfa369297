import math
from dataclasses import replace

import numpy as np
import pytest

from bellstream.inequalities import chsh_value
from bellstream.quantum import (
    BlochPairModel, PolarizationPairModel, nonmax_pair_model,
    singlet_agree_prob, singlet_model,
)


def density_matrix_probs(c1, c2, basis, visibility, theta_a, theta_b):
    """Independent 4x4 density-matrix oracle for the polarization model.

    Basis order |HH>, |HV>, |VH>, |VV>; polarizer port vectors built by
    explicit Kronecker products.
    """
    psi = np.zeros(4)
    if basis == "parallel":
        psi[0], psi[3] = c1, c2
    else:
        psi[1], psi[2] = c1, c2
    psi = psi / np.linalg.norm(psi)
    rho = visibility * np.outer(psi, psi) + (1 - visibility) * np.eye(4) / 4

    def port_vec(theta, port):
        if port == 0:
            return np.array([math.cos(theta), math.sin(theta)])
        return np.array([-math.sin(theta), math.cos(theta)])

    probs = {}
    for pa in (0, 1):
        for pb in (0, 1):
            v = np.kron(port_vec(theta_a, pa), port_vec(theta_b, pb))
            proj = np.outer(v, v)
            probs[(pa, pb)] = float(np.trace(rho @ proj).real)
    return probs


class TestSingletAgreeProb:
    def test_aligned(self):
        assert singlet_agree_prob(0.0, 0.0) == 0.0

    def test_opposite(self):
        assert singlet_agree_prob(0.0, math.pi) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert singlet_agree_prob(0.0, math.pi / 2) == pytest.approx(0.5)


class TestBlochPairModel:
    def test_aligned_singlet_never_agrees(self):
        m = BlochPairModel(angles_a=(0.0,), angles_b=(0.0,))
        p = m.joint_outcome_probs(0, 0)
        assert p[(0, 0)] == pytest.approx(0.0)
        assert p[(1, 1)] == pytest.approx(0.0)
        assert p[(0, 1)] == pytest.approx(0.5)

    def test_matches_agreement_formula(self):
        for phi in (0.3, 1.1, 2.0):
            m = BlochPairModel(angles_a=(0.0,), angles_b=(phi,))
            p = m.joint_outcome_probs(0, 0)
            agree = p[(0, 0)] + p[(1, 1)]
            assert agree == pytest.approx(singlet_agree_prob(0.0, phi))

    def test_zero_visibility_uniform(self):
        m = BlochPairModel(angles_a=(0.0,), angles_b=(0.2,), visibility=0.0)
        p = m.joint_outcome_probs(0, 0)
        for a in (0, 1):
            for b in (0, 1):
                assert p[(a, b)] == pytest.approx(0.25)

    def test_tsirelson_angles(self):
        m = singlet_model()
        corr = [m.correlator(x, y) for x in (0, 1) for y in (0, 1)]
        assert chsh_value(corr) == pytest.approx(2 * math.sqrt(2))

    def test_visibility_scales_correlators_linearly(self):
        for v in (0.0, 0.5, 1.0):
            m = singlet_model(visibility=v)
            base = singlet_model(visibility=1.0)
            for x in (0, 1):
                for y in (0, 1):
                    assert m.correlator(x, y) == pytest.approx(v * base.correlator(x, y))

    def test_unknown_setting(self):
        m = BlochPairModel(angles_a=(0.0,), angles_b=(0.0,))
        with pytest.raises(KeyError):
            m.joint_outcome_probs(0, 1)


@pytest.mark.parametrize("c1,c2,basis", [
    (0.982, 0.191, "parallel"),
    (math.cos(math.radians(69.1)), math.sin(math.radians(69.1)), "crossed"),
    (math.sqrt(0.5), math.sqrt(0.5), "parallel"),
    (math.sqrt(0.5), -math.sqrt(0.5), "crossed"),
])
class TestPolarizationAgainstMatrixOracle:
    def test_port_probs_match(self, c1, c2, basis):
        angles_a = (-3.7, 23.6, 40.0)
        angles_b = (3.7, -23.6, 10.0)
        for v in (1.0, 0.9, 0.5):
            m = nonmax_pair_model(c1, c2, angles_a, angles_b, basis=basis, visibility=v)
            for x in range(3):
                for y in range(3):
                    got = m.port_probs(x, y)
                    want = density_matrix_probs(
                        c1, c2, basis, v,
                        math.radians(angles_a[x]), math.radians(angles_b[y]))
                    for key in want:
                        assert got[key] == pytest.approx(want[key], abs=1e-10)


class TestOutcomeDistributions:
    def test_thinned_distribution_matches_matrix_oracle(self):
        # the full detection distribution at eta=0.9, rebuilt from the
        # independent density-matrix oracle with explicit thinning terms
        eta = 0.9
        m = nonmax_pair_model(0.982, 0.191, (-3.7, 23.6), (3.7, -23.6), eta=eta)
        for x in (0, 1):
            for y in (0, 1):
                ports = density_matrix_probs(
                    0.982, 0.191, "parallel", 1.0,
                    math.radians((-3.7, 23.6)[x]), math.radians((3.7, -23.6)[y]))
                got = m.joint_outcome_probs(x, y)
                for a in (0, 1):
                    for b in (0, 1):
                        assert got[(a, b)] == pytest.approx(
                            eta * eta * ports[(a, b)], abs=1e-10)
                    want_a_only = eta * (1 - eta) * (ports[(a, 0)] + ports[(a, 1)])
                    assert got[(a, None)] == pytest.approx(want_a_only, abs=1e-10)
                for b in (0, 1):
                    want_b_only = (1 - eta) * eta * (ports[(0, b)] + ports[(1, b)])
                    assert got[(None, b)] == pytest.approx(want_b_only, abs=1e-10)
                assert got[(None, None)] == pytest.approx((1 - eta) ** 2, abs=1e-10)

    @pytest.mark.parametrize("eta", [1.0, 0.9, 0.4])
    def test_probabilities_sum_to_one(self, eta):
        m = nonmax_pair_model(0.982, 0.191, (-3.7, 23.6), (3.7, -23.6), eta=eta)
        for x in (0, 1):
            for y in (0, 1):
                assert sum(m.joint_outcome_probs(x, y).values()) == pytest.approx(1.0, abs=1e-12)
                assert sum(m.single_channel_probs(x, y).values()) == pytest.approx(1.0, abs=1e-12)

    def test_no_signalling(self):
        m = nonmax_pair_model(0.982, 0.191, (-3.7, 23.6), (3.7, -23.6), eta=0.85)
        for x in (0, 1):
            marginals = []
            for y in (0, 1):
                p = m.joint_outcome_probs(x, y)
                marginals.append({
                    a: sum(v for (oa, _ob), v in p.items() if oa == a)
                    for a in (0, 1, None)
                })
            for a in (0, 1, None):
                assert marginals[0][a] == pytest.approx(marginals[1][a], abs=1e-12)
        for y in (0, 1):
            marginals = []
            for x in (0, 1):
                p = m.joint_outcome_probs(x, y)
                marginals.append({
                    b: sum(v for (_oa, ob), v in p.items() if ob == b)
                    for b in (0, 1, None)
                })
            for b in (0, 1, None):
                assert marginals[0][b] == pytest.approx(marginals[1][b], abs=1e-12)

    def test_rounded_amplitudes_snapped(self):
        m = nonmax_pair_model(0.982, 0.191, (0.0,), (0.0,))
        assert m.c1 ** 2 + m.c2 ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_far_from_normalized_rejected(self):
        with pytest.raises(ValueError):
            PolarizationPairModel(c1=1.0, c2=1.0, angles_a=(0.0,), angles_b=(0.0,))

    def test_detector_port_selects_channel(self):
        m = nonmax_pair_model(0.982, 0.191, (-3.7,), (3.7,), eta=1.0)
        transmit = replace(m, detector_port=0)
        ports = m.port_probs(0, 0)
        sc = transmit.single_channel_probs(0, 0)
        assert sc[(True, True)] == pytest.approx(ports[(0, 0)])
