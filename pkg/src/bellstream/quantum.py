"""Two-qubit pair models: outcome probabilities for simulated experiments.

Two flavours cover every lab here:

* :class:`BlochPairModel` works directly with great-circle analysis
  angles and the agreement-probability rule for a spin singlet (or its
  correlated mirror image).
* :class:`PolarizationPairModel` projects a two-term superposition onto
  polarizer angles, supporting non-maximal states and one- or
  two-channel detection.

Both mix in white noise below unit visibility and thin detections by
per-side efficiency.  Outcome keys use the project-wide encoding
(+1 -> 0, -1 -> 1) with ``None`` marking no detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

Outcome = tuple[int | None, int | None]

NORMALIZATION_TOL = 1e-12


def singlet_agree_prob(phi_a: float, phi_b: float) -> float:
    """Probability that ideal singlet measurements along Bloch angles agree."""
    return math.sin((phi_b - phi_a) / 2.0) ** 2


def _thin_by_efficiency(
    detected: dict[tuple[int, int], float], eta_a: float, eta_b: float
) -> dict[Outcome, float]:
    """Split perfect-detection probabilities into detected/missed outcomes."""
    probs: dict[Outcome, float] = {}
    pa = {0: 0.0, 1: 0.0}
    pb = {0: 0.0, 1: 0.0}
    for (a, b), p in detected.items():
        pa[a] += p
        pb[b] += p
        probs[(a, b)] = probs.get((a, b), 0.0) + p * eta_a * eta_b
    for a, p in pa.items():
        probs[(a, None)] = probs.get((a, None), 0.0) + p * eta_a * (1.0 - eta_b)
    for b, p in pb.items():
        probs[(None, b)] = probs.get((None, b), 0.0) + p * (1.0 - eta_a) * eta_b
    probs[(None, None)] = (1.0 - eta_a) * (1.0 - eta_b)
    return probs


def _check_ranges(visibility: float, eta_a: float, eta_b: float) -> None:
    if not 0.0 <= visibility <= 1.0:
        raise ValueError("visibility must lie in [0, 1]")
    for eta in (eta_a, eta_b):
        if not 0.0 <= eta <= 1.0:
            raise ValueError("efficiencies must lie in [0, 1]")


@dataclass(frozen=True)
class BlochPairModel:
    """Correlator-form pair model on a great circle of the Bloch sphere.

    ``anticorrelated=True`` is the singlet: E = -V cos(phi_b - phi_a).
    """

    angles_a: tuple[float, ...]
    angles_b: tuple[float, ...]
    anticorrelated: bool = True
    visibility: float = 1.0
    eta_a: float = 1.0
    eta_b: float = 1.0

    def __post_init__(self) -> None:
        _check_ranges(self.visibility, self.eta_a, self.eta_b)

    def correlator(self, x: int, y: int) -> float:
        sign = -1.0 if self.anticorrelated else 1.0
        return sign * self.visibility * math.cos(self.angles_b[y] - self.angles_a[x])

    def joint_outcome_probs(self, x: int, y: int) -> dict[Outcome, float]:
        if x >= len(self.angles_a) or y >= len(self.angles_b):
            raise KeyError(f"unknown setting pair ({x},{y})")
        e = self.correlator(x, y)
        agree = (1.0 + e) / 4.0
        disagree = (1.0 - e) / 4.0
        detected = {(0, 0): agree, (1, 1): agree, (0, 1): disagree, (1, 0): disagree}
        return _thin_by_efficiency(detected, self.eta_a, self.eta_b)


# Angle sets reaching S = 2*sqrt(2) with the standard sign pattern.
TSIRELSON_ANGLES_SINGLET = ((0.0, -math.pi / 2), (3 * math.pi / 4, 5 * math.pi / 4))
TSIRELSON_ANGLES_PARALLEL = ((0.0, math.pi / 4), (math.pi / 8, -math.pi / 8))


def singlet_model(
    visibility: float = 1.0,
    eta_a: float = 1.0,
    eta_b: float = 1.0,
    angles_a: tuple[float, ...] = TSIRELSON_ANGLES_SINGLET[0],
    angles_b: tuple[float, ...] = TSIRELSON_ANGLES_SINGLET[1],
) -> BlochPairModel:
    return BlochPairModel(
        angles_a=angles_a, angles_b=angles_b, anticorrelated=True,
        visibility=visibility, eta_a=eta_a, eta_b=eta_b,
    )


@dataclass(frozen=True)
class PolarizationPairModel:
    """Superposition c1|m1 m1'> + c2|m2 m2'> measured with polarizers.

    ``basis`` selects the superposition support: "parallel" for
    (|HH>, |VV>), "crossed" for (|HV>, |VH>).  Polarizer angles are in
    radians; port 0 transmits cos(t)|H> + sin(t)|V>, port 1 the
    orthogonal state.  ``detector_port`` picks the monitored port for
    single-channel (one detector per side) operation.
    """

    c1: float
    c2: float
    angles_a: tuple[float, ...]
    angles_b: tuple[float, ...]
    basis: str = "parallel"
    visibility: float = 1.0
    eta_a: float = 1.0
    eta_b: float = 1.0
    detector_port: int = 1

    def __post_init__(self) -> None:
        norm = self.c1 * self.c1 + self.c2 * self.c2
        if abs(norm - 1.0) > 0.01:
            raise ValueError(f"amplitudes far from normalized: |c|^2 = {norm!r}")
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            # Rounded amplitudes (e.g. quoted to three decimals) are accepted
            # and snapped onto the unit sphere.
            scale = math.sqrt(norm)
            object.__setattr__(self, "c1", self.c1 / scale)
            object.__setattr__(self, "c2", self.c2 / scale)
        if self.basis not in ("parallel", "crossed"):
            raise ValueError("basis must be 'parallel' or 'crossed'")
        if self.detector_port not in (0, 1):
            raise ValueError("detector_port must be 0 or 1")
        _check_ranges(self.visibility, self.eta_a, self.eta_b)

    @staticmethod
    def _port_amplitudes(theta: float, port: int) -> tuple[float, float]:
        """(<port|H>, <port|V>) for a polarizer rotated by theta."""
        if port == 0:
            return math.cos(theta), math.sin(theta)
        return -math.sin(theta), math.cos(theta)

    def port_probs(self, x: int, y: int) -> dict[tuple[int, int], float]:
        """Probabilities of the four port pairs under perfect detection."""
        if x >= len(self.angles_a) or y >= len(self.angles_b):
            raise KeyError(f"unknown setting pair ({x},{y})")
        ta, tb = self.angles_a[x], self.angles_b[y]
        if self.basis == "parallel":
            comps = ((0, 0), (1, 1))  # (H,H) and (V,V) components
        else:
            comps = ((0, 1), (1, 0))
        probs: dict[tuple[int, int], float] = {}
        for pa in (0, 1):
            amp_a = self._port_amplitudes(ta, pa)
            for pb in (0, 1):
                amp_b = self._port_amplitudes(tb, pb)
                amp = (
                    self.c1 * amp_a[comps[0][0]] * amp_b[comps[0][1]]
                    + self.c2 * amp_a[comps[1][0]] * amp_b[comps[1][1]]
                )
                pure = amp * amp
                probs[(pa, pb)] = self.visibility * pure + (1.0 - self.visibility) / 4.0
        return probs

    def correlator(self, x: int, y: int) -> float:
        p = self.port_probs(x, y)
        return p[(0, 0)] + p[(1, 1)] - p[(0, 1)] - p[(1, 0)]

    def joint_outcome_probs(self, x: int, y: int) -> dict[Outcome, float]:
        """Two-channel detection outcome distribution, with no-detection marks."""
        return _thin_by_efficiency(self.port_probs(x, y), self.eta_a, self.eta_b)

    def single_channel_probs(self, x: int, y: int) -> dict[tuple[bool, bool], float]:
        """Detection pattern when only ``detector_port`` is monitored per side.

        Keys are (alice_detected, bob_detected).
        """
        port = self.detector_port
        p = self.port_probs(x, y)
        p_ab = p[(port, port)]
        p_a = p[(port, 0)] + p[(port, 1)]
        p_b = p[(0, port)] + p[(1, port)]
        both = self.eta_a * self.eta_b * p_ab
        a_only = self.eta_a * p_a - both
        b_only = self.eta_b * p_b - both
        return {
            (True, True): both,
            (True, False): a_only,
            (False, True): b_only,
            (False, False): 1.0 - both - a_only - b_only,
        }


def nonmax_pair_model(
    c1: float,
    c2: float,
    angles_a_deg: tuple[float, ...],
    angles_b_deg: tuple[float, ...],
    *,
    basis: str = "parallel",
    visibility: float = 1.0,
    eta: float = 1.0,
    detector_port: int = 1,
) -> PolarizationPairModel:
    """Convenience constructor taking polarizer angles in degrees."""
    return PolarizationPairModel(
        c1=c1, c2=c2,
        angles_a=tuple(math.radians(v) for v in angles_a_deg),
        angles_b=tuple(math.radians(v) for v in angles_b_deg),
        basis=basis, visibility=visibility,
        eta_a=eta, eta_b=eta, detector_port=detector_port,
    )
