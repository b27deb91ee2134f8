"""Singlet decay with two-sided spin analyzers, CHSH, and classical bounds.

The construction mirrors the five-event pattern: two apparatus events fix
the analyzer directions on dimension-1 links (the settings contribute no
Hilbert-space degrees of freedom), a decay event emits the two-spin
singlet, and the outcome events consume one spin plus one apparatus link
each.  All outcome weights are 1, so the four outcome pairs form an
exhaustive alternative set.

Sign convention: ``spin_eigenvectors(e)`` returns the +1 and -1
eigenvectors of ``e . sigma`` as ``(cos(t/2), sin(t/2) e^{i p})`` and
``(-sin(t/2) e^{-i p}, cos(t/2))`` with polar angle ``t`` and azimuth
``p``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import dynamics
from .graph import History
from .tensors import FactorLabel, LabeledVector, ProductBra, SpaceType

SPIN = SpaceType("spin", 2)
POINTER = SpaceType("pointer", 1)

OUTCOME_PAIRS = ("++", "+-", "-+", "--")

#: coplanar analyzer angles (degrees) maximizing |S| for the combination
#: S = E(a,b) - E(a,b') + E(a',b) + E(a',b')
CHSH_OPTIMAL_ANGLES_DEG = (0.0, 90.0, 45.0, 135.0)

TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class Direction:
    """Unit 3-vector; analyzer orientation."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.x**2 + self.y**2 + self.z**2)
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"direction has norm {n!r}; must be 1 within 1e-12")

    @classmethod
    def from_cartesian(cls, x: float, y: float, z: float) -> "Direction":
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0:
            raise ValueError("zero vector has no direction")
        return cls(x / n, y / n, z / n)

    @classmethod
    def in_plane_deg(cls, angle_deg: float) -> "Direction":
        """Direction in the x-z plane, measured from +z toward +x."""
        a = math.radians(angle_deg)
        return cls.from_cartesian(math.sin(a), 0.0, math.cos(a))

    def dot(self, other: "Direction") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def spin_eigenvectors(e: Direction) -> tuple[np.ndarray, np.ndarray]:
    """(+1, -1) eigenvectors of ``e . sigma`` in the documented convention."""
    theta = math.atan2(math.hypot(e.x, e.y), e.z)
    phi = math.atan2(e.y, e.x)
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    plus = np.array([c, s * np.exp(1j * phi)], dtype=np.complex128)
    minus = np.array([-s * np.exp(-1j * phi), c], dtype=np.complex128)
    return plus, minus


def singlet_vector(alpha_link: str = "alpha", beta_link: str = "beta") -> LabeledVector:
    """Two-spin total-spin-zero state ``(|ud> - |du>)/sqrt(2)``."""
    amps = np.array([0.0, 1.0, -1.0, 0.0], dtype=np.complex128) / math.sqrt(2.0)
    return LabeledVector(
        [FactorLabel(alpha_link, SPIN), FactorLabel(beta_link, SPIN)], amps
    )


def _unit_pointer(link_id: str) -> LabeledVector:
    return LabeledVector([FactorLabel(link_id, POINTER)], [1.0 + 0.0j])


@dataclass(frozen=True)
class EprSetup:
    """History plus outcome candidates for a fixed pair of settings.

    ``alternatives`` holds the four outcome pairs as merged candidates (one
    product bra spanning both sides), which is the exhaustive set used for
    sampling.  ``side1``/``side2`` hold the per-side candidates used for the
    sequential two-event computation of the same joint probabilities.
    """

    e1: Direction
    e2: Direction
    history: History
    side1: dict[str, dynamics.CandidateEvent]
    side2: dict[str, dynamics.CandidateEvent]
    alternatives: dynamics.AlternativeSet

    def state(self) -> dynamics.CutState:
        return dynamics.cut_state(self.history)


def build_epr(e1: Direction, e2: Direction) -> EprSetup:
    """Assemble the five-event spin experiment for the given settings."""
    history = History()
    history.add_initial_event(_unit_pointer("gamma"), event_id="setting1")
    history.add_initial_event(_unit_pointer("delta"), event_id="setting2")
    history.add_initial_event(singlet_vector("alpha", "beta"), event_id="decay")

    plus1, minus1 = spin_eigenvectors(e1)
    plus2, minus2 = spin_eigenvectors(e2)
    spin1 = {"+": plus1, "-": minus1}
    spin2 = {"+": plus2, "-": minus2}

    side1 = {
        s: dynamics.CandidateEvent(
            bra=ProductBra(
                [
                    LabeledVector([FactorLabel("alpha", SPIN)], spin1[s]),
                    _unit_pointer("gamma"),
                ]
            ),
            c=1.0,
            ket=_unit_pointer("out1"),
            name=f"1{s}",
        )
        for s in "+-"
    }
    side2 = {
        s: dynamics.CandidateEvent(
            bra=ProductBra(
                [
                    LabeledVector([FactorLabel("beta", SPIN)], spin2[s]),
                    _unit_pointer("delta"),
                ]
            ),
            c=1.0,
            ket=_unit_pointer("out2"),
            name=f"2{s}",
        )
        for s in "+-"
    }

    merged = []
    for pair in OUTCOME_PAIRS:
        s1, s2 = pair
        merged.append(
            dynamics.CandidateEvent(
                bra=ProductBra(
                    [
                        LabeledVector([FactorLabel("alpha", SPIN)], spin1[s1]),
                        _unit_pointer("gamma"),
                        LabeledVector([FactorLabel("beta", SPIN)], spin2[s2]),
                        _unit_pointer("delta"),
                    ]
                ),
                c=1.0,
                ket=LabeledVector(
                    [FactorLabel("out1", POINTER), FactorLabel("out2", POINTER)],
                    [1.0 + 0.0j],
                ),
                name=pair,
            )
        )
    return EprSetup(
        e1=e1,
        e2=e2,
        history=history,
        side1=side1,
        side2=side2,
        alternatives=dynamics.AlternativeSet(merged, exhaustive=True),
    )


def joint_distribution(setup: EprSetup) -> np.ndarray:
    """Probabilities of (++, +-, -+, --), via sequential two-event joints."""
    state = setup.state()
    return np.array(
        [
            dynamics.joint_probability(state, [setup.side1[s1], setup.side2[s2]])
            for s1, s2 in OUTCOME_PAIRS
        ]
    )


def correlation(setup: EprSetup) -> float:
    """E = P(++) + P(--) - P(+-) - P(-+); equals minus e1.e2."""
    p = joint_distribution(setup)
    return float(p[0] + p[3] - p[1] - p[2])


def chsh(a: Direction, ap: Direction, b: Direction, bp: Direction) -> float:
    """S = E(a,b) - E(a,b') + E(a',b) + E(a',b')."""
    e = lambda x, y: correlation(build_epr(x, y))
    return e(a, b) - e(a, bp) + e(ap, b) + e(ap, bp)


def chsh_optimal_directions() -> tuple[Direction, Direction, Direction, Direction]:
    return tuple(Direction.in_plane_deg(d) for d in CHSH_OPTIMAL_ANGLES_DEG)


@dataclass(frozen=True)
class DeterministicStrategy:
    """Fixed outcomes per setting: one +/-1 per side and setting index."""

    a_outputs: tuple[int, int]
    b_outputs: tuple[int, int]

    def __post_init__(self):
        for v in self.a_outputs + self.b_outputs:
            if v not in (-1, 1):
                raise ValueError("outputs must be +1 or -1")

    def correlation(self, i: int, j: int) -> float:
        return float(self.a_outputs[i] * self.b_outputs[j])

    def chsh_value(self) -> float:
        e = self.correlation
        return e(0, 0) - e(0, 1) + e(1, 0) + e(1, 1)


@dataclass(frozen=True)
class ClassicalStrategy:
    """Distribution over deterministic per-link assignments."""

    strategies: tuple[DeterministicStrategy, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.strategies) != len(self.weights):
            raise ValueError("one weight per strategy")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")

    def correlation(self, i: int, j: int) -> float:
        return sum(w * s.correlation(i, j) for w, s in zip(self.weights, self.strategies))

    def chsh_value(self) -> float:
        return sum(w * s.chsh_value() for w, s in zip(self.weights, self.strategies))


def enumerate_deterministic_strategies() -> list[DeterministicStrategy]:
    return [
        DeterministicStrategy((a0, a1), (b0, b1))
        for a0, a1, b0, b1 in itertools.product((1, -1), repeat=4)
    ]


def best_classical(
    a: Direction, ap: Direction, b: Direction, bp: Direction
) -> float:
    """Max |S| over all 16 deterministic strategies; the directions only
    fix which abstract settings the strategies answer, so the bound is 2."""
    del a, ap, b, bp
    return max(abs(s.chsh_value()) for s in enumerate_deterministic_strategies())


def mc_frequencies(
    setup: EprSetup, n: int, rng: int | np.random.Generator
) -> np.ndarray:
    """Empirical outcome-pair frequencies over ``n`` sampled realizations."""
    draws = dynamics.sample_many(setup.state(), setup.alternatives, n, rng)
    return np.bincount(draws, minlength=4).astype(float) / float(n)
