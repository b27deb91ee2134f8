"""Shared builders for the test suite."""

import itertools
import math

import numpy as np
import pytest

from eventweave.dynamics import CandidateEvent, realize
from eventweave.epr import singlet_vector
from eventweave.graph import History
from eventweave.tensors import (
    FactorLabel,
    LabeledVector,
    ProductBra,
    SpaceType,
    random_unit_vector,
)

SPIN = SpaceType("spin", 2)
POINTER = SpaceType("pointer", 1)

SQRT_HALF = 1.0 / math.sqrt(2.0)


def bell_pair(a_id: str, b_id: str) -> LabeledVector:
    return LabeledVector(
        [FactorLabel(a_id, SPIN), FactorLabel(b_id, SPIN)],
        np.array([1, 0, 0, 1], dtype=complex) * SQRT_HALF,
    )


def unit_factor(link_id: str, amps, space=SPIN) -> LabeledVector:
    return LabeledVector([FactorLabel(link_id, space)], amps)


def generic_figure() -> History:
    """Three initial events: two entangled residue pairs plus a singlet."""
    h = History()
    h.add_initial_event(bell_pair("gamma", "res1"), event_id="ap1")
    h.add_initial_event(bell_pair("delta", "res2"), event_id="ap2")
    h.add_initial_event(singlet_vector("alpha", "beta"), event_id="decay")
    return h


def figure_outcome_candidates(rng=None):
    """Candidate events 4 and 5 consuming (alpha, gamma) and (beta, delta)."""
    if rng is None:
        up = np.array([1.0, 0.0], dtype=complex)
        down = np.array([0.0, 1.0], dtype=complex)
        bra4 = ProductBra([unit_factor("alpha", up), unit_factor("gamma", up)])
        # the singlet anticorrelates the two spins, so take the opposite side down
        bra5 = ProductBra([unit_factor("beta", down), unit_factor("delta", up)])
        ket4 = unit_factor("out4", [1.0], POINTER)
        ket5 = unit_factor("out5", [1.0], POINTER)
        c4 = c5 = 1.0
    else:
        bra4 = ProductBra(
            [
                random_unit_vector([FactorLabel("alpha", SPIN)], rng),
                random_unit_vector([FactorLabel("gamma", SPIN)], rng),
            ]
        )
        bra5 = ProductBra(
            [
                random_unit_vector([FactorLabel("beta", SPIN)], rng),
                random_unit_vector([FactorLabel("delta", SPIN)], rng),
            ]
        )
        ket4 = random_unit_vector([FactorLabel("out4", SPIN)], rng)
        ket5 = random_unit_vector([FactorLabel("out5", SPIN)], rng)
        c4 = complex(rng.normal(), rng.normal()) / 2.0
        c5 = complex(rng.normal(), rng.normal()) / 2.0
    e4 = CandidateEvent(bra=bra4, c=c4, ket=ket4, name="ev4")
    e5 = CandidateEvent(bra=bra5, c=c5, ket=ket5, name="ev5")
    return e4, e5


class HistoryFactory:
    """Randomized small histories with a bounded composite size."""

    def __init__(self, rng: np.random.Generator, max_amplitudes: int = 1024):
        self.rng = rng
        self.max_amplitudes = max_amplitudes
        self._link_counter = itertools.count()

    def fresh_labels(self, k: int, current_size: int) -> list[FactorLabel]:
        labels = []
        size = current_size
        for _ in range(k):
            dim = int(self.rng.integers(1, 5))
            if size * dim > self.max_amplitudes:
                dim = 1
            size *= dim
            labels.append(
                FactorLabel(f"L{next(self._link_counter)}", SpaceType(f"d{dim}", dim))
            )
        return labels

    def _frontier_size(self, h: History) -> int:
        size = 1
        for lid in h.free_links():
            size *= h.links[lid].space.dim
        return size

    def random_history(self, max_events: int = 6) -> History:
        h = History()
        n_init = int(self.rng.integers(1, 4))
        for _ in range(n_init):
            labels = self.fresh_labels(
                int(self.rng.integers(1, 4)), self._frontier_size(h)
            )
            h.add_initial_event(random_unit_vector(labels, self.rng))
        n_interior = int(self.rng.integers(0, max_events - n_init + 1))
        for _ in range(n_interior):
            cand = self.random_candidate(h, allow_empty_ket=True)
            if cand is None:
                break
            try:
                realize(h, None, cand)
            except Exception:
                break
        return h

    def random_candidate(
        self,
        h: History,
        links=None,
        n_ket_labels: int | None = None,
        allow_empty_ket: bool = False,
    ) -> CandidateEvent | None:
        free = sorted(h.free_links())
        if not free:
            return None
        if links is None:
            take = min(len(free), int(self.rng.integers(1, 3)))
            links = [free[i] for i in self.rng.choice(len(free), take, replace=False)]
        bra = ProductBra(
            [
                random_unit_vector([FactorLabel(lid, h.links[lid].space)], self.rng)
                for lid in links
            ]
        )
        if n_ket_labels is None:
            low = 0 if allow_empty_ket else 1
            n_ket_labels = int(self.rng.integers(low, 3))
        if n_ket_labels == 0:
            ket = LabeledVector.scalar(1.0)
        else:
            ket = random_unit_vector(
                self.fresh_labels(n_ket_labels, self._frontier_size(h)), self.rng
            )
        c = complex(self.rng.normal(), self.rng.normal()) / 2.0
        if abs(c) < 1e-3:
            c = 1.0
        return CandidateEvent(bra=bra, c=c, ket=ket)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
