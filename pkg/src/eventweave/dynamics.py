"""Probability law for extending a history by new events.

The state attached to a past-closed cut is the tensor product of the
residual vectors of its unsaturated events, returned unit-normalized.  A
candidate extension is a rank-1 operator; its probability is the squared
norm of the operator applied to the cut state.  Joint probabilities apply
several operators with pairwise disjoint backward links in sequence, which
makes them independent of the ordering.

Convention: after a candidate is realized the surviving branch vector is
renormalized to unit norm.  That makes the chain rule hold exactly,
``P(e, f) = P(e) * P(f | state after e)``, and it is also what makes the
probabilities of an exhaustive alternative set sum to one at every step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    NotExhaustive,
    OverlappingBackwardLinks,
    ZeroProbabilityEvent,
)
from .graph import Cut, History, Region, EVENT_VECTOR_TOL
from .tensors import (
    EventOperator,
    LabeledVector,
    ProductBra,
    apply_event_operator,
    contract,
    squared_norm,
    tensor_product,
)

#: alternative sets must cover probability one within this tolerance
EXHAUSTIVE_TOL = 1e-9

#: below this squared norm a branch counts as impossible
ZERO_PROBABILITY_EPS = 1e-24


@dataclass(frozen=True)
class CutState:
    """Unit probability source for extensions of a cut.

    ``contributing_events`` is informational; the physics is entirely in
    ``composite``, whose labels are the cut's free links.
    """

    contributing_events: tuple[str, ...]
    composite: LabeledVector


@dataclass(frozen=True)
class CandidateEvent:
    """A possible next event: backward ties, scalar weight, emitted ket."""

    bra: ProductBra
    c: complex
    ket: LabeledVector
    region: Region | None = None
    name: str | None = None

    def __post_init__(self):
        if not self.ket.is_unit(EVENT_VECTOR_TOL):
            raise ValueError(
                f"candidate ket has squared norm {self.ket.squared_norm()!r}"
            )
        object.__setattr__(self, "c", complex(self.c))

    def as_operator(self) -> EventOperator:
        return EventOperator(self.c, self.bra, self.ket)


@dataclass
class AlternativeSet:
    """Mutually exclusive candidates; exhaustive sets must sum to one."""

    candidates: list[CandidateEvent]
    exhaustive: bool = True

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("an alternative set needs at least one candidate")


def cut_state(history: History, cut: Cut | Iterable[str] | None = None) -> CutState:
    """State of a past-closed cut (``None`` means the full frontier).

    Each unsaturated event contributes its emitted vector, partially
    contracted with the bra factors of those forward links whose absorbing
    event lies inside the cut.  Events saturated relative to the cut drop
    out entirely; the composite is renormalized at the end.
    """
    if cut is None:
        cut = history.frontier_cut()
    elif not isinstance(cut, Cut):
        cut = Cut.of(cut)
    history.validate_cut(cut)
    inside = cut.past_event_ids
    contributors: list[str] = []
    composite = LabeledVector.scalar(1.0)
    for eid in sorted(inside):
        ev = history.events[eid]
        absorbed = []
        n_free = 0
        for lid in ev.forward_links:
            ln = history.links[lid]
            if ln.target is not None and ln.target in inside:
                absorbed.append(history.events[ln.target].bra.factor(lid))
            else:
                n_free += 1
        if n_free == 0:
            continue
        vec = ev.emitted_vector
        if absorbed:
            vec = contract(ProductBra(absorbed), vec)
        composite = tensor_product(composite, vec)
        contributors.append(eid)
    total = composite.squared_norm()
    if total <= ZERO_PROBABILITY_EPS:
        raise ZeroProbabilityEvent(
            f"cut state has squared norm {total!r}; this past never happens"
        )
    if abs(total - 1.0) > 1e-15:
        composite = composite.scaled(1.0 / np.sqrt(total))
    return CutState(tuple(contributors), composite)


def event_probability(state: CutState, cand: CandidateEvent) -> float:
    """Squared norm of the candidate's operator applied to the state."""
    return squared_norm(apply_event_operator(cand.as_operator(), state.composite))


def joint_probability(state: CutState, cands: Sequence[CandidateEvent]) -> float:
    """Probability of a joint pattern of spacelike candidates.

    The candidates must consume pairwise disjoint links; the value is then
    invariant under reordering.
    """
    seen: dict[str, int] = {}
    for i, cand in enumerate(cands):
        for lid in cand.bra.label_ids:
            if lid in seen:
                raise OverlappingBackwardLinks(
                    f"candidates {seen[lid]} and {i} both consume link {lid!r}"
                )
            seen[lid] = i
    vec = state.composite
    for cand in cands:
        vec = apply_event_operator(cand.as_operator(), vec)
    return squared_norm(vec)


def realized_state(state: CutState, cand: CandidateEvent) -> tuple[float, CutState]:
    """Probability of the candidate plus the renormalized post-event state."""
    vec = apply_event_operator(cand.as_operator(), state.composite)
    p = squared_norm(vec)
    if p <= ZERO_PROBABILITY_EPS:
        raise ZeroProbabilityEvent(f"candidate has probability {p!r}")
    new_contrib = state.contributing_events + ((cand.name or "<new>",))
    return p, CutState(new_contrib, vec.scaled(1.0 / np.sqrt(p)))


def alternative_probabilities(
    state: CutState, alts: AlternativeSet
) -> np.ndarray:
    """Per-candidate probabilities; enforces the exhaustiveness contract."""
    probs = np.array(
        [event_probability(state, cand) for cand in alts.candidates], dtype=float
    )
    total = float(probs.sum())
    if alts.exhaustive and abs(total - 1.0) > EXHAUSTIVE_TOL:
        raise NotExhaustive(total, EXHAUSTIVE_TOL)
    # even a non-exhaustive set must never exceed probability one
    if total - 1.0 > EXHAUSTIVE_TOL:
        raise NotExhaustive(total, EXHAUSTIVE_TOL)
    return probs


def _as_generator(rng: int | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_extension(
    state: CutState, alts: AlternativeSet, rng: int | np.random.Generator
) -> int:
    """Draw one candidate index, weighted by event probabilities.

    ``rng`` may be an integer seed (a fresh PCG64 generator is built from
    it) or a live generator.  Exactly one uniform variate is consumed per
    draw, so interleaving single draws and :func:`sample_many` on a shared
    generator yields one reproducible stream.
    """
    probs = alternative_probabilities(state, alts)
    gen = _as_generator(rng)
    u = gen.random()
    return int(np.searchsorted(np.cumsum(probs), u, side="right").clip(0, len(probs) - 1))


def sample_many(
    state: CutState, alts: AlternativeSet, n: int, rng: int | np.random.Generator
) -> np.ndarray:
    """Vector of ``n`` draws; stream-equivalent to ``n`` single draws."""
    probs = alternative_probabilities(state, alts)
    gen = _as_generator(rng)
    u = gen.random(n)
    cum = np.cumsum(probs)
    return np.searchsorted(cum, u, side="right").clip(0, len(probs) - 1)


def replica_rng(seed: int, replica: int = 0) -> np.random.Generator:
    """Documented per-replica stream: ``default_rng([seed, replica])``."""
    return np.random.default_rng([int(seed), int(replica)])


def realize(
    history: History,
    cut: Cut | Iterable[str] | None,
    cand: CandidateEvent,
    event_id: str | None = None,
) -> str:
    """Turn a possible event into a fact.

    Raises :class:`ZeroProbabilityEvent` when the candidate's probability
    on the cut state vanishes; otherwise the consumed links become
    established and the candidate's ket labels become fresh free links.
    Returns the new event id.
    """
    state = cut_state(history, cut)
    p = event_probability(state, cand)
    if p <= ZERO_PROBABILITY_EPS:
        raise ZeroProbabilityEvent(
            f"candidate {cand.name or ''!r} has probability {p!r} on this cut"
        )
    return history.add_interior_event(
        cand.bra, cand.c, cand.ket, region=cand.region, event_id=event_id
    )
