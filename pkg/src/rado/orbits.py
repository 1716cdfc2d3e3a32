"""Exact decision procedures for the calculus of orbit types.

Intersection, equality and containment of orbits reduce to finite set
identities on the defining pairs; every operation here is a pure function of
two OrbitType values.
"""

from __future__ import annotations

from typing import Optional

from .ambient import OrbitType


def compatible(o1: OrbitType, o2: OrbitType) -> bool:
    """Whether the two orbits meet (in any realization of the ambient graph)."""
    return o1.h & o2.k == o2.h & o1.k


def intersect(o1: OrbitType, o2: OrbitType) -> Optional[OrbitType]:
    """The orbit carved out by both patterns, or None when they are incompatible.

    Empty intersection is a value, not an error: callers routinely probe
    incompatible pairs.
    """
    if not compatible(o1, o2):
        return None
    return OrbitType(o1.h | o2.h, o1.k | o2.k)


def intersect_all(orbits) -> Optional[OrbitType]:
    """Fold `intersect` over a sequence of orbit types."""
    acc = OrbitType.whole()
    for o in orbits:
        acc = intersect(acc, o)
        if acc is None:
            return None
    return acc


def is_suborbit(o1: OrbitType, o2: OrbitType) -> bool:
    """Whether every member of o1 is a member of o2."""
    return o1.h >= o2.h and o1.k >= o2.k and o2.h & o1.k == o2.k


def orbits_equal(o1: OrbitType, o2: OrbitType) -> bool:
    """Componentwise set equality."""
    return o1.h == o2.h and o1.k == o2.k
