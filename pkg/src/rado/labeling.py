"""Labelings of copies: level partition, witness map, and the forced level sizes.

A labeling materializes levels L_0..L_d of a copy together with the witness
map (n, K) -> vertex placing one vertex per adjacency pattern K over the
union of earlier levels.  Level n of a full labeling has exactly m_n
elements, where m_0 = 1 and m_n doubles exponentially; materialization is
therefore capped at depth 3, with sparse single-node access at level 4.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

from .ambient import (AMBIENT, DEFAULT_SEARCH_BOUND, MAX_VALUE_BITS, CopyHandle,
                      FinSet, LabeledHandle, OrbitType, Vertex, finset,
                      least_orbit_member, orbit_member, pattern_matches)
from .errors import PreconditionViolation, SearchExhausted

MAX_LABEL_DEPTH = 3
SPARSE_CAP = 4


@lru_cache(maxsize=None)
def m_sequence(n: int) -> int:
    """Exact level sizes: m_0 = 1, m_n = 2**(sum of earlier sizes)."""
    if n < 0:
        raise PreconditionViolation("level index must be nonnegative")
    if n == 0:
        return 1
    return 1 << sum(m_sequence(i) for i in range(n))


def subsets_in_order(ground):
    """All subsets of a sorted ground tuple, in bitmask order (deterministic)."""
    ground = tuple(ground)
    for mask in range(1 << len(ground)):
        yield frozenset(ground[i] for i in range(len(ground)) if (mask >> i) & 1)


# chooser(base, level, ground_tuple, K) -> vertex
Chooser = Callable[[CopyHandle, int, tuple, frozenset], Vertex]


@dataclass
class Labeling:
    """Materialized levels plus the witness map of one labeling.

    Construction mutates the witness table (single writer); a completed
    Labeling is treated as immutable and may be shared freely.
    """

    base: CopyHandle
    levels: list
    witness: dict
    start_variant: int = 0
    seed_levels: int = 0
    sparse_cap: int = SPARSE_CAP
    chooser: Optional[Chooser] = None
    search_bound: int = DEFAULT_SEARCH_BOUND

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def union_below(self, n: int) -> FinSet:
        return frozenset(v for lv in self.levels[:n] for v in lv)

    def ground_tuple(self, n: int) -> tuple:
        return tuple(sorted(self.union_below(n)))

    def vertices(self) -> tuple:
        return tuple(sorted(v for lv in self.levels for v in lv))

    def handle(self) -> LabeledHandle:
        return LabeledHandle(self.vertices(), tuple(frozenset(lv) for lv in self.levels))

    def node_vertex(self, n: int, k) -> Vertex:
        return node_vertex(self, n, k)


def _shifted_least(base: CopyHandle, o: OrbitType, cutoff: Vertex, search_bound: int) -> Vertex:
    """Least orbit member under the enumeration shifted to start at `cutoff`."""
    try:
        return least_orbit_member(o, cutoff, base, search_bound)
    except SearchExhausted:
        # wrap-around part of the shifted order: members below the cutoff
        for v in base.members():
            if v >= cutoff:
                break
            if pattern_matches(v, o):
                return v
        raise


def label(c: CopyHandle, depth: int, start_variant: int = 0,
          chooser: Optional[Chooser] = None,
          search_bound: int = DEFAULT_SEARCH_BOUND) -> Labeling:
    """Build a labeling of c with levels 0..depth materialized.

    The default witness rule takes the least orbit member under the
    enumeration whose minimum is the start_variant-th element of c; a custom
    chooser may place witnesses inside smaller copies instead.
    """
    if depth < 0 or depth > MAX_LABEL_DEPTH:
        raise PreconditionViolation(f"depth must be in 0..{MAX_LABEL_DEPTH}")
    if start_variant < 0:
        raise PreconditionViolation("start_variant must be nonnegative")
    cutoff = c.vertex_at(start_variant)
    lab = Labeling(base=c, levels=[], witness={}, start_variant=start_variant,
                   chooser=chooser, search_bound=search_bound)
    for n in range(depth + 1):
        ground = lab.ground_tuple(n)
        level = []
        for k in subsets_in_order(ground):
            if chooser is not None:
                v = chooser(c, n, ground, k)
            else:
                v = _shifted_least(c, OrbitType(finset(ground), k), cutoff, search_bound)
            lab.witness[(n, k)] = v
            level.append(v)
        lab.levels.append(tuple(sorted(level)))
    return lab


def node_vertex(lab: Labeling, n: int, k) -> Vertex:
    """The witness vertex of node (n, K); computed sparsely one level past depth."""
    k = finset(k)
    key = (n, k)
    if key in lab.witness:
        return lab.witness[key]
    if n < lab.seed_levels:
        raise PreconditionViolation(f"level {n} is a seed level with no witness map")
    ground = lab.union_below(n)
    if not k <= ground:
        raise PreconditionViolation(
            f"K={sorted(k)} is not a subset of the union below level {n}")
    if n <= lab.depth:
        raise PreconditionViolation(f"labeling is inconsistent: missing witness for level {n}")
    if n == lab.depth + 1 and n <= lab.sparse_cap:
        if lab.chooser is not None:
            v = lab.chooser(lab.base, n, tuple(sorted(ground)), k)
        else:
            cutoff = lab.base.vertex_at(lab.start_variant)
            v = _shifted_least(lab.base, OrbitType(ground, k), cutoff, lab.search_bound)
        lab.witness[key] = v
        return v
    raise PreconditionViolation(
        f"level {n} is beyond the sparse cap ({lab.sparse_cap}) of this labeling")


@dataclass
class LabelingReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": self.violations}


def verify_labeling(lab: Labeling) -> LabelingReport:
    """Re-check the labeling axioms on every materialized level."""
    report = LabelingReport()
    seen = {}
    for n, lv in enumerate(lab.levels):
        for v in lv:
            if v in seen:
                report.violations.append(
                    {"rule": "L1", "detail": f"vertex {v} appears in levels {seen[v]} and {n}"})
            seen[v] = n

    for n in range(lab.seed_levels, lab.depth + 1):
        ground = lab.union_below(n)
        keys = [k for (m, k) in lab.witness if m == n]
        expected = 1 << len(ground)
        if len(keys) != expected or any(not k <= ground for k in keys):
            report.violations.append(
                {"rule": "L2", "detail": f"level {n} witness map does not cover P(union) "
                                         f"({len(keys)} keys, expected {expected})"})
        values = [lab.witness[(n, k)] for k in keys]
        if len(set(values)) != len(values) or set(values) != set(lab.levels[n]):
            report.violations.append(
                {"rule": "L3", "detail": f"level {n} witness map is not a bijection onto L_{n}"})
        if lab.seed_levels == 0:
            if len(lab.levels[n]) != m_sequence(n):
                report.violations.append(
                    {"rule": "size", "detail": f"|L_{n}| = {len(lab.levels[n])}, expected m_{n} = {m_sequence(n)}"})
        elif len(lab.levels[n]) != expected:
            report.violations.append(
                {"rule": "size", "detail": f"|L_{n}| = {len(lab.levels[n])}, expected {expected}"})
        for k in keys:
            v = lab.witness[(n, k)]
            if not orbit_member(v, OrbitType(ground, k), lab.base):
                report.violations.append(
                    {"rule": "L4", "detail": f"witness {v} of (n={n}, K={sorted(k)}) "
                                             f"is not in its orbit"})
    return report
