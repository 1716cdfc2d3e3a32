"""Copies built inside copies: prescribed-orbit labelings, the anti-symmetric
back-and-forth isomorphism between the two orbits of a pivot, the extendible
base copy, and the two-sided splitting recursion.

All witness choices are the least admissible vertex, so every construction
here is deterministic.  Value sizes in the derived constructions can grow
doubly exponentially with the level index; searches are guarded and raise
SearchExhausted instead of attempting infeasible vertices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .ambient import (AMBIENT, DEFAULT_SEARCH_BOUND, MAX_VALUE_BITS, CopyHandle,
                      FilteredHandle, FinSet, OrbitType, Vertex, adjacent, finset,
                      least_orbit_member, orbit_copy, orbit_of, orbit_members,
                      pattern_matches, remove_finite)
from .errors import PreconditionViolation, SearchExhausted
from .labeling import Chooser, Labeling, label, node_vertex, subsets_in_order
from .orbits import intersect_all

#: Materializing a level with more nodes than this is refused outright.
LEVEL_SIZE_CAP = 4096


def build_copy_in(a: CopyHandle, depth: int, chooser: Optional[Chooser] = None,
                  search_bound: int = DEFAULT_SEARCH_BOUND) -> Labeling:
    """A labeling whose witnesses all lie in the orbits of the given copy."""
    return label(a, depth, 0, chooser, search_bound)


class PartialIso:
    """A growable partial map between the two orbits of a pivot.

    Every extension preserves: injectivity, edges, the exchange law
    u ~ f(v) <=> f(u) ~ v, and the avoidance constraint that no element of
    avoid_f maps into avoid_g.
    """

    def __init__(self, pivot: Vertex, avoid_f=(), avoid_g=(),
                 search_bound: int = DEFAULT_SEARCH_BOUND,
                 max_bits: int = MAX_VALUE_BITS):
        self.pivot = pivot
        self.avoid_f = finset(avoid_f)
        self.avoid_g = finset(avoid_g)
        self.search_bound = search_bound
        self.max_bits = max_bits
        dom_orbit = OrbitType(finset([pivot]), finset([pivot]))
        ran_orbit = OrbitType(finset([pivot]), finset())
        for u in self.avoid_f:
            if not pattern_matches(u, dom_orbit):
                raise PreconditionViolation(f"avoid_f element {u} is not adjacent to the pivot")
        for v in self.avoid_g:
            if not pattern_matches(v, ran_orbit):
                raise PreconditionViolation(f"avoid_g element {v} is adjacent to the pivot")
        self._fwd = {}
        self._inv = {}
        self._order = []

    @property
    def pairs(self):
        return [(u, self._fwd[u]) for u in self._order]

    def domain(self):
        return tuple(sorted(self._fwd))

    def range_(self):
        return tuple(sorted(self._inv))

    def has_domain(self, u):
        return u in self._fwd

    def has_range(self, v):
        return v in self._inv

    def value(self, u):
        if u not in self._fwd:
            raise PreconditionViolation(f"{u} is not in the domain of the partial map")
        return self._fwd[u]

    def inverse(self, v):
        if v not in self._inv:
            raise PreconditionViolation(f"{v} is not in the range of the partial map")
        return self._inv[v]

    def _record(self, u, v):
        self._fwd[u] = v
        self._inv[v] = u
        self._order.append(u)

    def extend_domain(self, u1: Vertex) -> Vertex:
        """Absorb u1 into the domain; returns its (possibly new) image."""
        if u1 in self._fwd:
            return self._fwd[u1]
        p = self.pivot
        if not pattern_matches(u1, OrbitType(finset([p]), finset([p]))):
            raise PreconditionViolation(f"{u1} is not in the domain orbit of pivot {p}")
        dom = finset(self._fwd)
        ran = finset(self._inv)
        h = finset(u for u in dom if adjacent(u, u1))
        l = finset(u for u in dom if adjacent(self._fwd[u], u1))
        target = intersect_all([
            OrbitType(finset([p]), finset()),
            OrbitType(dom, l),
            OrbitType(ran, finset(self._fwd[u] for u in h)),
        ])
        if target is None:  # disjoint H-sets make this impossible
            raise SearchExhausted("image orbit is empty")
        v1 = least_orbit_member(target, 0, remove_finite(AMBIENT, self.avoid_g),
                                self.search_bound, self.max_bits)
        self._record(u1, v1)
        return v1

    def extend_range(self, v1: Vertex) -> Vertex:
        """Absorb v1 into the range; returns its (possibly new) preimage."""
        if v1 in self._inv:
            return self._inv[v1]
        p = self.pivot
        if not pattern_matches(v1, OrbitType(finset([p]), finset())):
            raise PreconditionViolation(f"{v1} is not in the range orbit of pivot {p}")
        dom = finset(self._fwd)
        ran = finset(self._inv)
        h = finset(v for v in ran if adjacent(v, v1))
        l = finset(u for u in dom if adjacent(u, v1))
        target = intersect_all([
            OrbitType(finset([p]), finset([p])),
            OrbitType(dom, finset(self._inv[v] for v in h)),
            OrbitType(ran, finset(self._fwd[u] for u in l)),
        ])
        if target is None:
            raise SearchExhausted("preimage orbit is empty")
        u1 = least_orbit_member(target, 0, remove_finite(AMBIENT, self.avoid_f),
                                self.search_bound, self.max_bits)
        self._record(u1, v1)
        return u1

    def check(self):
        """Re-verify conditions (i)-(iv) on all pairs; returns violation strings."""
        out = []
        if len(set(self._fwd.values())) != len(self._fwd):
            out.append("(i) map is not injective")
        items = sorted(self._fwd.items())
        for (u, fu), (v, fv) in itertools.combinations(items, 2):
            if adjacent(u, v) != adjacent(fu, fv):
                out.append(f"(ii) edge not preserved on ({u},{v})")
        for u, fu in items:
            for v, fv in items:
                if adjacent(u, fv) != adjacent(fu, v):
                    out.append(f"(iii) exchange law fails on ({u},{v})")
        for u in self.avoid_f:
            if u in self._fwd and self._fwd[u] in self.avoid_g:
                out.append(f"(iv) {u} maps into the avoided range set")
        return out


def back_and_forth(p: Vertex, avoid_f=(), avoid_g=(), steps: int = 0,
                   search_bound: int = DEFAULT_SEARCH_BOUND) -> PartialIso:
    """Run the canonical alternating schedule for `steps` rounds.

    Round 2k absorbs the k-th element of the pivot's adjacent orbit into the
    domain; round 2k+1 absorbs the k-th element of the non-adjacent orbit
    into the range.  Rounds whose target is already covered are no-ops.
    """
    iso = PartialIso(p, avoid_f, avoid_g, search_bound)
    dom_stream = orbit_members(OrbitType(finset([p]), finset([p])))
    ran_stream = orbit_members(OrbitType(finset([p]), finset()))
    dom_prefix, ran_prefix = [], []
    for step in range(steps):
        k = step // 2
        if step % 2 == 0:
            while len(dom_prefix) <= k:
                dom_prefix.append(next(dom_stream))
            iso.extend_domain(dom_prefix[k])
        else:
            while len(ran_prefix) <= k:
                ran_prefix.append(next(ran_stream))
            if not iso.has_range(ran_prefix[k]):
                iso.extend_range(ran_prefix[k])
    return iso


@dataclass
class ExtendibleBase(Labeling):
    """An extendible base copy: seed levels plus triple-intersection witnesses.

    Level 0 holds the avoided domain set, level 1 the preimage of the avoided
    range set; every later witness realizes its pattern simultaneously over
    the union so far and over its image under the partial isomorphism.
    """

    pivot: Vertex = 0
    iso: Optional[PartialIso] = None


def _triple_chooser(pivot: Vertex, iso: PartialIso, search_bound: int) -> Chooser:
    def choose(base, n, ground, k):
        for u in ground:
            iso.extend_domain(u)
        f_ground = finset(iso.value(u) for u in ground)
        f_k = finset(iso.value(u) for u in k)
        target = intersect_all([
            OrbitType(finset([pivot]), finset([pivot])),
            OrbitType(finset(ground), finset(k)),
            OrbitType(f_ground, f_k),
        ])
        if target is None:
            raise SearchExhausted("triple-intersection orbit is empty")
        return least_orbit_member(target, 0, AMBIENT, search_bound)
    return choose


def extendible_base(p: Vertex, avoid_f=(), avoid_g=(), iso: Optional[PartialIso] = None,
                    depth: int = 2, search_bound: int = DEFAULT_SEARCH_BOUND) -> ExtendibleBase:
    """Build the extendible base copy below the pivot's adjacent orbit.

    `depth` counts generated pattern levels: the result materializes the two
    seed levels plus generated levels 2..depth+2.  The partial isomorphism is
    grown on demand; growth failures surface as SearchExhausted.
    """
    if depth < 0 or depth > 3:
        raise PreconditionViolation("depth must be in 0..3")
    avoid_f = finset(avoid_f)
    avoid_g = finset(avoid_g)
    if iso is None:
        iso = PartialIso(p, avoid_f, avoid_g, search_bound)
    if iso.pivot != p:
        raise PreconditionViolation("the partial map belongs to a different pivot")
    chooser = _triple_chooser(p, iso, search_bound)
    lab = ExtendibleBase(
        base=orbit_copy(AMBIENT, OrbitType(finset([p]), finset([p]))),
        levels=[], witness={}, seed_levels=2, chooser=chooser,
        search_bound=search_bound, pivot=p, iso=iso)
    lab.levels.append(tuple(sorted(avoid_f)))
    lab.levels.append(tuple(sorted(iso.extend_range(g) for g in sorted(avoid_g))))
    for n in range(2, depth + 3):
        ground = lab.ground_tuple(n)
        if 1 << len(ground) > LEVEL_SIZE_CAP:
            raise SearchExhausted(f"level {n} would have 2**{len(ground)} nodes")
        level = []
        for k in subsets_in_order(ground):
            v = chooser(lab.base, n, ground, k)
            lab.witness[(n, k)] = v
            level.append(v)
        lab.levels.append(tuple(sorted(level)))
    lab.sparse_cap = lab.depth + 1
    return lab


@dataclass(frozen=True)
class PickRecord:
    """One step of the splitting recursion: block (i0, j), pattern index r."""

    i0: int
    j: int
    r: int
    pattern: FinSet      # prescribed pattern K_r over the current ground set
    level: int           # base level the pick was taken from
    node_key: FinSet     # the pick as a labeling node (its K over the union below)
    vertex: Vertex


@dataclass
class SplitTrace:
    """Blocks, picks and the glued prefix of the splitting recursion."""

    pivot: Vertex
    rounds: int
    records: list
    a0: FinSet
    a1: FinSet
    glued: FinSet

    @property
    def blocks(self):
        out = {}
        for rec in self.records:
            out.setdefault((rec.i0, rec.j), []).append(rec.level)
        return {key: tuple(levels) for key, levels in out.items()}

    @property
    def picks(self):
        out = {}
        for rec in self.records:
            out.setdefault(rec.level, []).append(rec.vertex)
        return {lvl: tuple(vs) for lvl, vs in out.items()}

    def glued_handle(self) -> CopyHandle:
        members = self.glued
        return FilteredHandle(AMBIENT, lambda v: v in members,
                              data={"type": "explicit", "set": sorted(members)})


def _find_pick(a: CopyHandle, base: ExtendibleBase, ground, k_r, min_level,
               used_keys, picked):
    """Least admissible (level, node) realizing pattern k_r over the ground set."""
    ground_set = finset(ground)
    for n in range(max(min_level, 2), base.depth + 2):
        below = base.union_below(n)
        if not ground_set <= below:
            continue
        free = tuple(sorted(below - ground_set))
        for extra in subsets_in_order(free):
            key = k_r | extra
            if (n, key) in used_keys:
                continue
            v = node_vertex(base, n, key)
            if v in picked:
                continue
            if a.contains(v):
                return n, key, v
    raise SearchExhausted(
        f"no admissible pick for pattern {sorted(k_r)} at levels <= {base.depth + 1}")


def split_extendible(a: CopyHandle, base: ExtendibleBase, iso: PartialIso,
                     rounds: int, search_bound: int = DEFAULT_SEARCH_BOUND) -> SplitTrace:
    """Run `rounds` values of the splitting recursion and glue the two sides.

    Picks realize every pattern over the accumulated ground set, one pattern
    per pick, at the lowest base levels lying strictly above all picks of
    earlier rounds.  Within a round a level may supply several picks (one per
    unused node); the strictly-separated blocks of the unbounded construction
    do not fit inside a materializable base.
    """
    if rounds < 0:
        raise PreconditionViolation("rounds must be nonnegative")
    if iso is not base.iso:
        raise PreconditionViolation("the splitting recursion must reuse the base's partial map")
    base_vertices = frozenset(base.vertices())
    for v in a.first(3):
        if v not in base_vertices:
            raise PreconditionViolation(f"handle member {v} is not a materialized base vertex")
    l0 = finset(base.levels[0])
    l1 = finset(base.levels[1])
    for v in l0 | l1:
        if not a.contains(v):
            raise PreconditionViolation("the avoid sets of the base must lie inside the handle")

    records = []
    used_keys = set()
    picked = set()
    prev_max_level = 1
    for i0 in range(2, 2 + rounds):
        ground = tuple(sorted(l0 | l1 | finset(rec.vertex for rec in records)))
        if len(ground) > 16:
            raise SearchExhausted(f"ground set of round {i0} has {len(ground)} elements")
        round_floor = prev_max_level + 1
        round_max = prev_max_level
        for j in (0, 1):
            cursor = round_floor
            for r, k_r in enumerate(subsets_in_order(ground)):
                n, key, v = _find_pick(a, base, ground, k_r, cursor, used_keys, picked)
                used_keys.add((n, key))
                picked.add(v)
                records.append(PickRecord(i0, j, r, k_r, n, key, v))
                cursor = n
                round_max = max(round_max, n)
        prev_max_level = round_max

    a0 = l0 | finset(rec.vertex for rec in records if rec.j == 0)
    a1 = l1 | finset(rec.vertex for rec in records if rec.j == 1)
    glued = a0 | {base.pivot} | finset(iso.extend_domain(u) for u in sorted(a1))
    return SplitTrace(base.pivot, rounds, records, a0, a1, glued)
