"""One fixed countable random graph, realized lazily by an arithmetic rule.

The ambient graph lives on the natural numbers: for u < v, u and v are
adjacent iff the u-th binary digit of v is 1.  Adjacency is decidable, every
finite adjacency pattern has a closed-form witness, and copies of the graph
are represented as handles (membership predicate + strictly increasing
enumeration) rather than as data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .errors import PreconditionViolation, SearchExhausted

Vertex = int
FinSet = frozenset  # frozenset[int], canonically handled via sorted() at the edges

DEFAULT_SEARCH_BOUND = 10_000
DEFAULT_BACKTRACK_BUDGET = 10_000
MAX_PATTERN_DEPTH = 5
#: Hard guard on the bit-length of any vertex produced by a search.  Witness
#: values in derived constructions can grow doubly exponentially; the guard
#: turns that into SearchExhausted instead of an out-of-memory crash.
MAX_VALUE_BITS = 1 << 22


def finset(items=()) -> FinSet:
    """Canonical finite vertex set."""
    s = frozenset(items)
    for v in s:
        if not isinstance(v, int) or v < 0:
            raise PreconditionViolation(f"vertex sets hold nonnegative integers, got {v!r}")
    return s


def adjacent(u: Vertex, v: Vertex) -> bool:
    """Edge relation of the ambient graph: bit min(u,v) of max(u,v)."""
    if u < 0 or v < 0:
        raise PreconditionViolation("vertices are nonnegative integers")
    if u == v:
        return False
    if u > v:
        u, v = v, u
    return (v >> u) & 1 == 1


@dataclass(frozen=True)
class OrbitType:
    """A pair (H, K), K subset of H: the vertices outside H adjacent exactly to K."""

    h: FinSet
    k: FinSet

    def __post_init__(self):
        object.__setattr__(self, "h", finset(self.h))
        object.__setattr__(self, "k", finset(self.k))
        if not self.k <= self.h:
            raise PreconditionViolation(f"K must be a subset of H, got K={sorted(self.k)} H={sorted(self.h)}")

    @classmethod
    def whole(cls) -> "OrbitType":
        return cls(frozenset(), frozenset())

    def to_json(self) -> dict:
        return {"H": sorted(self.h), "K": sorted(self.k)}

    @classmethod
    def from_json(cls, obj: dict) -> "OrbitType":
        return cls(finset(obj["H"]), finset(obj["K"]))

    def __repr__(self):
        return f"OrbitType(H={sorted(self.h)}, K={sorted(self.k)})"


def orbit_of(v: Vertex, ground) -> FinSet:
    """The adjacency pattern of v over a finite ground set."""
    return frozenset(u for u in ground if adjacent(u, v))


def pattern_matches(v: Vertex, o: OrbitType) -> bool:
    """Ambient-level orbit membership: v outside H with pattern exactly K."""
    if v in o.h:
        return False
    return all(adjacent(v, h) == (h in o.k) for h in o.h)


# ---------------------------------------------------------------------------
# Ascending enumeration of an orbit.
#
# Members v of the orbit (H, K) split into zones by comparison with the
# elements of H.  Constraints from h < v are bits of v at position h;
# constraints from h > v say that position v of h carries a prescribed bit.
# Both kinds admit integer-level arithmetic, so enumeration never scans
# vertex-by-vertex through large gaps.
# ---------------------------------------------------------------------------


def _next_with_bits(start: int, ones: int, zeros: int) -> int:
    """Least v >= start with every `ones` bit set and every `zeros` bit clear."""
    w = (start | ones) & ~zeros
    if w >= start:
        if w > start:
            # the deciding bit came from `ones`; minimize everything below it
            b = (w ^ start).bit_length() - 1
            mask = (1 << b) - 1
            w = (w & ~mask) | (ones & mask)
        return w
    # clearing a `zeros` bit dropped below start: bump the lowest usable
    # position above the highest lost bit
    b = (start & ~w).bit_length() - 1
    p = b + 1
    while ((zeros >> p) & 1) or ((w >> p) & 1):
        p += 1
    mask = (1 << p) - 1
    return ((w >> p) << p) | (1 << p) | (ones & mask)


def orbit_members(o: OrbitType, start: int = 0, max_bits: int = MAX_VALUE_BITS) -> Iterator[Vertex]:
    """Yield the ambient members of the orbit in strictly increasing order.

    The stream ends when the next member would exceed `max_bits` binary
    digits; callers translate that into SearchExhausted.
    """
    hs = sorted(o.h)
    m = len(hs)
    for i in range(m + 1):
        lo = hs[i - 1] + 1 if i > 0 else 0
        hi = hs[i] if i < m else None
        if hi is not None and hi <= start:
            continue
        lower = hs[:i]
        upper = hs[i:]
        ones = 0
        zeros = 0
        for h in lower:
            if h in o.k:
                ones |= 1 << h
            else:
                zeros |= 1 << h
        must_one = [h for h in upper if h in o.k]
        must_zero = [h for h in upper if h not in o.k]
        first = max(lo, start)
        if must_one:
            # candidates are common set-bit positions of the must-one elements
            allowed = must_one[0]
            for h in must_one[1:]:
                allowed &= h
            for h in must_zero:
                allowed &= ~h
            allowed >>= first
            p = first
            while allowed:
                step = (allowed & -allowed).bit_length() - 1
                p += step
                allowed >>= step + 1
                if hi is not None and p >= hi:
                    break
                if (p & ones) == ones and (p & zeros) == 0:
                    yield p
                p += 1
        else:
            v = _next_with_bits(first, ones, zeros)
            while hi is None or v < hi:
                if v.bit_length() > max_bits:
                    return
                if not any((h >> v) & 1 for h in must_zero):
                    yield v
                v = _next_with_bits(v + 1, ones, zeros)


# ---------------------------------------------------------------------------
# Copy handles
# ---------------------------------------------------------------------------


class CopyHandle:
    """A lazily enumerable subset of the ambient graph.

    Handles are immutable and stateless: `members` recomputes its stream on
    every call, so sharing between threads needs no synchronization.
    """

    kind = "abstract"

    def contains(self, v: Vertex) -> bool:
        raise NotImplementedError

    def members(self, start: Vertex = 0, max_bits: int = MAX_VALUE_BITS) -> Iterator[Vertex]:
        raise NotImplementedError

    def first(self, count: int, max_bits: int = MAX_VALUE_BITS) -> list:
        return list(itertools.islice(self.members(max_bits=max_bits), count))

    def vertex_at(self, index: int, max_bits: int = MAX_VALUE_BITS) -> Vertex:
        for v in itertools.islice(self.members(max_bits=max_bits), index, index + 1):
            return v
        raise SearchExhausted(f"handle has no element at index {index}")

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class AmbientHandle(CopyHandle):
    """The whole ambient graph."""

    kind = "ambient"

    def contains(self, v):
        return isinstance(v, int) and v >= 0

    def members(self, start=0, max_bits=MAX_VALUE_BITS):
        return iter(itertools.count(start))

    def describe(self):
        return {"kind": "ambient"}


AMBIENT = AmbientHandle()


@dataclass(frozen=True)
class OrbitRestrictedHandle(CopyHandle):
    """Members of the base handle realizing a fixed orbit pattern."""

    base: CopyHandle
    orbit: OrbitType

    kind = "orbit"

    def contains(self, v):
        return self.base.contains(v) and pattern_matches(v, self.orbit)

    def members(self, start=0, max_bits=MAX_VALUE_BITS):
        eff = effective_orbit(self)
        if eff == "empty":
            return iter(())
        if isinstance(eff, OrbitType):
            return orbit_members(eff, start, max_bits)
        return (v for v in orbit_members(self.orbit, start, max_bits) if self.base.contains(v))

    def describe(self):
        return {"kind": "orbit", "base": self.base.describe(), "orbit": self.orbit.to_json()}


@dataclass(frozen=True)
class FilteredHandle(CopyHandle):
    """Members of the base handle passing a decidable predicate."""

    base: CopyHandle
    predicate: Callable[[Vertex], bool]
    data: dict = field(default_factory=dict)

    kind = "filtered"

    def contains(self, v):
        return self.base.contains(v) and self.predicate(v)

    def members(self, start=0, max_bits=MAX_VALUE_BITS):
        return (v for v in self.base.members(start, max_bits) if self.predicate(v))

    def describe(self):
        return {"kind": "filtered", "base": self.base.describe(), "filter": self.data or {"type": "opaque"}}


@dataclass(frozen=True)
class LabeledHandle(CopyHandle):
    """The finite vertex set of a materialized labeling prefix.

    Semantically this is a finite approximation of a copy; the extension
    property is verified at finite depth by `verify_copy`, never guaranteed.
    """

    vertices: tuple
    levels: tuple = ()

    kind = "labeled"

    def contains(self, v):
        return v in frozenset(self.vertices)

    def members(self, start=0, max_bits=MAX_VALUE_BITS):
        return (v for v in self.vertices if v >= start)

    def describe(self):
        return {"kind": "labeled", "vertices": list(self.vertices),
                "levels": [sorted(lv) for lv in self.levels]}


def _combine_orbits(o1: OrbitType, o2: OrbitType) -> Optional[OrbitType]:
    # intersection of orbit types; None when the intersection is empty
    if o1.h & o2.k != o2.h & o1.k:
        return None
    return OrbitType(o1.h | o2.h, o1.k | o2.k)


def effective_orbit(handle: CopyHandle):
    """Collapse a pure chain of orbit restrictions over the ambient graph.

    Returns an OrbitType when the handle is exactly an orbit of the ambient
    graph, the string "empty" when the chain is provably empty, and None when
    the handle's structure is opaque (filtered, labeled, ...).
    """
    if isinstance(handle, AmbientHandle):
        return OrbitType.whole()
    if isinstance(handle, OrbitRestrictedHandle):
        base = effective_orbit(handle.base)
        if base == "empty":
            return "empty"
        if not isinstance(base, OrbitType):
            return None
        combined = _combine_orbits(base, handle.orbit)
        return combined if combined is not None else "empty"
    return None


# ---------------------------------------------------------------------------
# Orbit queries
# ---------------------------------------------------------------------------


def orbit_member(v: Vertex, o: OrbitType, within: CopyHandle = AMBIENT) -> bool:
    """Whether v realizes the orbit pattern inside the given handle."""
    return within.contains(v) and pattern_matches(v, o)


def least_orbit_member(o: OrbitType, from_: Vertex = 0, within: CopyHandle = AMBIENT,
                       search_bound: int = DEFAULT_SEARCH_BOUND,
                       max_bits: int = MAX_VALUE_BITS) -> Vertex:
    """The least v >= from_ with orbit_member(v, o, within).

    Raises SearchExhausted after examining `search_bound` candidate vertices,
    or when the orbit is provably empty inside the handle.
    """
    if search_bound <= 0:
        raise PreconditionViolation("search_bound must be positive")
    eff = effective_orbit(within)
    if eff == "empty":
        raise SearchExhausted("handle is provably empty")
    if isinstance(eff, OrbitType):
        combined = _combine_orbits(eff, o)
        if combined is None:
            raise SearchExhausted(f"orbit {o} is empty inside {within.kind} handle (incompatible patterns)")
        v = next(orbit_members(combined, from_, max_bits), None)
        if v is None:
            raise SearchExhausted(f"next member of {o} exceeds the {max_bits}-bit value guard")
        return v
    tested = 0
    for v in orbit_members(o, from_, max_bits):
        tested += 1
        if within.contains(v):
            return v
        if tested >= search_bound:
            raise SearchExhausted(
                f"no member of {o} found among {search_bound} candidates in a {within.kind} handle")
    raise SearchExhausted(f"members of {o} exhausted the {max_bits}-bit value guard")


def constructive_witness(o: OrbitType, strictly_above: Vertex = 0) -> Vertex:
    """Closed-form orbit member above a threshold: sum of K-bits plus one fresh high bit."""
    t = 1 + max([strictly_above.bit_length(), *o.h])
    return (1 << t) + sum(1 << k for k in o.k)


def remove_finite(c: CopyHandle, f: FinSet) -> CopyHandle:
    """The handle with a finite set of vertices removed."""
    removed = finset(f)
    if not removed:
        return c
    return FilteredHandle(c, lambda v: v not in removed,
                          data={"type": "remove_finite", "set": sorted(removed)})


def orbit_copy(c: CopyHandle, o: OrbitType) -> CopyHandle:
    """The orbit of c at (H, K): members of c realizing the pattern."""
    return OrbitRestrictedHandle(c, o)


# ---------------------------------------------------------------------------
# Finite-depth verification of the extension property
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PatternCheck:
    h: tuple
    k: tuple
    witness: Optional[Vertex]


@dataclass(frozen=True)
class VerifyReport:
    pattern_depth: int
    ground: tuple
    checks: tuple

    @property
    def failures(self):
        return [c for c in self.checks if c.witness is None]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "pattern_depth": self.pattern_depth,
            "ground": list(self.ground),
            "checked": len(self.checks),
            "failures": [{"H": list(c.h), "K": list(c.k)} for c in self.failures],
        }


def verify_copy(c: CopyHandle, pattern_depth: int,
                search_bound: int = DEFAULT_SEARCH_BOUND) -> VerifyReport:
    """Search a witness inside c for every pattern over its first few members.

    Every pair K subset of H subset of the first `pattern_depth` enumerated
    vertices is checked; failures are report entries, never exceptions.
    """
    if pattern_depth > MAX_PATTERN_DEPTH:
        raise PreconditionViolation(f"pattern_depth capped at {MAX_PATTERN_DEPTH}")
    ground = tuple(c.first(pattern_depth))
    checks = []
    d = len(ground)
    for hmask in range(1 << d):
        hset = [ground[i] for i in range(d) if (hmask >> i) & 1]
        for kmask in range(1 << d):
            if kmask & ~hmask:
                continue
            kset = [ground[i] for i in range(d) if (kmask >> i) & 1]
            o = OrbitType(finset(hset), finset(kset))
            try:
                w = least_orbit_member(o, 0, c, search_bound)
            except SearchExhausted:
                w = None
            checks.append(PatternCheck(tuple(hset), tuple(kset), w))
    return VerifyReport(pattern_depth, ground, tuple(checks))


# ---------------------------------------------------------------------------
# Best-effort indivisibility: a monochromatic labeled copy by greedy search
# ---------------------------------------------------------------------------


class _BoundedStream:
    """Candidate stream for one labeling node, with per-step scan bounds."""

    def __init__(self, o: OrbitType, handle: CopyHandle, search_bound: int):
        self._candidates = orbit_members(o)
        self._handle = handle
        self._bound = search_bound

    def next_member(self):
        scanned = 0
        for v in self._candidates:
            scanned += 1
            if self._handle.contains(v):
                return v
            if scanned >= self._bound:
                return None
        return None


def _greedy_levels(handle: CopyHandle, depth: int, search_bound: int, budget: list):
    """Backtracking min-recursion for a labeling inside `handle`; None on failure."""
    chosen = []  # parallel lists: node (n, K) and its vertex
    streams = []

    def node_at(i):
        # nodes in level order; K-sets in bitmask order over the sorted union
        n = 0
        count = 0
        union = []
        while True:
            ground = tuple(union)
            width = 1 << len(ground)
            if i < count + width:
                j = i - count
                k = frozenset(ground[b] for b in range(len(ground)) if (j >> b) & 1)
                return n, ground, k
            count += width
            union.extend(v for (_, _, v) in chosen[count - width:count])
            n += 1

    total = 0
    sizes = []
    u = 0
    for n in range(depth + 1):
        sizes.append(1 << u)
        total += 1 << u
        u += 1 << u

    i = 0
    while i < total:
        n, ground, k = node_at(i)
        if len(streams) == i:
            streams.append(_BoundedStream(OrbitType(finset(ground), k), handle, search_bound))
        v = streams[i].next_member()
        if v is None:
            streams.pop()
            if chosen:
                chosen.pop()
            i -= 1
            budget[0] -= 1
            if i < 0 or budget[0] <= 0:
                return None
            continue
        if len(chosen) == i:
            chosen.append((n, k, v))
        else:
            chosen[i] = (n, k, v)
        i += 1

    levels = []
    idx = 0
    for n, size in enumerate(sizes):
        levels.append(sorted(v for (_, _, v) in chosen[idx:idx + size]))
        idx += size
    return levels


def monochromatic_copy_greedy(c: CopyHandle, coloring: Callable[[Vertex], int], colors: int,
                              depth: int, search_bound: int = DEFAULT_SEARCH_BOUND,
                              backtrack_budget: int = DEFAULT_BACKTRACK_BUDGET):
    """Build a labeled copy prefix inside one color class, trying classes in order.

    Indivisibility guarantees existence but not effectively; this search is
    best-effort by design and raises SearchExhausted when no class admits a
    depth-deep labeling within the bounds.
    """
    if colors < 1:
        raise PreconditionViolation("need at least one color class")
    for color in range(colors):
        class_handle = FilteredHandle(
            c, lambda v, _c=color: coloring(v) == _c, data={"type": "color_class", "color": color})
        budget = [backtrack_budget]
        levels = _greedy_levels(class_handle, depth, search_bound, budget)
        if levels is not None:
            vertices = tuple(sorted(v for lv in levels for v in lv))
            return color, LabeledHandle(vertices, tuple(frozenset(lv) for lv in levels))
    raise SearchExhausted(f"no color class admits a depth-{depth} labeling within the budget")
