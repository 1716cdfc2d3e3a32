"""Fusion against decision oracles: refined labelings, decision tables,
branch reals, the new-real counterexample, and slalom extraction.

A decision oracle stands in for one dense family per level: it assigns every
node (n, K) a value and a refined vertex predicate.  The fusion driver
builds a labeling whose witness for a node satisfies the refinements of all
its pattern ancestors, the finitely checkable consequence of the nested
construction.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import Callable, Optional

from .ambient import (DEFAULT_SEARCH_BOUND, CopyHandle, FinSet, OrbitType, Vertex,
                      effective_orbit, finset, orbit_members, pattern_matches)
from .errors import OracleInconsistency, PreconditionViolation, SearchExhausted
from .labeling import Labeling, m_sequence, subsets_in_order
from .orbits import is_suborbit


class Decision(str, enum.Enum):
    IN = "In"
    OUT = "Out"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class DecisionOracle:
    """Assigns each node (n, K) a value and a refined vertex predicate.

    `decide(n, K, ctx)` must be a pure function of its key; the driver calls
    it twice on first use and rejects nondeterminism.  Refinements are
    interpreted intersected with the context copy, and must leave every orbit
    over finitely many placed vertices nonempty within the search bound
    (richness promise; violations surface as SearchExhausted).
    """

    decide: Callable
    deterministic: bool = True
    name: str = "custom"
    spec: Optional[dict] = None


class _Refinement:
    """Named vertex predicate, serializable back to its declarative form."""

    def __init__(self, kind: str, params: tuple):
        self.kind = kind
        self.params = params

    def __call__(self, v: Vertex) -> bool:
        if self.kind == "all":
            return True
        if self.kind == "mod":
            m, r = self.params
            return v % m == r
        if self.kind == "bitset":
            (p,) = self.params
            return (v >> p) & 1 == 1
        raise PreconditionViolation(f"unknown refinement kind {self.kind!r}")

    def descriptor(self) -> str:
        if self.kind == "all":
            return "all"
        return ":".join([self.kind] + [str(x) for x in self.params])

    def __eq__(self, other):
        return isinstance(other, _Refinement) and (self.kind, self.params) == (other.kind, other.params)

    def __repr__(self):
        return f"_Refinement({self.descriptor()})"


def _parse_refinement(text: str) -> _Refinement:
    parts = text.split(":")
    if parts[0] == "all":
        return _Refinement("all", ())
    if parts[0] == "mod" and len(parts) == 3:
        m, r = int(parts[1]), int(parts[2])
        if m <= 0 or not 0 <= r < m:
            raise PreconditionViolation(f"bad residue class {text!r}")
        return _Refinement("mod", (m, r))
    if parts[0] == "bitset" and len(parts) == 2:
        return _Refinement("bitset", (int(parts[1]),))
    raise PreconditionViolation(f"unknown refinement spec {text!r}")


def _key_hash(n: int, k: FinSet) -> int:
    payload = f"{n}:{sorted(k)}".encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big") % 1_000_003


def oracle_from_spec(spec: dict) -> DecisionOracle:
    """Build an oracle from a declarative description.

    value: "const:N" | "card_K" | "hash";  refine: "all" | "mod:M:R" | "bitset:P".
    """
    value_spec = spec.get("value", "const:0")
    refine_spec = spec.get("refine", "all")
    refinement = _parse_refinement(refine_spec)
    if value_spec == "card_K":
        value_fn = lambda n, k: len(k)
    elif value_spec == "hash":
        value_fn = _key_hash
    elif value_spec.startswith("const:"):
        c = int(value_spec.split(":", 1)[1])
        value_fn = lambda n, k: c
    else:
        raise PreconditionViolation(f"unknown value spec {value_spec!r}")

    def decide(n, k, ctx):
        return value_fn(n, k), refinement

    return DecisionOracle(decide, True, f"{value_spec}/{refine_spec}",
                          {"value": value_spec, "refine": refine_spec})


@dataclass
class FusionResult:
    """A fused labeling with its decision table and per-node refinements."""

    labeling: Labeling
    table: dict
    constraints: dict
    oracle_spec: Optional[dict] = None

    @property
    def depth(self) -> int:
        return self.labeling.depth


def _checked_decide(oracle: DecisionOracle, n: int, k: FinSet, ctx: CopyHandle):
    value, refined = oracle.decide(n, k, ctx)
    again_value, again_refined = oracle.decide(n, k, ctx)
    if value != again_value:
        raise OracleInconsistency(f"oracle value changed for (n={n}, K={sorted(k)})")
    if refined != again_refined and any(refined(v) != again_refined(v) for v in range(64)):
        raise OracleInconsistency(f"oracle refinement changed for (n={n}, K={sorted(k)})")
    return value, refined


def fuse(base: CopyHandle, oracle: DecisionOracle, depth: int,
         search_bound: int = DEFAULT_SEARCH_BOUND) -> FusionResult:
    """Build a fused labeling of `base` at the given depth.

    The witness for node (m, K') is the least base vertex in its orbit that
    satisfies the refinement of (n, K' restricted) for every n <= m.
    """
    if not oracle.deterministic:
        raise PreconditionViolation("fusion requires a deterministic oracle")
    if depth < 0 or depth > 3:
        raise PreconditionViolation("depth must be in 0..3")
    lab = Labeling(base=base, levels=[], witness={}, search_bound=search_bound)
    table = {}
    constraints = {}
    for n in range(depth + 1):
        ground = lab.ground_tuple(n)
        for k in subsets_in_order(ground):
            value, refined = _checked_decide(oracle, n, k, base)
            table[(n, k)] = value
            constraints[(n, k)] = refined
        level = []
        for k in subsets_in_order(ground):
            stack = [constraints[(m, k & lab.union_below(m))] for m in range(n + 1)]
            o = OrbitType(finset(ground), k)
            v = _constrained_least(o, base, stack, search_bound)
            lab.witness[(n, k)] = v
            level.append(v)
        lab.levels.append(tuple(sorted(level)))
    return FusionResult(lab, table, constraints, oracle.spec)


def _constrained_least(o: OrbitType, base: CopyHandle, predicates, search_bound: int) -> Vertex:
    tested = 0
    for v in orbit_members(o):
        tested += 1
        if base.contains(v) and all(pred(v) for pred in predicates):
            return v
        if tested >= search_bound:
            raise SearchExhausted(
                f"no witness for {o} satisfies the constraint stack within {search_bound} "
                "candidates (oracle richness promise violated?)")
    raise SearchExhausted(f"members of {o} exhausted the value guard")


@dataclass(frozen=True)
class BranchReal:
    """A coherent choice sequence K_0 <= K_1 <= ... along a fused labeling."""

    choices: tuple

    def __post_init__(self):
        object.__setattr__(self, "choices", tuple(finset(k) for k in self.choices))


def validate_branch(fr: FusionResult, rho: BranchReal) -> None:
    lab = fr.labeling
    if len(rho.choices) < lab.depth + 1:
        raise PreconditionViolation("branch is shorter than the fusion depth")
    for n, k in enumerate(rho.choices[:lab.depth + 1]):
        if not k <= lab.union_below(n):
            raise PreconditionViolation(f"branch choice {sorted(k)} is not a pattern at level {n}")
        if n > 0 and rho.choices[n] & lab.union_below(n - 1) != rho.choices[n - 1]:
            raise PreconditionViolation(f"branch is incoherent between levels {n - 1} and {n}")


def read_off(fr: FusionResult, rho: BranchReal, n: int):
    """The decided value along the branch at level n: the table at K_n."""
    if n < 0 or n > fr.depth:
        raise PreconditionViolation(f"level {n} is outside the fused depth {fr.depth}")
    validate_branch(fr, rho)
    return fr.table[(n, rho.choices[n])]


def branch_from_real(fr: FusionResult, x: Callable[[Vertex], bool]) -> BranchReal:
    """The branch induced by a decidable vertex set: K_n = (union below n) & x."""
    lab = fr.labeling
    return BranchReal(tuple(
        frozenset(v for v in lab.union_below(n) if x(v)) for n in range(lab.depth + 1)))


def decided_membership(c: CopyHandle, p: Vertex, depth: int = 64) -> Decision:
    """Three-valued approximation of whether c decides the generic real at p.

    Structural certificates (chains of orbit restrictions over the ambient
    graph) give exact In/Out answers.  Containment in either orbit is only
    co-semi-decidable, so without a certificate the answer is Undecided —
    definitive when the first `depth` members refute both containments, and
    a documented finite-depth approximation otherwise.
    """
    return membership_evidence(c, p, depth)[0]


def membership_evidence(c: CopyHandle, p: Vertex, depth: int = 64):
    """decided_membership plus whether the Undecided case is evidence-backed."""
    in_orbit = OrbitType(finset([p]), finset([p]))
    out_orbit = OrbitType(finset([p]), finset())
    eff = effective_orbit(c)
    if isinstance(eff, OrbitType):
        if is_suborbit(eff, in_orbit):
            return Decision.IN, True
        if is_suborbit(eff, out_orbit):
            return Decision.OUT, True
    if eff == "empty":
        return Decision.UNDECIDED, False
    scanned = c.first(depth)
    refuted_in = any(not pattern_matches(v, in_orbit) for v in scanned)
    refuted_out = any(not pattern_matches(v, out_orbit) for v in scanned)
    return Decision.UNDECIDED, refuted_in and refuted_out


@dataclass(frozen=True)
class DecisionCounterexample:
    p: Vertex
    witness_in: Vertex
    witness_out: Vertex


def total_decision_counterexample(c: CopyHandle, s: Callable[[Vertex], bool],
                                  search_bound: int = DEFAULT_SEARCH_BOUND) -> DecisionCounterexample:
    """A pivot in c whose both orbits are witnessed inside c.

    Whatever a total predicate claims at the returned pivot, c contains
    vertices on both sides, so c cannot decide the generic real to equal the
    predicate.  The predicate argument fixes which side refutes the claim;
    the search itself does not depend on it.
    """
    from .ambient import least_orbit_member  # local import keeps module heads light

    scanned = 0
    for p in c.members():
        scanned += 1
        try:
            w_in = least_orbit_member(OrbitType(finset([p]), finset([p])), 0, c, search_bound)
            w_out = least_orbit_member(OrbitType(finset([p]), finset()), 0, c, search_bound)
            return DecisionCounterexample(p, w_in, w_out)
        except SearchExhausted:
            pass
        if scanned >= search_bound:
            break
    raise SearchExhausted("no pivot with both orbit sides witnessed was found in the bound")


@dataclass(frozen=True)
class Slalom:
    """Per-level value sets with the forced size bounds."""

    sets: dict
    bound: dict

    def to_json(self) -> dict:
        return {
            "sets": {str(n): sorted(vals) for n, vals in sorted(self.sets.items())},
            "bound": {str(n): b for n, b in sorted(self.bound.items())},
        }


def slalom(fr: FusionResult) -> Slalom:
    """Collect the table rows into a slalom: |s(n)| <= m_n by counting."""
    sets = {}
    for (n, _k), value in fr.table.items():
        sets.setdefault(n, set()).add(value)
    return Slalom({n: frozenset(vals) for n, vals in sets.items()},
                  {n: m_sequence(n) for n in sets})
