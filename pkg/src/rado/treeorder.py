"""The reversed tree order induced by a labeling.

Nodes are identified by their label (n, K), not by vertices; a node lies
below another iff its orbit is contained in the other's, and down-sets are
exactly orbits.  The root is the unique level-0 node and levels grow
downward, so the tree is "reversed": immediate predecessors extend a node by
one more level of adjacency information.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ambient import FinSet, OrbitType, Vertex, finset
from .errors import PreconditionViolation
from .labeling import Labeling, node_vertex, subsets_in_order

MAX_PREDECESSOR_FANOUT = 4096


@dataclass(frozen=True)
class TreeNode:
    """A node (n, K) of the reversed tree of a labeling."""

    n: int
    k: FinSet

    def __post_init__(self):
        object.__setattr__(self, "k", finset(self.k))

    def sort_key(self):
        return (self.n, tuple(sorted(self.k)))

    def to_json(self) -> dict:
        return {"n": self.n, "K": sorted(self.k)}

    @classmethod
    def from_json(cls, obj: dict) -> "TreeNode":
        return cls(obj["n"], finset(obj["K"]))


def check_node(node: TreeNode, lab: Labeling) -> None:
    """Well-formedness of a node relative to the labeling."""
    if node.n < 0 or node.n > lab.depth + 1 or node.n > lab.sparse_cap:
        raise PreconditionViolation(f"level {node.n} is outside this labeling")
    if not node.k <= lab.union_below(node.n):
        raise PreconditionViolation(
            f"K={sorted(node.k)} is not a subset of the union below level {node.n}")


def vertex_of(node: TreeNode, lab: Labeling) -> Vertex:
    return node_vertex(lab, node.n, node.k)


def leq(a: TreeNode, b: TreeNode, lab: Labeling) -> bool:
    """a <= b in the reversed tree: a's level is deeper and a refines b."""
    check_node(a, lab)
    check_node(b, lab)
    return a.n >= b.n and a.k & lab.union_below(b.n) == b.k


def downset_orbit(q: TreeNode, lab: Labeling) -> OrbitType:
    """The down-set of q as an orbit of the labeled copy."""
    check_node(q, lab)
    return OrbitType(lab.union_below(q.n), q.k)


def immediate_predecessors(q: TreeNode, lab: Labeling,
                           max_fanout: int = MAX_PREDECESSOR_FANOUT) -> list:
    """All one-level extensions of q: exactly 2**|L_n| nodes."""
    check_node(q, lab)
    if q.n > lab.depth:
        raise PreconditionViolation(f"level {q.n + 1} nodes need level {q.n} materialized")
    level = lab.levels[q.n]
    if 1 << len(level) > max_fanout:
        raise PreconditionViolation(
            f"2**{len(level)} immediate predecessors exceed the fanout guard {max_fanout}")
    return [TreeNode(q.n + 1, q.k | k1) for k1 in subsets_in_order(tuple(sorted(level)))]


def interval_to_root(q: TreeNode, lab: Labeling) -> list:
    """The strict chain above q, ordered from the root down; length q.n."""
    check_node(q, lab)
    return [TreeNode(m, q.k & lab.union_below(m)) for m in range(q.n)]


def all_nodes(lab: Labeling, depth: int):
    """Every node of level <= depth, in canonical (level, pattern) order."""
    if depth > lab.depth:
        raise PreconditionViolation("depth exceeds materialization")
    for n in range(depth + 1):
        ground = lab.ground_tuple(n)
        for k in subsets_in_order(ground):
            yield TreeNode(n, k)


def _node_id(node: TreeNode) -> str:
    return f"{node.n}:{','.join(map(str, sorted(node.k)))}"


def export_dot(lab: Labeling, depth: int) -> str:
    """Deterministic DOT rendering of the reversed tree truncated at `depth`.

    Edges point from each node to its immediate successor (its parent), so
    the root renders on top.
    """
    if depth > lab.depth:
        raise PreconditionViolation("depth exceeds materialization")
    lines = [
        "// reversed tree of a labeled copy; an edge p -> q means p is an",
        "// immediate predecessor of q (the root of the reversed tree is on top)",
        "digraph reversed_tree {",
        "  rankdir=BT;",
    ]
    nodes = list(all_nodes(lab, depth))
    for node in nodes:
        lines.append(f'  "{_node_id(node)}" [label="{vertex_of(node, lab)}"];')
    for node in nodes:
        if node.n == 0:
            continue
        parent = TreeNode(node.n - 1, node.k & lab.union_below(node.n - 1))
        lines.append(f'  "{_node_id(node)}" -> "{_node_id(parent)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
