"""Strong subtrees of finitely branching reversed trees, bounded monochromatic
subtree search, extraction of a labeled copy from a strong subtree, and the
unsplitting pipeline.

The subtree search is exhaustive backtracking in a canonical order, so a
`None` answer means no such subtree exists in the truncation; the infinitary
partition theorem guarantees nothing at finite depth.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .ambient import FinSet, Vertex, finset, orbit_member, OrbitType
from .errors import NoSubtreeFound, PreconditionViolation, RadoError
from .fusion import Decision, FusionResult
from .labeling import Labeling, subsets_in_order
from .treeorder import TreeNode, vertex_of


def _node_key(node):
    if isinstance(node, TreeNode):
        return (1, node.n, tuple(sorted(node.k)))
    return (0, node, ())


@dataclass(frozen=True)
class FiniteReversedTree:
    """A finite reversed tree: parent = the unique immediate successor."""

    nodes: tuple
    parent: dict
    root: object
    level: dict
    children: dict

    @classmethod
    def from_parent_map(cls, parent: dict) -> "FiniteReversedTree":
        roots = [x for x, p in parent.items() if p is None]
        if len(roots) != 1:
            raise PreconditionViolation(f"tree must have exactly one root, found {len(roots)}")
        root = roots[0]
        level = {}

        def depth_of(x):
            if x in level:
                return level[x]
            seen = []
            while x not in level:
                seen.append(x)
                p = parent[x]
                if p is None:
                    level[x] = 0
                    break
                if p not in parent:
                    raise PreconditionViolation(f"parent {p!r} of {x!r} is not a tree node")
                if p in seen:
                    raise PreconditionViolation("parent map contains a cycle")
                x = p
            for y in reversed(seen):
                if y not in level:
                    level[y] = level[parent[y]] + 1
            return level[seen[0]] if seen else level[x]

        for x in parent:
            depth_of(x)
        children = {x: [] for x in parent}
        for x, p in parent.items():
            if p is not None:
                children[p].append(x)
        nodes = tuple(sorted(parent, key=_node_key))
        children = {x: tuple(sorted(cs, key=_node_key)) for x, cs in children.items()}
        return cls(nodes, dict(parent), root, level, children)

    @property
    def height(self) -> int:
        return max(self.level.values()) + 1

    def levels_present(self):
        return sorted(set(self.level.values()))

    def nodes_at_level(self, n: int):
        return [x for x in self.nodes if self.level[x] == n]

    def ancestor_at(self, x, n: int):
        """The unique node of level n on the chain from x to the root."""
        if self.level[x] < n:
            raise PreconditionViolation("node is above the requested level")
        while self.level[x] > n:
            x = self.parent[x]
        return x

    def is_below(self, x, t) -> bool:
        """x <= t in the reversed tree (t lies on x's chain to the root)."""
        if self.level[x] < self.level[t]:
            return False
        return self.ancestor_at(x, self.level[t]) == t


def truncate_tree(lab: Labeling, depth: int) -> FiniteReversedTree:
    """Materialize the reversed tree of a labeling on all nodes of level <= depth."""
    if depth > lab.depth:
        raise PreconditionViolation("depth exceeds materialization")
    parent = {}
    for n in range(depth + 1):
        ground = lab.ground_tuple(n)
        for k in subsets_in_order(ground):
            node = TreeNode(n, k)
            if n == 0:
                parent[node] = None
            else:
                parent[node] = TreeNode(n - 1, k & lab.union_below(n - 1))
    return FiniteReversedTree.from_parent_map(parent)


@dataclass(frozen=True)
class StrongSubtree:
    """Root, level set, per-level member sets, and the branch selection map."""

    root: object
    level_set: tuple
    members: tuple           # tuple of frozensets, one per selected level
    selection: dict          # (s, immediate predecessor t of s) -> member below t

    def all_nodes(self):
        return [x for lev in self.members for x in sorted(lev, key=_node_key)]


def is_strong_subtree(t: FiniteReversedTree, s: StrongSubtree) -> bool:
    """Check the strong-subtree axioms, dualized for reversed trees."""
    k = len(s.level_set)
    if k == 0 or len(s.members) != k:
        return False
    if list(s.level_set) != sorted(set(s.level_set)):
        return False
    if set(s.members[0]) != {s.root} or s.root not in t.level:
        return False
    for i, n in enumerate(s.level_set):
        lev = s.members[i]
        if not lev:
            return False
        if any(x not in t.level or t.level[x] != n for x in lev):
            return False
    # connectivity: each member's chain passes through the previous level set
    for i in range(1, k):
        for x in s.members[i]:
            if t.ancestor_at(x, s.level_set[i - 1]) not in s.members[i - 1]:
                return False
    # (sst3): one chosen member of the next level below every immediate branching
    expected_keys = set()
    for i in range(k - 1):
        for node in s.members[i]:
            for child in t.children[node]:
                below = [x for x in s.members[i + 1] if t.is_below(x, child)]
                if len(below) != 1:
                    return False
                expected_keys.add((node, child))
                if s.selection.get((node, child)) != below[0]:
                    return False
    if set(s.selection) != expected_keys:
        return False
    return True


def find_strong_subtree(t: FiniteReversedTree, coloring, height: int) -> Optional[StrongSubtree]:
    """Exhaustive canonical search for a monochromatic strong subtree.

    `coloring` maps nodes to colors (dict or callable).  Roots are tried in
    canonical node order, level sets in ascending lexicographic order and
    selections least-first, so the result is deterministic; None means no
    monochromatic strong subtree of the requested height exists in t.
    """
    if height < 1:
        raise PreconditionViolation("height must be at least 1")
    color_of = coloring if callable(coloring) else (lambda x: coloring[x])
    max_level = max(t.level.values())

    def extend(color, level_set, members, selection):
        if len(level_set) == height:
            return StrongSubtree(next(iter(members[0])), tuple(level_set),
                                 tuple(frozenset(m) for m in members), dict(selection))
        pairs = [(s_node, child)
                 for s_node in sorted(members[-1], key=_node_key)
                 for child in t.children[s_node]]
        if not pairs:
            return None
        for n in range(level_set[-1] + 1, max_level + 1):
            option_lists = []
            for _s_node, child in pairs:
                options = [x for x in t.nodes_at_level(n)
                           if color_of(x) == color and t.is_below(x, child)]
                if not options:
                    option_lists = None
                    break
                option_lists.append(options)
            if option_lists is None:
                continue
            for combo in itertools.product(*option_lists):
                new_selection = dict(selection)
                for (pair, choice) in zip(pairs, combo):
                    new_selection[pair] = choice
                found = extend(color, level_set + [n], members + [set(combo)], new_selection)
                if found is not None:
                    return found
        return None

    for root in t.nodes:
        found = extend(color_of(root), [t.level[root]], [{root}], {})
        if found is not None:
            assert is_strong_subtree(t, found)
            return found
    return None


@dataclass
class CopyExtraction:
    """A labeled copy prefix extracted from a strong subtree."""

    source: Labeling
    subtree: StrongSubtree
    lambda_levels: list      # per-level frozensets of vertices
    witness: dict            # (k, frozenset of vertices H) -> TreeNode
    requested: int
    achieved: int

    def vertex(self, k: int, h) -> Vertex:
        return vertex_of(self.witness[(k, finset(h))], self.source)

    def to_labeling(self) -> Labeling:
        levels = [tuple(sorted(lv)) for lv in self.lambda_levels]
        witness = {(k, h): vertex_of(node, self.source) for (k, h), node in self.witness.items()}
        return Labeling(base=self.source.base, levels=levels, witness=witness)

    def order_coincides(self) -> bool:
        """<=_Lambda versus <=_L on all pairs of extraction nodes."""
        items = sorted(self.witness.items(), key=lambda kv: (kv[0][0], tuple(sorted(kv[0][1]))))
        unions = [frozenset(v for lv in self.lambda_levels[:k] for v in lv)
                  for k in range(len(self.lambda_levels) + 1)]
        lab_unions = {}
        for (k, h), node in items:
            lab_unions[node] = self.source.union_below(node.n)
        for (k1, h1), node1 in items:
            for (k2, h2), node2 in items:
                leq_lambda = k1 >= k2 and h1 & unions[k2] == h2
                leq_host = node1.n >= node2.n and node1.k & lab_unions[node2] == node2.k
                if leq_lambda != leq_host:
                    return False
        return True


def copy_from_subtree(lab: Labeling, s: StrongSubtree, k: int,
                      tree: Optional[FiniteReversedTree] = None) -> CopyExtraction:
    """Extract a labeled copy of height k from a strong subtree of lab's tree.

    The recursion projects each one-level extension of an extracted node
    through the subtree's selection map.  If the truncation lacks room for a
    step, extraction stops and reports the achieved height.
    """
    if tree is None:
        tree = truncate_tree(lab, lab.depth)
    if not is_strong_subtree(tree, s):
        raise PreconditionViolation("not a strong subtree of the labeling's tree")
    if k < 1 or k > len(s.level_set):
        raise PreconditionViolation(f"k must be in 1..{len(s.level_set)}")

    root = s.root
    witness = {(0, frozenset()): root}
    lambda_levels = [frozenset([vertex_of(root, lab)])]
    achieved = 1
    for kk in range(1, k):
        union_prev = frozenset(v for lv in lambda_levels[:kk - 1] for v in lv)
        union_all = frozenset(v for lv in lambda_levels for v in lv)
        new = {}
        ok = True
        for h in subsets_in_order(tuple(sorted(union_all))):
            parent_node = witness[(kk - 1, h & union_prev)]
            step = TreeNode(parent_node.n + 1, parent_node.k | (h & lambda_levels[kk - 1]))
            image = s.selection.get((parent_node, step))
            if image is None:
                ok = False
                break
            new[(kk, h)] = image
        if not ok:
            break
        witness.update(new)
        lambda_levels.append(frozenset(vertex_of(node, lab) for node in new.values()))
        achieved = kk + 1

    ext = CopyExtraction(lab, s, lambda_levels, witness, k, achieved)
    _check_extraction(ext)
    return ext


def _check_extraction(ext: CopyExtraction) -> None:
    lab = ext.source
    s = ext.subtree
    for kk, lv in enumerate(ext.lambda_levels):
        host_level = {vertex_of(node, lab) for node in s.members[kk]}
        if not lv <= host_level:
            raise RadoError(f"extracted level {kk} leaves the subtree")
    for (kk, h), node in ext.witness.items():
        union = frozenset(v for lv in ext.lambda_levels[:kk] for v in lv)
        if not orbit_member(vertex_of(node, lab), OrbitType(union, h), lab.base):
            raise RadoError(f"extraction witness for (k={kk}, H={sorted(h)}) misses its orbit")
    counts = [len({node for (kk, _h), node in ext.witness.items() if kk == j})
              for j in range(ext.achieved)]
    expected = [len([1 for (kk, _h) in ext.witness if kk == j]) for j in range(ext.achieved)]
    if counts != expected:
        raise RadoError("extraction witness map is not injective per level")
    if not ext.order_coincides():
        raise RadoError("extraction order does not coincide with the host order")


@dataclass(frozen=True)
class UnsplitResult:
    side: Decision
    extraction: CopyExtraction
    level_set: tuple


def unsplit(fr: FusionResult, height: int) -> UnsplitResult:
    """Extract a copy whose every node carries one side of a 0/1 decision table.

    The table colors the truncated tree; a monochromatic strong subtree is
    searched at the requested height and the copy extracted from it decides
    every level of its level set the same way.
    """
    if any(v not in (0, 1) for v in fr.table.values()):
        raise PreconditionViolation("unsplit needs a 0/1 decision table")
    lab = fr.labeling
    tree = truncate_tree(lab, lab.depth)
    colors = {node: fr.table[(node.n, node.k)] for node in tree.nodes}
    s = find_strong_subtree(tree, colors, height)
    if s is None:
        raise NoSubtreeFound(
            f"no monochromatic strong subtree of height {height} in the depth-{lab.depth} truncation")
    side = Decision.IN if colors[s.root] == 1 else Decision.OUT
    ext = copy_from_subtree(lab, s, height, tree)
    for node in ext.witness.values():
        if colors[node] != colors[s.root]:
            raise RadoError("extraction node color differs from the returned side")
    return UnsplitResult(side, ext, s.level_set)
