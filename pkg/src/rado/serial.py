"""JSON schemas for the workbench artifacts.

Every artifact serializes to a canonical structure (sorted arrays, sorted
keys) so that identical inputs produce byte-identical output and every
round-trip reloads to a structurally equal value.
"""

from __future__ import annotations

import json

from .ambient import (AMBIENT, CopyHandle, FilteredHandle, LabeledHandle, OrbitType,
                      OrbitRestrictedHandle, finset, remove_finite)
from .errors import UsageError
from .fusion import FusionResult, oracle_from_spec
from .labeling import Labeling
from .ramsey import FiniteReversedTree, StrongSubtree
from .treeorder import TreeNode


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def handle_to_json(handle: CopyHandle) -> dict:
    desc = handle.describe()
    if handle.kind == "filtered" and desc.get("filter", {}).get("type") not in (
            "remove_finite", "explicit"):
        raise UsageError("only remove_finite and explicit filters are serializable")
    return desc


def handle_from_json(obj: dict) -> CopyHandle:
    kind = obj.get("kind")
    if kind == "ambient":
        return AMBIENT
    if kind == "orbit":
        return OrbitRestrictedHandle(handle_from_json(obj["base"]),
                                     OrbitType.from_json(obj["orbit"]))
    if kind == "filtered":
        flt = obj.get("filter", {})
        if flt.get("type") == "remove_finite":
            return remove_finite(handle_from_json(obj["base"]), finset(flt["set"]))
        if flt.get("type") == "explicit":
            members = finset(flt["set"])
            return FilteredHandle(handle_from_json(obj["base"]), lambda v: v in members,
                                  data={"type": "explicit", "set": sorted(members)})
        raise UsageError(f"unknown filter description {flt!r}")
    if kind == "labeled":
        return LabeledHandle(tuple(obj["vertices"]),
                             tuple(finset(lv) for lv in obj.get("levels", [])))
    raise UsageError(f"unknown handle kind {kind!r}")


def labeling_to_json(lab: Labeling) -> dict:
    return {
        "base": handle_to_json(lab.base),
        "levels": [sorted(lv) for lv in lab.levels],
        "witness": [{"n": n, "K": sorted(k), "q": v}
                    for (n, k), v in sorted(lab.witness.items(),
                                            key=lambda kv: (kv[0][0], sorted(kv[0][1])))],
        "start_variant": lab.start_variant,
        "seed_levels": lab.seed_levels,
    }


def labeling_from_json(obj: dict) -> Labeling:
    witness = {(w["n"], finset(w["K"])): w["q"] for w in obj["witness"]}
    return Labeling(base=handle_from_json(obj["base"]),
                    levels=[tuple(lv) for lv in obj["levels"]],
                    witness=witness,
                    start_variant=obj.get("start_variant", 0),
                    seed_levels=obj.get("seed_levels", 0))


def fusion_to_json(fr: FusionResult) -> dict:
    return {
        "labeling": labeling_to_json(fr.labeling),
        "table": [{"n": n, "K": sorted(k), "value": v}
                  for (n, k), v in sorted(fr.table.items(),
                                          key=lambda kv: (kv[0][0], sorted(kv[0][1])))],
        "oracle": fr.oracle_spec,
    }


def fusion_from_json(obj: dict) -> FusionResult:
    lab = labeling_from_json(obj["labeling"])
    table = {(e["n"], finset(e["K"])): e["value"] for e in obj["table"]}
    spec = obj.get("oracle")
    constraints = {}
    if spec is not None:
        oracle = oracle_from_spec(spec)
        for (n, k) in table:
            _value, refined = oracle.decide(n, k, lab.base)
            constraints[(n, k)] = refined
    return FusionResult(lab, table, constraints, spec)


def _node_to_json(node):
    if isinstance(node, TreeNode):
        return {"n": node.n, "K": sorted(node.k)}
    return node


def _node_from_json(obj):
    if isinstance(obj, dict):
        return TreeNode.from_json(obj)
    return obj


def tree_to_json(tree: FiniteReversedTree) -> dict:
    return {"parent": [[_node_to_json(x), _node_to_json(p) if p is not None else None]
                       for x, p in sorted(tree.parent.items(),
                                          key=lambda xp: str(_node_to_json(xp[0])))]}


def tree_from_json(obj: dict) -> FiniteReversedTree:
    parent = {_node_from_json(x): (_node_from_json(p) if p is not None else None)
              for x, p in obj["parent"]}
    return FiniteReversedTree.from_parent_map(parent)


def coloring_to_json(coloring: dict) -> dict:
    return {"colors": [[_node_to_json(x), c] for x, c in
                       sorted(coloring.items(), key=lambda xc: str(_node_to_json(xc[0])))]}


def coloring_from_json(obj: dict) -> dict:
    return {_node_from_json(x): c for x, c in obj["colors"]}


def subtree_to_json(s: StrongSubtree) -> dict:
    return {
        "root": _node_to_json(s.root),
        "level_set": list(s.level_set),
        "members": [[_node_to_json(x) for x in sorted(lev, key=str)] for lev in s.members],
        "selection": [[_node_to_json(a), _node_to_json(t), _node_to_json(x)]
                      for (a, t), x in sorted(s.selection.items(),
                                              key=lambda kv: (str(_node_to_json(kv[0][0])),
                                                              str(_node_to_json(kv[0][1]))))],
    }


def subtree_from_json(obj: dict) -> StrongSubtree:
    return StrongSubtree(
        root=_node_from_json(obj["root"]),
        level_set=tuple(obj["level_set"]),
        members=tuple(frozenset(_node_from_json(x) for x in lev) for lev in obj["members"]),
        selection={(_node_from_json(a), _node_from_json(t)): _node_from_json(x)
                   for a, t, x in obj["selection"]},
    )
