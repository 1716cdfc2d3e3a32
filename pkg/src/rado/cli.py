"""Unified command-line front end.

One binary with subcommands, deterministic JSON output (sorted keys, sorted
arrays), and machine-readable errors on stderr.  Boolean queries exit 0 for
true and 1 for false; errors map to the codes in `rado.errors`.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import ambient, copies, fusion, orbits, ramsey, serial, treeorder
from .ambient import (AMBIENT, DEFAULT_BACKTRACK_BUDGET, DEFAULT_SEARCH_BOUND,
                      OrbitType, finset)
from .errors import EXIT_CODES, RadoError, UsageError
from .labeling import label
from .serial import dumps


@dataclass
class Config:
    search_bound: int = DEFAULT_SEARCH_BOUND
    backtrack_budget: int = DEFAULT_BACKTRACK_BUDGET

    def validate(self):
        if self.search_bound <= 0 or self.backtrack_budget <= 0:
            raise UsageError("bounds must be positive")
        return self


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"bad config line {line!r}")
                key, val = line.split("=", 1)
                values[key.strip()] = val.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}")
    return values


def load_config(args) -> Config:
    cfg = Config()
    file_values = _read_config_file(args.config) if args.config else {}
    env = os.environ.get("RADO_SEARCH_BOUND")
    if args.search_bound is not None:
        cfg.search_bound = args.search_bound
    elif "search_bound" in file_values:
        cfg.search_bound = int(file_values["search_bound"])
    elif env is not None:
        cfg.search_bound = int(env)
    if "backtrack_budget" in file_values:
        cfg.backtrack_budget = int(file_values["backtrack_budget"])
    return cfg.validate()


def _orbit_arg(text: str) -> OrbitType:
    try:
        return OrbitType.from_json(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"bad orbit JSON {text!r}: {exc}")


def _finset_arg(text: str):
    try:
        return finset(json.loads(text))
    except (json.JSONDecodeError, TypeError) as exc:
        raise UsageError(f"bad vertex-set JSON {text!r}: {exc}")


def parse_predicate(name: str):
    if name in ("all", "true"):
        return lambda v: True
    if name in ("none", "false"):
        return lambda v: False
    if name == "even":
        return lambda v: v % 2 == 0
    if name == "odd":
        return lambda v: v % 2 == 1
    if name.startswith("mod:"):
        parts = name.split(":")
        if len(parts) != 3:
            raise UsageError("mod predicate is mod:M:R")
        m, r = int(parts[1]), int(parts[2])
        if m <= 0:
            raise UsageError("modulus must be positive")
        return lambda v: v % m == r
    raise UsageError(f"unknown predicate {name!r}")


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _bool_result(value: bool) -> int:
    sys.stdout.write("true\n" if value else "false\n")
    return 0 if value else 1


def _load_json_file(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load JSON from {path}: {exc}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rado", description=__doc__)
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--search-bound", type=int, default=None)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("adj", help="adjacency of two vertices")
    q.add_argument("u", type=int)
    q.add_argument("v", type=int)

    q = sub.add_parser("orbit", help="orbit membership, search, and calculus")
    osub = q.add_subparsers(dest="orbit_command", required=True)
    m = osub.add_parser("member")
    m.add_argument("vertex", type=int)
    m.add_argument("orbit")
    m = osub.add_parser("least")
    m.add_argument("orbit")
    m.add_argument("--from", dest="from_", type=int, default=0)
    m = osub.add_parser("witness")
    m.add_argument("orbit")
    m.add_argument("--above", type=int, default=0)
    for name in ("intersect", "subset", "equal"):
        m = osub.add_parser(name)
        m.add_argument("first")
        m.add_argument("second")

    q = sub.add_parser("verify", help="extension-property check at finite depth")
    q.add_argument("--depth", type=int, default=3)

    q = sub.add_parser("label", help="labeling of the ambient graph")
    q.add_argument("--depth", type=int, default=2)
    q.add_argument("--variant", type=int, default=0)
    q.add_argument("--out")

    q = sub.add_parser("tree", help="the reversed tree of a labeling")
    tsub = q.add_subparsers(dest="tree_command", required=True)
    m = tsub.add_parser("dot")
    m.add_argument("--depth", type=int, default=2)
    m.add_argument("--out")
    for name in ("preds", "downset"):
        m = tsub.add_parser(name)
        m.add_argument("n", type=int)
        m.add_argument("K")
        m.add_argument("--depth", type=int, default=2)

    q = sub.add_parser("iso", help="back-and-forth partial isomorphism at a pivot")
    q.add_argument("--pivot", type=int, default=0)
    q.add_argument("--steps", type=int, default=10)
    q.add_argument("--avoid-f", default="[]")
    q.add_argument("--avoid-g", default="[]")

    q = sub.add_parser("copy", help="copy constructions")
    csub = q.add_subparsers(dest="copy_command", required=True)
    m = csub.add_parser("split")
    m.add_argument("--rounds", type=int, default=1)
    m.add_argument("--pivot", type=int, default=0)
    m.add_argument("--depth", type=int, default=2)

    q = sub.add_parser("fuse", help="fusion against a declarative oracle")
    q.add_argument("--oracle", required=True, help="oracle spec JSON file")
    q.add_argument("--depth", type=int, default=2)
    q.add_argument("--out")

    q = sub.add_parser("readoff", help="read a fused value along a branch")
    q.add_argument("fusion", help="fusion result JSON file")
    q.add_argument("--pred", required=True)
    q.add_argument("--n", type=int, required=True)

    q = sub.add_parser("slalom", help="slalom of a fusion result")
    q.add_argument("fusion")

    q = sub.add_parser("hl", help="monochromatic strong subtree search")
    q.add_argument("--tree", required=True)
    q.add_argument("--colors", required=True)
    q.add_argument("--height", type=int, required=True)

    q = sub.add_parser("unsplit", help="one-sided copy from a 0/1 fusion table")
    q.add_argument("fusion")
    q.add_argument("--height", type=int, required=True)
    return p


def _cmd_orbit(args, cfg: Config) -> int:
    oc = args.orbit_command
    if oc == "member":
        return _bool_result(ambient.orbit_member(args.vertex, _orbit_arg(args.orbit)))
    if oc == "least":
        v = ambient.least_orbit_member(_orbit_arg(args.orbit), args.from_,
                                       AMBIENT, cfg.search_bound)
        sys.stdout.write(dumps({"vertex": v}))
        return 0
    if oc == "witness":
        v = ambient.constructive_witness(_orbit_arg(args.orbit), args.above)
        sys.stdout.write(dumps({"vertex": v}))
        return 0
    o1, o2 = _orbit_arg(args.first), _orbit_arg(args.second)
    if oc == "intersect":
        meet = orbits.intersect(o1, o2)
        sys.stdout.write(dumps({"empty": True} if meet is None else meet.to_json()))
        return 0
    if oc == "subset":
        return _bool_result(orbits.is_suborbit(o1, o2))
    if oc == "equal":
        return _bool_result(orbits.orbits_equal(o1, o2))
    raise UsageError(f"unknown orbit subcommand {oc!r}")


def _cmd_tree(args, cfg: Config) -> int:
    lab = label(AMBIENT, args.depth, 0, search_bound=cfg.search_bound)
    if args.tree_command == "dot":
        _emit(args, treeorder.export_dot(lab, args.depth))
        return 0
    node = treeorder.TreeNode(args.n, _finset_arg(args.K))
    if args.tree_command == "preds":
        preds = treeorder.immediate_predecessors(node, lab)
        sys.stdout.write(dumps({"count": len(preds), "nodes": [nd.to_json() for nd in preds]}))
        return 0
    if args.tree_command == "downset":
        sys.stdout.write(dumps(treeorder.downset_orbit(node, lab).to_json()))
        return 0
    raise UsageError(f"unknown tree subcommand {args.tree_command!r}")


def _split_to_json(trace: copies.SplitTrace) -> dict:
    return {
        "pivot": trace.pivot,
        "rounds": trace.rounds,
        "records": [{"i0": r.i0, "j": r.j, "r": r.r, "pattern": sorted(r.pattern),
                     "level": r.level, "node_K": sorted(r.node_key), "vertex": r.vertex}
                    for r in trace.records],
        "A0": sorted(trace.a0),
        "A1": sorted(trace.a1),
        "glued": sorted(trace.glued),
    }


def dispatch(args, cfg: Config) -> int:
    cmd = args.command
    if cmd == "adj":
        return _bool_result(ambient.adjacent(args.u, args.v))
    if cmd == "orbit":
        return _cmd_orbit(args, cfg)
    if cmd == "verify":
        report = ambient.verify_copy(AMBIENT, args.depth, cfg.search_bound)
        sys.stdout.write(dumps(report.to_json()))
        return 0 if report.ok else 1
    if cmd == "label":
        lab = label(AMBIENT, args.depth, args.variant, search_bound=cfg.search_bound)
        _emit(args, dumps(serial.labeling_to_json(lab)))
        return 0
    if cmd == "tree":
        return _cmd_tree(args, cfg)
    if cmd == "iso":
        iso = copies.back_and_forth(args.pivot, _finset_arg(args.avoid_f),
                                    _finset_arg(args.avoid_g), args.steps, cfg.search_bound)
        sys.stdout.write(dumps({"pivot": iso.pivot,
                                "pairs": [[u, v] for u, v in iso.pairs],
                                "avoid_f": sorted(iso.avoid_f),
                                "avoid_g": sorted(iso.avoid_g)}))
        return 0
    if cmd == "copy":
        base = copies.extendible_base(args.pivot, (), (), None, args.depth, cfg.search_bound)
        trace = copies.split_extendible(base.handle(), base, base.iso,
                                        args.rounds, cfg.search_bound)
        sys.stdout.write(dumps(_split_to_json(trace)))
        return 0
    if cmd == "fuse":
        oracle = fusion.oracle_from_spec(_load_json_file(args.oracle))
        fr = fusion.fuse(AMBIENT, oracle, args.depth, cfg.search_bound)
        _emit(args, dumps(serial.fusion_to_json(fr)))
        return 0
    if cmd == "readoff":
        fr = serial.fusion_from_json(_load_json_file(args.fusion))
        rho = fusion.branch_from_real(fr, parse_predicate(args.pred))
        value = fusion.read_off(fr, rho, args.n)
        sys.stdout.write(dumps({"n": args.n, "K": sorted(rho.choices[args.n]), "value": value}))
        return 0
    if cmd == "slalom":
        fr = serial.fusion_from_json(_load_json_file(args.fusion))
        sys.stdout.write(dumps(fusion.slalom(fr).to_json()))
        return 0
    if cmd == "hl":
        tree = serial.tree_from_json(_load_json_file(args.tree))
        colors = serial.coloring_from_json(_load_json_file(args.colors))
        found = ramsey.find_strong_subtree(tree, colors, args.height)
        if found is None:
            sys.stdout.write(dumps({"found": False}))
            return 0
        sys.stdout.write(dumps({"found": True, "subtree": serial.subtree_to_json(found)}))
        return 0
    if cmd == "unsplit":
        fr = serial.fusion_from_json(_load_json_file(args.fusion))
        result = ramsey.unsplit(fr, args.height)
        ext = result.extraction
        sys.stdout.write(dumps({
            "side": result.side.value,
            "level_set": list(result.level_set),
            "levels": [sorted(lv) for lv in ext.lambda_levels],
            "witness": [{"k": kk, "H": sorted(h), "node": node.to_json(),
                         "vertex": treeorder.vertex_of(node, ext.source)}
                        for (kk, h), node in sorted(ext.witness.items(),
                                                    key=lambda kv: (kv[0][0], sorted(kv[0][1])))],
        }))
        return 0
    raise UsageError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        return dispatch(args, cfg)
    except RadoError as exc:
        sys.stderr.write(dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_CODES.get(type(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
