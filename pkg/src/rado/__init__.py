"""Workbench for the combinatorics of copies of the countable random graph.

The ambient graph is the arithmetic (BIT) presentation on the naturals;
everything else — orbit calculus, labelings, induced tree orders, copy
constructions, fusion with decision oracles, slaloms, and monochromatic
copy extraction — operates on lazily represented copies of it and is
verified at finite depth.
"""

from .ambient import (AMBIENT, CopyHandle, FilteredHandle, LabeledHandle, OrbitType,
                      OrbitRestrictedHandle, VerifyReport, adjacent,
                      constructive_witness, finset, least_orbit_member,
                      monochromatic_copy_greedy, orbit_copy, orbit_member,
                      orbit_members, remove_finite, verify_copy)
from .copies import (ExtendibleBase, PartialIso, SplitTrace, back_and_forth,
                     build_copy_in, extendible_base, split_extendible)
from .errors import (NoSubtreeFound, OracleInconsistency, PreconditionViolation,
                     RadoError, SearchExhausted, UsageError)
from .fusion import (BranchReal, Decision, DecisionOracle, FusionResult, Slalom,
                     branch_from_real, decided_membership, fuse, oracle_from_spec,
                     read_off, slalom, total_decision_counterexample)
from .labeling import Labeling, label, m_sequence, node_vertex, verify_labeling
from .orbits import compatible, intersect, is_suborbit, orbits_equal
from .ramsey import (CopyExtraction, FiniteReversedTree, StrongSubtree, UnsplitResult,
                     copy_from_subtree, find_strong_subtree, is_strong_subtree,
                     truncate_tree, unsplit)
from .treeorder import (TreeNode, downset_orbit, export_dot, immediate_predecessors,
                        interval_to_root, leq, vertex_of)

__version__ = "0.1.0"
