"""Abstract transformers for trees and ensembles plus the refinement driver.

The driver takes a pluggable property checker and recursively splits the input
box along one tree's leaf partition per level until the checker is conclusive
(or every tree has been refined, at which point the output abstraction is a
singleton and equals the concrete prediction bit-for-bit).

The recursion is run on an explicit work stack so call-stack depth does not
grow with ensemble size; trees are refined in ensemble order by default, with
the order injectable for experiments. Output sums are always folded in
ensemble order regardless of refinement order, preserving bit-exactness.
"""

from __future__ import annotations

import enum
from typing import Callable, Sequence

from .intervals import Box, Interval, abstract, box_meet
from .model import Ensemble, PartitionError, Tree

__all__ = [
    "Verdict",
    "PropertyChecker",
    "tree_transform",
    "ensemble_transform",
    "vote_refine",
]


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    UNSURE = "unsure"


# pc: (input box, output interval per component) -> Verdict.
# Must be pure with respect to engine state and deterministic within a query.
PropertyChecker = Callable[[Box, tuple[Interval, ...]], Verdict]


def tree_transform(tree: Tree, x: Box) -> tuple[Interval, ...]:
    """Per-component hull of the values of all leaves whose region overlaps x."""
    if x.is_empty:
        raise ValueError("tree_transform on an empty box")
    if len(x.dims) != tree.input_dim:
        raise ValueError(f"box has {len(x.dims)} dims, tree expects {tree.input_dim}")
    out: list[Interval] | None = None
    for leaf in tree.leaves:
        if box_meet(x, leaf.region) is None:
            continue
        if out is None:
            out = [abstract([v]) for v in leaf.value]
        else:
            out = [
                Interval(min(iv.lower, v), max(iv.upper, v))
                for iv, v in zip(out, leaf.value)
            ]
    if out is None:
        raise PartitionError("no leaf region overlaps a nonempty box (partition violated)")
    return tuple(out)


def ensemble_transform(ensemble: Ensemble, x: Box) -> tuple[Interval, ...]:
    """Element-wise interval sum of tree transforms, folded in tree order."""
    acc_lo = [0.0] * ensemble.output_dim
    acc_hi = [0.0] * ensemble.output_dim
    for tree in ensemble.trees:
        ivs = tree_transform(tree, x)
        for j, iv in enumerate(ivs):
            acc_lo[j] += iv.lower
            acc_hi[j] += iv.upper
    return tuple(Interval(lo, hi) for lo, hi in zip(acc_lo, acc_hi))


# Fast checker contract used internally: (los, his, out_lo, out_hi) -> Verdict,
# where the box and output bounds come in as plain float lists. Checkers must
# not mutate the lists.
_FastChecker = Callable[[list, list, list, list], Verdict]


def _refine(
    ensemble: Ensemble,
    los: list[float],
    his: list[float],
    check: _FastChecker,
    order: Sequence[int],
) -> Verdict:
    """Work-stack version of the refinement recursion; see vote_refine."""
    packed = ensemble.compact_trees
    b = len(packed)
    m = ensemble.output_dim

    # A node is (los, his, fixed, remaining): fixed[tid] is the chosen leaf
    # value once tree tid has been refined on this path; remaining holds
    # (tid, candidate leaf ids) for unrefined trees, next-to-refine first.
    # Candidate lists only shrink down a path, so they are shared, re-filtered
    # against the node's box when the node is evaluated.
    root_remaining = [(tid, range(len(packed[tid]))) for tid in order]
    stack = [(los, his, [None] * b, root_remaining)]

    while stack:
        los, his, fixed, remaining = stack.pop()

        computed: dict[int, tuple[list[float], list[float]]] = {}
        filtered: list[tuple[int, list[int]]] = []
        for tid, ids in remaining:
            leaves = packed[tid]
            keep: list[int] = []
            lo = hi = None
            for i in ids:
                bounds, value = leaves[i]
                for d, blo, bhi in bounds:
                    if blo > his[d] or bhi < los[d]:
                        break
                else:
                    keep.append(i)
                    if lo is None:
                        lo = list(value)
                        hi = list(value)
                    else:
                        for j, v in enumerate(value):
                            if v < lo[j]:
                                lo[j] = v
                            elif v > hi[j]:
                                hi[j] = v
            if lo is None:
                raise PartitionError(
                    "no leaf region overlaps a nonempty box (partition violated)"
                )
            computed[tid] = (lo, hi)
            filtered.append((tid, keep))

        out_lo = [0.0] * m
        out_hi = [0.0] * m
        for tid in range(b):
            value = fixed[tid]
            if value is not None:
                for j in range(m):
                    out_lo[j] += value[j]
                    out_hi[j] += value[j]
            else:
                lo, hi = computed[tid]
                for j in range(m):
                    out_lo[j] += lo[j]
                    out_hi[j] += hi[j]

        verdict = check(los, his, out_lo, out_hi)
        if verdict is Verdict.FAIL:
            return Verdict.FAIL
        if verdict is Verdict.PASS:
            continue
        if not filtered:
            return Verdict.UNSURE  # fully refined and still inconclusive

        tid, ids = filtered[0]
        rest = filtered[1:]
        leaves = packed[tid]
        # Reversed push keeps leaf (file) order as the depth-first visit order.
        for i in reversed(ids):
            bounds, value = leaves[i]
            clos = los.copy()
            chis = his.copy()
            for d, blo, bhi in bounds:
                if blo > clos[d]:
                    clos[d] = blo
                if bhi < chis[d]:
                    chis[d] = bhi
            cfixed = fixed.copy()
            cfixed[tid] = value
            stack.append((clos, chis, cfixed, rest))

    return Verdict.PASS


def _resolve_order(ensemble: Ensemble, tree_order: Sequence[int] | None) -> Sequence[int]:
    b = len(ensemble.trees)
    if tree_order is None:
        return range(b)
    if sorted(tree_order) != list(range(b)):
        raise ValueError(f"tree_order must be a permutation of range({b})")
    return list(tree_order)


def vote_refine(
    ensemble: Ensemble,
    x: Box,
    pc: PropertyChecker,
    tree_order: Sequence[int] | None = None,
) -> Verdict:
    """Abstraction-refinement over an ensemble, driven by a property checker.

    Evaluates ``pc`` on the box and its output abstraction; returns the verdict
    unless it is UNSURE. Otherwise splits the box along the next unrefined
    tree's leaf partition (skipping empty refinements) and recurses, stopping
    at the first non-PASS verdict. Once every tree has been refined the
    checker's verdict is returned as-is.
    """
    if x.is_empty:
        raise ValueError("vote_refine on an empty box")
    if len(x.dims) != ensemble.input_dim:
        raise ValueError(f"box has {len(x.dims)} dims, ensemble expects {ensemble.input_dim}")

    def check(los, his, out_lo, out_hi):
        box = Box(tuple(Interval(lo, hi) for lo, hi in zip(los, his)))
        outputs = tuple(Interval(lo, hi) for lo, hi in zip(out_lo, out_hi))
        return pc(box, outputs)

    los = [iv.lower for iv in x.dims]
    his = [iv.upper for iv in x.dims]
    return _refine(ensemble, los, his, check, _resolve_order(ensemble, tree_order))
