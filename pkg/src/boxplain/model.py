"""Tree-ensemble classifiers stored as flat leaf tables.

A tree is a list of (leaf region, leaf value) pairs whose regions partition the
input space; an ensemble is an ordered list of trees sharing input and output
dimensions; a classifier is either binary (one ensemble, sigmoid threshold) or
one-vs-rest multi-class (one ensemble per class).

Ensemble sums are accumulated left to right in tree order, always starting from
0.0, so concrete prediction and the abstract transformers agree bit-for-bit on
singletons. Dimension and class indices are 0-based throughout, including the
JSON model format (see :func:`load_model`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence, Union

from .intervals import (
    INF,
    Box,
    Interval,
    float_succ,
    sigmoid,
)

__all__ = [
    "ModelError",
    "ModelFormatError",
    "PartitionError",
    "DimensionError",
    "Leaf",
    "Tree",
    "Ensemble",
    "BinaryClassifier",
    "MultiClassifier",
    "Classifier",
    "ReferencedVars",
    "predict_tree",
    "predict_ensemble",
    "predict_class",
    "referenced_vars",
    "classifier_referenced_vars",
    "softmax",
    "validate_partition",
    "load_model",
    "save_model",
]


class ModelError(Exception):
    """Base class for model-integrity problems."""


class ModelFormatError(ModelError):
    """The model file does not match the JSON schema."""


class PartitionError(ModelError):
    """Leaf regions of a tree overlap or fail to cover the input space."""


class DimensionError(ModelError):
    """Inconsistent input/output dimensions or class counts."""


@dataclass(frozen=True)
class Leaf:
    """A leaf region together with the value the tree outputs on it."""

    region: Box
    value: tuple[float, ...]


# Engine-facing compact leaf: only the dimensions narrower than TOP, as
# (dim, lo, hi) triples, plus the output value tuple.
CompactLeaf = tuple[tuple[tuple[int, float, float], ...], tuple[float, ...]]


@dataclass(frozen=True)
class Tree:
    """A decision tree as a leaf table over an n-dim input, m-dim output space."""

    leaves: tuple[Leaf, ...]
    input_dim: int
    output_dim: int

    def __post_init__(self) -> None:
        if not self.leaves:
            raise DimensionError("a tree needs at least one leaf")
        for leaf in self.leaves:
            if len(leaf.region.dims) != self.input_dim:
                raise DimensionError(
                    f"leaf region has {len(leaf.region.dims)} dims, tree has {self.input_dim}"
                )
            if len(leaf.value) != self.output_dim:
                raise DimensionError(
                    f"leaf value has {len(leaf.value)} components, tree has {self.output_dim}"
                )

    @cached_property
    def compact_leaves(self) -> tuple[CompactLeaf, ...]:
        out = []
        for leaf in self.leaves:
            bounds = tuple(
                (d, iv.lower, iv.upper)
                for d, iv in enumerate(leaf.region.dims)
                if iv.lower != -INF or iv.upper != INF
            )
            out.append((bounds, leaf.value))
        return tuple(out)

    @cached_property
    def referenced(self) -> frozenset[int]:
        dims: set[int] = set()
        for bounds, _ in self.compact_leaves:
            dims.update(d for d, _, _ in bounds)
        return frozenset(dims)


@dataclass(frozen=True)
class Ensemble:
    """An ordered tuple of trees sharing input and output dimensions."""

    trees: tuple[Tree, ...]

    def __post_init__(self) -> None:
        if not self.trees:
            raise DimensionError("an ensemble needs at least one tree")
        n = self.trees[0].input_dim
        m = self.trees[0].output_dim
        for i, t in enumerate(self.trees):
            if t.input_dim != n:
                raise DimensionError(f"tree {i} has input dim {t.input_dim}, expected {n}")
            if t.output_dim != m:
                raise DimensionError(f"tree {i} has output dim {t.output_dim}, expected {m}")

    @property
    def input_dim(self) -> int:
        return self.trees[0].input_dim

    @property
    def output_dim(self) -> int:
        return self.trees[0].output_dim

    @cached_property
    def compact_trees(self) -> tuple[tuple[CompactLeaf, ...], ...]:
        return tuple(t.compact_leaves for t in self.trees)


@dataclass(frozen=True)
class BinaryClassifier:
    """Label 1 iff sigmoid of the ensemble sum exceeds 0.5; labels are {0, 1}."""

    ensemble: Ensemble

    def __post_init__(self) -> None:
        if self.ensemble.output_dim != 1:
            raise DimensionError("binary classifier needs an ensemble with output dim 1")

    @property
    def n_features(self) -> int:
        return self.ensemble.input_dim

    @property
    def n_classes(self) -> int:
        return 2

    @property
    def ensembles(self) -> tuple[Ensemble, ...]:
        return (self.ensemble,)


@dataclass(frozen=True)
class MultiClassifier:
    """One-vs-rest classifier: one score ensemble per class, argmax decides.

    Ties go to the smallest class index. The 2-class case is BinaryClassifier.
    """

    ensembles: tuple[Ensemble, ...]

    def __post_init__(self) -> None:
        if len(self.ensembles) < 3:
            raise DimensionError("multi-class classifier needs at least 3 classes")
        n = self.ensembles[0].input_dim
        for i, e in enumerate(self.ensembles):
            if e.output_dim != 1:
                raise DimensionError(f"class {i}: per-class ensembles must have output dim 1")
            if e.input_dim != n:
                raise DimensionError(f"class {i}: input dim {e.input_dim}, expected {n}")

    @property
    def n_features(self) -> int:
        return self.ensembles[0].input_dim

    @property
    def n_classes(self) -> int:
        return len(self.ensembles)


Classifier = Union[BinaryClassifier, MultiClassifier]


@dataclass(frozen=True)
class ReferencedVars:
    """Sorted tuple of input dimensions that can affect some prediction."""

    indices: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if list(self.indices) != sorted(set(self.indices)):
            raise ValueError("indices must be sorted and unique")

    def __contains__(self, i: int) -> bool:
        return i in set(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)


def predict_tree(tree: Tree, x: Sequence[float]) -> tuple[float, ...]:
    """Value of the unique leaf whose region contains ``x``."""
    if len(x) != tree.input_dim:
        raise DimensionError(f"input has {len(x)} dims, tree expects {tree.input_dim}")
    for bounds, value in tree.compact_leaves:
        for d, lo, hi in bounds:
            if not (lo <= x[d] <= hi):
                break
        else:
            return value
    raise PartitionError(f"no leaf region contains {tuple(x)} (partition violated)")


def predict_ensemble(ensemble: Ensemble, x: Sequence[float]) -> tuple[float, ...]:
    """Element-wise sum of per-tree predictions, accumulated in tree order."""
    acc = [0.0] * ensemble.output_dim
    for tree in ensemble.trees:
        value = predict_tree(tree, x)
        for j, v in enumerate(value):
            acc[j] += v
    return tuple(acc)


def predict_class(classifier: Classifier, x: Sequence[float]) -> int:
    """Predicted label: sigmoid threshold (binary) or smallest-index argmax."""
    if isinstance(classifier, BinaryClassifier):
        (z,) = predict_ensemble(classifier.ensemble, x)
        return 1 if sigmoid(z) > 0.5 else 0
    scores = [predict_ensemble(e, x)[0] for e in classifier.ensembles]
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


def referenced_vars(ensemble: Ensemble) -> ReferencedVars:
    """Dimensions bounded (narrower than TOP) in some leaf of some tree."""
    dims: set[int] = set()
    for tree in ensemble.trees:
        dims.update(tree.referenced)
    return ReferencedVars(tuple(sorted(dims)))


def classifier_referenced_vars(classifier: Classifier) -> ReferencedVars:
    dims: set[int] = set()
    for e in classifier.ensembles:
        dims.update(referenced_vars(e).indices)
    return ReferencedVars(tuple(sorted(dims)))


def softmax(z: Sequence[float]) -> tuple[float, ...]:
    """Normalized exponentials (max-shifted for stability); sums to 1."""
    if not z:
        raise ValueError("softmax of an empty tuple")
    m = max(z)
    exps = [math.exp(v - m) for v in z]
    s = sum(exps)
    return tuple(e / s for e in exps)


def validate_partition(tree: Tree, where: str = "tree") -> None:
    """Check exactly that the leaf regions partition the full input space.

    Disjointness is pairwise (boxes are disjoint iff they are disjoint in some
    dimension). Coverage uses a counting argument: map every bound endpoint to
    a grid of cells per dimension (cell starts are the leaf lower bounds and
    the float successors of leaf upper bounds, so each leaf is exactly a union
    of whole cells), then disjoint leaves cover the space iff the sum of their
    cell counts equals the total cell count. Integer products stay exact.
    """
    compact = tree.compact_leaves
    k = len(compact)
    for i in range(k):
        bi = dict((d, (lo, hi)) for d, lo, hi in compact[i][0])
        for j in range(i + 1, k):
            disjoint = False
            for d, lo, hi in compact[j][0]:
                if d in bi:
                    ilo, ihi = bi[d]
                    if lo > ihi or hi < ilo:
                        disjoint = True
                        break
            if not disjoint:
                raise PartitionError(f"{where}: leaf regions {i} and {j} overlap")

    # Cell starts per referenced dimension.
    starts: dict[int, list[float]] = {}
    for bounds, _ in compact:
        for d, lo, hi in bounds:
            s = starts.setdefault(d, [-INF])
            if lo != -INF:
                s.append(lo)
            if hi != INF:
                s.append(float_succ(hi))
    index: dict[int, dict[float, int]] = {}
    for d, s in starts.items():
        uniq = sorted(set(s))
        starts[d] = uniq
        index[d] = {v: i for i, v in enumerate(uniq)}

    total = 1
    for d, uniq in starts.items():
        total *= len(uniq)
    covered = 0
    for bounds, _ in compact:
        cells = 1
        span: dict[int, int] = {}
        for d, lo, hi in bounds:
            first = index[d][lo]
            last = len(starts[d]) if hi == INF else index[d][float_succ(hi)]
            span[d] = last - first
        for d, uniq in starts.items():
            cells *= span.get(d, len(uniq))
        covered += cells
    if covered != total:
        raise PartitionError(
            f"{where}: leaf regions cover {covered} of {total} cells (gap in partition)"
        )


# --- JSON model format -------------------------------------------------------
#
# {"kind": "binary"|"multiclass", "n_features": int, "classes": int,
#  "ensembles": [[tree, ...], ...]}
# tree  = {"leaves": [leaf, ...]}
# leaf  = {"bounds": [{"dim": int, "lo": float|"-inf", "hi": float|"+inf"}, ...],
#          "value": [float, ...]}
# Dimensions not listed in "bounds" are TOP. Floats round-trip at full
# precision (Python json emits repr).


def _bound_to_json(v: float) -> float | str:
    if v == INF:
        return "+inf"
    if v == -INF:
        return "-inf"
    return v


def _bound_from_json(v, path: str, where: str) -> float:
    if v == "-inf":
        return -INF
    if v == "+inf":
        return INF
    if isinstance(v, (int, float)) and not math.isnan(v):
        return float(v)
    raise ModelFormatError(f"{path}: {where}: bad bound value {v!r}")


def _tree_to_json(tree: Tree) -> dict:
    leaves = []
    for bounds, value in tree.compact_leaves:
        leaves.append(
            {
                "bounds": [
                    {"dim": d, "lo": _bound_to_json(lo), "hi": _bound_to_json(hi)}
                    for d, lo, hi in bounds
                ],
                "value": list(value),
            }
        )
    return {"leaves": leaves}


def _tree_from_json(obj, n: int, path: str, where: str) -> Tree:
    if not isinstance(obj, dict) or "leaves" not in obj:
        raise ModelFormatError(f"{path}: {where}: expected a tree object with 'leaves'")
    raw_leaves = obj["leaves"]
    if not isinstance(raw_leaves, list) or not raw_leaves:
        raise ModelFormatError(f"{path}: {where}: 'leaves' must be a nonempty list")
    m = None
    leaves = []
    for li, raw in enumerate(raw_leaves):
        loc = f"{where} leaf {li}"
        if not isinstance(raw, dict) or "value" not in raw:
            raise ModelFormatError(f"{path}: {loc}: expected a leaf object with 'value'")
        value = raw["value"]
        if not isinstance(value, list) or not value:
            raise ModelFormatError(f"{path}: {loc}: 'value' must be a nonempty list")
        for v in value:
            if not isinstance(v, (int, float)) or math.isnan(v):
                raise ModelFormatError(f"{path}: {loc}: bad leaf value {v!r}")
        if m is None:
            m = len(value)
        elif len(value) != m:
            raise DimensionError(f"{path}: {loc}: value length {len(value)}, expected {m}")
        dims = [Interval(-INF, INF)] * n
        for raw_bound in raw.get("bounds", []):
            if not isinstance(raw_bound, dict) or "dim" not in raw_bound:
                raise ModelFormatError(f"{path}: {loc}: bad bound entry {raw_bound!r}")
            d = raw_bound["dim"]
            if not isinstance(d, int) or not (0 <= d < n):
                raise ModelFormatError(f"{path}: {loc}: dim {d!r} out of range [0, {n})")
            lo = _bound_from_json(raw_bound.get("lo", "-inf"), path, loc)
            hi = _bound_from_json(raw_bound.get("hi", "+inf"), path, loc)
            if lo > hi:
                raise ModelFormatError(f"{path}: {loc}: empty bound [{lo}, {hi}] on dim {d}")
            dims[d] = Interval(lo, hi)
        leaves.append(Leaf(Box(tuple(dims)), tuple(float(v) for v in value)))
    return Tree(tuple(leaves), input_dim=n, output_dim=m or 1)


def save_model(classifier: Classifier, path: str | Path) -> None:
    kind = "binary" if isinstance(classifier, BinaryClassifier) else "multiclass"
    doc = {
        "kind": kind,
        "n_features": classifier.n_features,
        "classes": classifier.n_classes,
        "ensembles": [[_tree_to_json(t) for t in e.trees] for e in classifier.ensembles],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_model(path: str | Path) -> Classifier:
    """Load and fully validate a classifier; see the schema comment above.

    Raises ModelFormatError / DimensionError / PartitionError, each naming the
    offending location in the file.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON: {exc}") from exc

    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: top level must be an object")
    kind = doc.get("kind")
    if kind not in ("binary", "multiclass"):
        raise ModelFormatError(f"{path}: 'kind' must be 'binary' or 'multiclass'")
    n = doc.get("n_features")
    if not isinstance(n, int) or n < 1:
        raise ModelFormatError(f"{path}: 'n_features' must be a positive int")
    classes = doc.get("classes")
    raw_ensembles = doc.get("ensembles")
    if not isinstance(raw_ensembles, list) or not raw_ensembles:
        raise ModelFormatError(f"{path}: 'ensembles' must be a nonempty list")

    ensembles = []
    for ei, raw_trees in enumerate(raw_ensembles):
        if not isinstance(raw_trees, list) or not raw_trees:
            raise ModelFormatError(f"{path}: ensemble {ei} must be a nonempty list of trees")
        trees = []
        for ti, raw_tree in enumerate(raw_trees):
            where = f"ensemble {ei} tree {ti}"
            tree = _tree_from_json(raw_tree, n, str(path), where)
            validate_partition(tree, where=f"{path}: {where}")
            trees.append(tree)
        try:
            ensembles.append(Ensemble(tuple(trees)))
        except DimensionError as exc:
            raise DimensionError(f"{path}: ensemble {ei}: {exc}") from exc

    try:
        if kind == "binary":
            if classes != 2:
                raise DimensionError("binary model must declare classes = 2")
            if len(ensembles) != 1:
                raise DimensionError("binary model must have exactly one ensemble")
            return BinaryClassifier(ensembles[0])
        if classes != len(ensembles):
            raise DimensionError(
                f"multiclass model declares {classes} classes but has {len(ensembles)} ensembles"
            )
        return MultiClassifier(tuple(ensembles))
    except DimensionError as exc:
        raise DimensionError(f"{path}: {exc}") from exc
