"""Shared test fixtures: hand-built models, random models, brute-force oracles.

The brute-force validity oracle here is the independent reference the abstract
oracle is judged against: it enumerates the finite partition of a box induced
by all model thresholds and concretely classifies one representative per cell.
It never touches the abstract-interpretation machinery.
"""

from __future__ import annotations

import itertools
import random
from typing import Iterable, Sequence

from boxplain.intervals import INF, Box, Interval, float_succ
from boxplain.model import (
    BinaryClassifier,
    Classifier,
    Ensemble,
    Leaf,
    MultiClassifier,
    Tree,
    classifier_referenced_vars,
    predict_class,
)

TOP_IV = Interval(-INF, INF)


def float_succ_zero() -> float:
    return float_succ(0.0)


def make_tree(n: int, leaf_specs: Iterable[tuple[dict[int, tuple[float, float]], Sequence[float]]]) -> Tree:
    """Build a tree from {dim: (lo, hi)} bound maps and value tuples."""
    leaves = []
    m = None
    for bounds, value in leaf_specs:
        dims = [TOP_IV] * n
        for d, (lo, hi) in bounds.items():
            dims[d] = Interval(lo, hi)
        leaves.append(Leaf(Box(tuple(dims)), tuple(float(v) for v in value)))
        m = len(value)
    return Tree(tuple(leaves), input_dim=n, output_dim=m)


def e3_tree() -> Tree:
    """Single tree computing (x0 <= 0 and x1 <= 0) or x2 <= 0, as +/-1 leaves."""
    above = float_succ(0.0)
    return make_tree(
        3,
        [
            ({2: (-INF, 0.0)}, (1.0,)),
            ({2: (above, INF), 0: (-INF, 0.0), 1: (-INF, 0.0)}, (1.0,)),
            ({2: (above, INF), 0: (-INF, 0.0), 1: (above, INF)}, (-1.0,)),
            ({2: (above, INF), 0: (above, INF)}, (-1.0,)),
        ],
    )


def e3_classifier() -> BinaryClassifier:
    return BinaryClassifier(Ensemble((e3_tree(),)))


# Bank-loan features: 0 = low income, 1 = criminal record, 2 = low education,
# 3 = missed payments; "no" = 0.0, "yes" = 1.0, split at 0.5. Leaf value 1
# denies the loan; sigmoid(1) > 0.5 and sigmoid(0) == 0.5, so the binary
# classifier reproduces the 0/1 leaf labels exactly.
def bankloan_tree() -> Tree:
    no = (-INF, 0.5)
    yes = (float_succ(0.5), INF)
    return make_tree(
        4,
        [
            ({0: no, 1: no, 2: no}, (0.0,)),
            ({0: no, 1: no, 2: yes, 3: no}, (0.0,)),
            ({0: no, 1: no, 2: yes, 3: yes}, (1.0,)),
            ({0: no, 1: yes}, (1.0,)),
            ({0: yes, 2: no}, (0.0,)),
            ({0: yes, 2: yes, 3: no}, (0.0,)),
            ({0: yes, 2: yes, 3: yes}, (1.0,)),
        ],
    )


def bankloan_classifier() -> BinaryClassifier:
    return BinaryClassifier(Ensemble((bankloan_tree(),)))


def constant_classifier(n: int = 3, value: float = 2.0) -> BinaryClassifier:
    tree = make_tree(n, [({}, (value,))])
    return BinaryClassifier(Ensemble((tree,)))


# -- random models -----------------------------------------------------------

DEFAULT_GRID = (-1.0, -0.5, 0.0, 0.5, 1.0)


def random_tree(
    rng: random.Random,
    n: int,
    depth: int,
    m: int = 1,
    thresholds: Sequence[float] = DEFAULT_GRID,
    integer_leaves: bool = False,
    leaf_scale: float = 1.0,
) -> Tree:
    """A random threshold tree; leaf regions partition the space by construction."""
    leaves: list[tuple[dict[int, tuple[float, float]], tuple[float, ...]]] = []

    def leaf_value() -> tuple[float, ...]:
        if integer_leaves:
            return tuple(float(rng.choice((-1, 0, 1))) for _ in range(m))
        return tuple(rng.uniform(-leaf_scale, leaf_scale) for _ in range(m))

    def rec(bounds: dict[int, tuple[float, float]], budget: int) -> None:
        if budget > 0 and rng.random() > 0.1:
            for _ in range(8):
                d = rng.randrange(n)
                c = rng.choice(thresholds)
                lo, hi = bounds.get(d, (-INF, INF))
                if lo <= c < hi:
                    rec({**bounds, d: (lo, c)}, budget - 1)
                    rec({**bounds, d: (float_succ(c), hi)}, budget - 1)
                    return
        leaves.append((dict(bounds), leaf_value()))

    rec({}, depth)
    return make_tree(n, leaves)


def random_binary_classifier(
    rng: random.Random,
    n: int = 4,
    trees: int = 3,
    depth: int = 3,
    integer_leaves: bool = False,
    leaf_scale: float = 1.0,
) -> BinaryClassifier:
    ts = tuple(
        random_tree(rng, n, depth, integer_leaves=integer_leaves, leaf_scale=leaf_scale)
        for _ in range(trees)
    )
    return BinaryClassifier(Ensemble(ts))


def random_multiclass_classifier(
    rng: random.Random,
    n: int = 4,
    classes: int = 3,
    trees: int = 2,
    depth: int = 2,
    integer_leaves: bool = False,
) -> MultiClassifier:
    ensembles = tuple(
        Ensemble(
            tuple(
                random_tree(rng, n, depth, integer_leaves=integer_leaves)
                for _ in range(trees)
            )
        )
        for _ in range(classes)
    )
    return MultiClassifier(ensembles)


def boosted_style_classifier(
    rng: random.Random, n: int = 20, trees: int = 50, depth: int = 4
) -> BinaryClassifier:
    """Gradient-boosting-shaped synthetic model: leaf magnitudes decay by stage."""
    ts = []
    for stage in range(trees):
        scale = 0.6 * (0.92 ** stage)
        ts.append(
            random_tree(
                rng,
                n,
                depth,
                thresholds=tuple(i / 4 for i in range(-8, 9)),
                leaf_scale=scale,
            )
        )
    return BinaryClassifier(Ensemble(tuple(ts)))


def random_instance(rng: random.Random, n: int, grid: Sequence[float] = DEFAULT_GRID) -> tuple[float, ...]:
    """Mix of grid-aligned and off-grid coordinates to hit cell boundaries."""
    out = []
    for _ in range(n):
        if rng.random() < 0.5:
            out.append(rng.choice(grid))
        else:
            out.append(rng.uniform(-1.5, 1.5))
    return tuple(out)


# -- brute-force oracles -------------------------------------------------------


def _cell_starts(classifier: Classifier, dim: int) -> list[float]:
    """Left endpoints of the 1-D overlay cells induced by all leaf bounds."""
    starts = {-INF}
    for ensemble in classifier.ensembles:
        for tree in ensemble.trees:
            for leaf in tree.leaves:
                iv = leaf.region.dims[dim]
                if iv.lower != -INF:
                    starts.add(iv.lower)
    return sorted(starts)


def brute_is_valid(
    classifier: Classifier,
    instance: Sequence[float],
    absent: Iterable[int],
    label: int,
) -> bool:
    """Exact validity by classifying one representative per threshold cell.

    Tree behaviour is constant on each overlay cell, and every cell's left
    endpoint is a leaf lower bound (or -inf), so taking those as candidates
    per freed dimension enumerates every reachable behaviour exactly.
    """
    free = set(absent)
    candidates = []
    for d, value in enumerate(instance):
        candidates.append(_cell_starts(classifier, d) if d in free else [value])
    for point in itertools.product(*candidates):
        if predict_class(classifier, point) != label:
            return False
    return True


def brute_minimal_explanations(
    classifier: Classifier, instance: Sequence[float], label: int, validity=None
) -> set[frozenset[int]]:
    """All minimal valid explanations by filtering the full power set of V_f.

    ``validity(fixed_indices) -> bool`` defaults to the brute-force cell
    oracle; passing a different oracle lets tests cross-check enumeration
    strategies independently of the validity decision procedure.
    """
    refs = sorted(classifier_referenced_vars(classifier).indices)
    if validity is None:
        def validity(fixed: frozenset[int]) -> bool:
            return brute_is_valid(classifier, instance, set(refs) - fixed, label)

    valid: dict[frozenset[int], bool] = {}
    for r in range(len(refs) + 1):
        for combo in itertools.combinations(refs, r):
            fixed = frozenset(combo)
            valid[fixed] = validity(fixed)
    return {
        fixed
        for fixed, ok in valid.items()
        if ok and all(not valid[fixed - {i}] for i in fixed)
    }


def sample_points_in_box(rng: random.Random, box: Box, count: int) -> list[tuple[float, ...]]:
    """Random concrete points inside a box (finite stand-ins for infinities)."""
    points = []
    for _ in range(count):
        coords = []
        for iv in box.dims:
            lo = iv.lower if iv.lower != -INF else -10.0
            hi = iv.upper if iv.upper != INF else 10.0
            if lo > hi:  # box bounded away from the stand-in range
                lo = hi = iv.lower if iv.lower != -INF else iv.upper
            coords.append(lo if lo == hi else rng.uniform(lo, hi))
        points.append(tuple(coords))
    return points


def assert_minimality_certificate(query, explanation) -> None:
    """Directly executable certificate: valid, and no single pair removable."""
    from boxplain.explain import explanation_verdict

    valid, minimal, _ = explanation_verdict(query, explanation.indices)
    assert valid, f"explanation {sorted(explanation.indices)} is not valid"
    assert minimal, f"explanation {sorted(explanation.indices)} is not minimal"
