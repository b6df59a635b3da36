"""Train gradient-boosting classifiers and export them as boxplain fixtures.

Each fixture produces three files in the output directory:

  <name>_model.json    the classifier in boxplain's leaf-table schema
  <name>_samples.csv   feature rows (with the golden label column appended)
  <name>_golden.csv    sample index and the training library's own prediction

Bit-exactness across the serialization boundary:

- feature values are snapped to float32-representable doubles before training
  and export, because scikit-learn trees compare float32-cast inputs against
  float64 thresholds; after snapping, both sides compare identical doubles;
- boosters are trained with ``init="zero"`` so the raw score is exactly the
  stage-ordered sum of learning_rate * leaf_value, which is how the leaf-table
  format accumulates;
- node-form trees become leaf boxes by root-to-leaf accumulation of bounds:
  the left child of a split ``x <= t`` keeps upper bound t, the right child
  gets lower bound nextafter(t, inf);
- thresholds and scaled leaf values are written at full repr precision.

Runnable as a script: ``python -m boxplain_fixtures.export --dataset all
--out-dir fixtures_out``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import handmade

__all__ = ["ExportError", "FixtureSpec", "SPECS", "export_model"]


class ExportError(Exception):
    """The trained booster has a structure this exporter does not support."""


@dataclass(frozen=True)
class FixtureSpec:
    name: str
    tree_count: int
    max_depth: int
    class_count: int
    feature_count: int
    golden_rows: int
    loader: Callable | None = None  # returns (X, y); None for handmade models
    seed: int = 0


def _load_synth_binary():
    from sklearn.datasets import make_classification

    return make_classification(
        n_samples=600, n_features=20, n_informative=10, n_redundant=4,
        random_state=7,
    )


def _load_synth_multi11():
    from sklearn.datasets import make_classification

    return make_classification(
        n_samples=1600, n_features=16, n_informative=12, n_redundant=2,
        n_classes=11, n_clusters_per_class=1, random_state=11,
    )


def _load_wine():
    from sklearn.datasets import load_wine

    data = load_wine()
    return data.data, data.target


SPECS = {
    "e3": FixtureSpec("e3", 1, 3, 2, 3, golden_rows=11),
    "bankloan": FixtureSpec("bankloan", 1, 4, 2, 4, golden_rows=16),
    "synth-binary": FixtureSpec(
        "synth-binary", 50, 3, 2, 20, golden_rows=200, loader=_load_synth_binary
    ),
    "synth-multi11": FixtureSpec(
        "synth-multi11", 50, 3, 11, 16, golden_rows=200, loader=_load_synth_multi11
    ),
    "wine": FixtureSpec("wine", 50, 4, 3, 13, golden_rows=178, loader=_load_wine),
}


def _bound_json(v) -> float | str:
    if isinstance(v, str):
        return v
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    return float(v)


def _tree_to_leaves(tree, learning_rate: float) -> list[dict]:
    """Root-to-leaf bound accumulation over a fitted sklearn tree."""
    if tree.n_outputs != 1:
        raise ExportError(f"expected single-output trees, got n_outputs={tree.n_outputs}")
    leaves: list[dict] = []
    # (node id, {dim: [lo, hi]}) with float endpoints, inf for unbounded.
    stack: list[tuple[int, dict[int, list[float]]]] = [(0, {})]
    while stack:
        node, bounds = stack.pop()
        if tree.children_left[node] == -1:
            value = learning_rate * float(tree.value[node][0][0])
            leaves.append(
                {
                    "bounds": [
                        {"dim": d, "lo": _bound_json(lo), "hi": _bound_json(hi)}
                        for d, (lo, hi) in sorted(bounds.items())
                    ],
                    "value": [value],
                }
            )
            continue
        feature = int(tree.feature[node])
        threshold = float(tree.threshold[node])
        lo, hi = bounds.get(feature, [-math.inf, math.inf])
        left = dict(bounds)
        left[feature] = [lo, min(hi, threshold)]
        right = dict(bounds)
        right[feature] = [max(lo, math.nextafter(threshold, math.inf)), hi]
        stack.append((tree.children_right[node], right))
        stack.append((tree.children_left[node], left))
    return leaves


def _train(spec: FixtureSpec):
    from sklearn.ensemble import GradientBoostingClassifier

    X, y = spec.loader()
    # Snap to float32-representable doubles; see module docstring.
    X = np.ascontiguousarray(X, dtype=np.float32).astype(np.float64)
    clf = GradientBoostingClassifier(
        n_estimators=spec.tree_count,
        max_depth=spec.max_depth,
        random_state=spec.seed,
        init="zero",
    )
    clf.fit(X, y)
    if list(clf.classes_) != list(range(spec.class_count)):
        raise ExportError(
            f"{spec.name}: expected classes 0..{spec.class_count - 1}, got {clf.classes_}"
        )
    return clf, X


def _booster_to_model(clf, spec: FixtureSpec) -> dict:
    stages, per_stage = clf.estimators_.shape
    lr = float(clf.learning_rate)
    if per_stage == 1:
        kind, classes, columns = "binary", 2, [0]
    else:
        kind, classes, columns = "multiclass", per_stage, list(range(per_stage))
        if classes != spec.class_count:
            raise ExportError(
                f"{spec.name}: booster has {classes} per-stage trees, "
                f"spec says {spec.class_count} classes"
            )
    ensembles = []
    for k in columns:
        trees = []
        for s in range(stages):
            trees.append({"leaves": _tree_to_leaves(clf.estimators_[s, k].tree_, lr)})
        ensembles.append(trees)
    return {
        "kind": kind,
        "n_features": spec.feature_count,
        "classes": classes,
        "ensembles": ensembles,
    }


def _write_samples(path: Path, X, labels) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(len(X[0]))] + ["label"])
        for row, label in zip(X, labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def _write_golden(path: Path, labels) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample", "label"])
        writer.writerows((i, int(label)) for i, label in enumerate(labels))


def export_model(spec: FixtureSpec, out_dir: str | Path) -> dict[str, Path]:
    """Write the model, samples and golden predictions for one fixture."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "model": out_dir / f"{spec.name}_model.json",
        "samples": out_dir / f"{spec.name}_samples.csv",
        "golden": out_dir / f"{spec.name}_golden.csv",
    }

    if spec.loader is None:
        if spec.name == "e3":
            model = handmade.e3_model()
            rows = handmade.e3_samples()
            labels = [handmade.e3_label(x) for x in rows]
        elif spec.name == "bankloan":
            model = handmade.bankloan_model()
            rows = handmade.bankloan_samples()
            labels = [handmade.bankloan_label(x) for x in rows]
        else:
            raise ExportError(f"unknown handmade fixture {spec.name}")
    else:
        clf, X = _train(spec)
        model = _booster_to_model(clf, spec)
        rows = X[: spec.golden_rows]
        labels = clf.predict(rows)  # the training library's own predictions

    paths["model"].write_text(json.dumps(model, indent=1) + "\n")
    _write_samples(paths["samples"], rows, labels)
    _write_golden(paths["golden"], labels)
    return paths


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="boxplain-fixtures",
        description="Export trained gradient-boosting fixtures for boxplain.",
    )
    parser.add_argument("--dataset", required=True,
                        choices=sorted(SPECS) + ["all"])
    parser.add_argument("--out-dir", required=True, type=Path)
    args = parser.parse_args(argv)
    names = sorted(SPECS) if args.dataset == "all" else [args.dataset]
    for name in names:
        paths = export_model(SPECS[name], args.out_dir)
        print(f"{name}: wrote {', '.join(str(p) for p in paths.values())}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
