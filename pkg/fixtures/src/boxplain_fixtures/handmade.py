"""Hand-written fixture models emitted without training.

Two tiny leaf-table models in the boxplain JSON schema: the three-variable
running example ``(x0 <= 0 and x1 <= 0) or x2 <= 0`` with +1/-1 leaves, and
the four-feature bank-loan decision tree with 0/1 leaves (features: low
income, criminal record, low education, missed payments; "yes" is any value
above 0.5). Golden labels come from evaluating the defining formulas directly.
"""

from __future__ import annotations

import itertools
import math

NEG_INF = "-inf"
POS_INF = "+inf"


def _above(c: float) -> float:
    return math.nextafter(c, math.inf)


def _leaf(bounds: dict[int, tuple], value: float) -> dict:
    return {
        "bounds": [{"dim": d, "lo": lo, "hi": hi} for d, (lo, hi) in sorted(bounds.items())],
        "value": [value],
    }


def e3_model() -> dict:
    above = _above(0.0)
    leaves = [
        _leaf({2: (NEG_INF, 0.0)}, 1.0),
        _leaf({0: (NEG_INF, 0.0), 1: (NEG_INF, 0.0), 2: (above, POS_INF)}, 1.0),
        _leaf({0: (NEG_INF, 0.0), 1: (above, POS_INF), 2: (above, POS_INF)}, -1.0),
        _leaf({0: (above, POS_INF), 2: (above, POS_INF)}, -1.0),
    ]
    return {
        "kind": "binary",
        "n_features": 3,
        "classes": 2,
        "ensembles": [[{"leaves": leaves}]],
    }


def e3_label(x) -> int:
    return 1 if (x[0] <= 0.0 and x[1] <= 0.0) or x[2] <= 0.0 else 0


def e3_samples() -> list[tuple[float, ...]]:
    corners = [tuple(float(b) for b in bits) for bits in itertools.product((0, 1), repeat=3)]
    extras = [(-0.5, 2.5, 0.125), (3.0, -1.0, -0.25), (0.0, 0.0, 7.5)]
    return corners + extras


def bankloan_model() -> dict:
    no = (NEG_INF, 0.5)
    yes = (_above(0.5), POS_INF)
    leaves = [
        _leaf({0: no, 1: no, 2: no}, 0.0),
        _leaf({0: no, 1: no, 2: yes, 3: no}, 0.0),
        _leaf({0: no, 1: no, 2: yes, 3: yes}, 1.0),
        _leaf({0: no, 1: yes}, 1.0),
        _leaf({0: yes, 2: no}, 0.0),
        _leaf({0: yes, 2: yes, 3: no}, 0.0),
        _leaf({0: yes, 2: yes, 3: yes}, 1.0),
    ]
    return {
        "kind": "binary",
        "n_features": 4,
        "classes": 2,
        "ensembles": [[{"leaves": leaves}]],
    }


def bankloan_label(x) -> int:
    low_income, criminal, low_education, missed = (v > 0.5 for v in x)
    if not low_income and criminal:
        return 1
    return 1 if low_education and missed else 0


def bankloan_samples() -> list[tuple[float, ...]]:
    return [tuple(float(b) for b in bits) for bits in itertools.product((0, 1), repeat=4)]
