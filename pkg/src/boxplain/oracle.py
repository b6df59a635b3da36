"""Sound-and-complete validity oracles for explanations.

An explanation is valid for a prediction iff fixing the explanation's
variables at their observed values forces the classifier to the predicted
label for every assignment to the remaining (absent) variables. The absent
variables are encoded as TOP components of an abstract input box; validity is
then decided by refinement (see :mod:`boxplain.engine`), which makes the
verdict exact: PASS iff every concrete point in the box maps to the label.

Binary verdicts route the ensemble sum through the abstract sigmoid and
compare against 0.5 with the same float sigmoid the concrete predictor uses,
so oracle and predictor agree bit-for-bit. Multi-class verdicts compare the
predicted class's score ensemble against every other class, strictly for
smaller class indices and non-strictly for larger ones, matching the
smallest-index argmax of the concrete predictor exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .engine import Verdict, _refine
from .intervals import INF, Box, sigmoid, singleton, TOP
from .model import BinaryClassifier, Classifier, Ensemble, MultiClassifier

__all__ = [
    "Query",
    "build_box",
    "is_valid_binary",
    "is_valid_multiclass",
    "is_valid",
]


@dataclass(frozen=True)
class Query:
    """One prediction in need of explanation, plus the freed variable set.

    ``label`` must be the classifier's actual prediction on ``instance``;
    the oracle explains predictions, not wishes.
    """

    classifier: Classifier
    instance: tuple[float, ...]
    label: int
    absent: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        n = self.classifier.n_features
        if len(self.instance) != n:
            raise ValueError(f"instance has {len(self.instance)} dims, model expects {n}")
        if any(not (0 <= i < n) for i in self.absent):
            raise ValueError(f"absent indices out of range [0, {n})")


def build_box(instance: Sequence[float], absent: Iterable[int]) -> Box:
    """TOP on absent dimensions, singleton at the observed value elsewhere."""
    free = set(absent)
    return Box(
        tuple(TOP if i in free else singleton(v) for i, v in enumerate(instance))
    )


def _binary_checker(d: int):
    def check(los, his, out_lo, out_hi):
        # Label set of sigmoid(sum) > 0.5 over the output interval; the
        # comparison against the singleton 0.5 is exact at touching endpoints.
        if sigmoid(out_lo[0]) > 0.5:
            labels = 1
        elif sigmoid(out_hi[0]) <= 0.5:
            labels = 0
        else:
            return Verdict.UNSURE
        return Verdict.PASS if labels == d else Verdict.FAIL

    return check


def _is_valid_binary_fast(ensemble: Ensemble, los, his, d: int) -> bool:
    return _refine(ensemble, los, his, _binary_checker(d), range(len(ensemble.trees))) is Verdict.PASS


def is_valid_binary(ensemble: Ensemble, x: Box, d: int) -> bool:
    """True iff every concrete point in ``x`` gets binary label ``d``."""
    if x.is_empty:
        raise ValueError("is_valid_binary on an empty box")
    if d not in (0, 1):
        raise ValueError(f"binary label must be 0 or 1, got {d}")
    los = [iv.lower for iv in x.dims]
    his = [iv.upper for iv in x.dims]
    return _is_valid_binary_fast(ensemble, los, his, d)


def _against_smaller(ylo, yhi):
    """Checker factory: class d must beat class i < d strictly (ties lose)."""

    def check(los, his, out_lo, out_hi):
        ilo, ihi = out_lo[0], out_hi[0]
        if ylo > ihi:
            return Verdict.PASS
        if yhi <= ilo:
            return Verdict.FAIL
        return Verdict.UNSURE

    return check


def _against_larger(ylo, yhi):
    """Checker factory: class d must not lose to class i > d (ties win)."""

    def check(los, his, out_lo, out_hi):
        ilo, ihi = out_lo[0], out_hi[0]
        if ihi <= ylo:
            return Verdict.PASS
        if ilo > yhi:
            return Verdict.FAIL
        return Verdict.UNSURE

    return check


def _is_valid_multi_fast(ensembles: Sequence[Ensemble], los, his, d: int) -> bool:
    others = [(i, e) for i, e in enumerate(ensembles) if i != d]

    def check_d(dlos, dhis, out_lo, out_hi):
        ylo, yhi = out_lo[0], out_hi[0]
        for i, ens in others:
            make = _against_smaller if i < d else _against_larger
            verdict = _refine(ens, dlos, dhis, make(ylo, yhi), range(len(ens.trees)))
            if verdict is not Verdict.PASS:
                return verdict
        return Verdict.PASS

    target = ensembles[d]
    return _refine(target, los, his, check_d, range(len(target.trees))) is Verdict.PASS


def is_valid_multiclass(
    classifier: MultiClassifier | Sequence[Ensemble], x: Box, d: int
) -> bool:
    """True iff every concrete point in ``x`` gets class ``d`` (one-vs-rest).

    Accepts a MultiClassifier or a bare sequence of per-class ensembles (the
    two-ensemble case is useful in tests even though classifiers with two
    classes are represented as BinaryClassifier).
    """
    ensembles = classifier.ensembles if isinstance(classifier, MultiClassifier) else tuple(classifier)
    if x.is_empty:
        raise ValueError("is_valid_multiclass on an empty box")
    if not (0 <= d < len(ensembles)):
        raise ValueError(f"label {d} out of range [0, {len(ensembles)})")
    los = [iv.lower for iv in x.dims]
    his = [iv.upper for iv in x.dims]
    return _is_valid_multi_fast(ensembles, los, his, d)


def _is_valid_fast(classifier: Classifier, los, his, d: int) -> bool:
    if isinstance(classifier, BinaryClassifier):
        return _is_valid_binary_fast(classifier.ensemble, los, his, d)
    return _is_valid_multi_fast(classifier.ensembles, los, his, d)


def is_valid(classifier: Classifier, x: Box, d: int) -> bool:
    """Dispatch to the binary or multi-class oracle."""
    if isinstance(classifier, BinaryClassifier):
        return is_valid_binary(classifier.ensemble, x, d)
    return is_valid_multiclass(classifier, x, d)


def is_valid_query(query: Query) -> bool:
    """Validity of the explanation that fixes everything except query.absent."""
    return is_valid(query.classifier, build_box(query.instance, query.absent), query.label)


def _free_bounds(instance: Sequence[float], free: Iterable[int]) -> tuple[list, list]:
    """los/his lists for a box fixed at the instance except on ``free`` dims."""
    los = list(instance)
    his = list(instance)
    for i in free:
        los[i] = -INF
        his[i] = INF
    return los, his
