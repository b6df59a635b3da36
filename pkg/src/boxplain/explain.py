"""Explanation algorithms: deletion filter, MARCO, m-MARCO and branch-and-bound.

All algorithms explore the power-set lattice of a constraint system in which
element i encodes the *absence* of input dimension i from an explanation, so a
set is satisfiable iff freeing exactly those dimensions keeps the prediction
forced. Under this encoding a maximal satisfiable subset's complement (an MCS)
is the index set of a minimal explanation.

Only dimensions referenced by the model take part; unreferenced dimensions can
never affect a prediction and never appear in minimal explanations. Each query
gets a memo of oracle verdicts so identical absence sets are decided once, and
a wall-clock budget checked between oracle calls; on budget exhaustion the
algorithms return their partial result flagged as timed out.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .model import classifier_referenced_vars, predict_class
from .oracle import Query, _free_bounds, _is_valid_fast
from .satseed import SeedFormula

__all__ = [
    "ContractError",
    "CostWeights",
    "Explanation",
    "ExplanationReport",
    "cost",
    "shrink",
    "grow",
    "minimal_explanation",
    "enumerate_minimal",
    "minimum_explanation_marco",
    "minimum_explanation_bb",
    "explanation_verdict",
]


class ContractError(Exception):
    """A caller violated an algorithm precondition."""


class _BudgetExceeded(Exception):
    """Internal: the per-query wall-clock budget ran out."""


@dataclass(frozen=True)
class CostWeights:
    """Per-dimension nonnegative weights; the cost of an index set is their sum."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(w < 0 for w in self.weights):
            raise ValueError("cost weights must be nonnegative")

    @classmethod
    def unit(cls, n: int) -> "CostWeights":
        return cls((1.0,) * n)


def cost(indices: Iterable[int], weights: CostWeights) -> float:
    """Weighted sum over the index set (unit weights reduce to cardinality)."""
    return sum(weights.weights[i] for i in sorted(indices))


@dataclass(frozen=True)
class Explanation:
    """A set of (dimension, fixed value) pairs plus its cost under the weights."""

    pairs: tuple[tuple[int, float], ...]
    cost: float

    @property
    def indices(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.pairs)


@dataclass
class ExplanationReport:
    """Per-query record of what an algorithm produced and what it cost to run."""

    instance: tuple[float, ...]
    label: int
    mode: str
    explanations: tuple[Explanation, ...]
    oracle_calls: int
    elapsed: float
    timed_out: bool = False

    @property
    def explanation(self) -> Explanation:
        return self.explanations[0]

    @property
    def costs(self) -> tuple[float, ...]:
        return tuple(e.cost for e in self.explanations)


# -- generic lattice climbing --------------------------------------------------

SetOracle = Callable[[frozenset[int]], bool]


def shrink(subset: Iterable[int], oracle: SetOracle) -> frozenset[int]:
    """Deletion-filter an unsatisfiable set down to a MUS.

    Drops elements one at a time (ascending), keeping each drop that leaves
    the set unsatisfiable. Every single-element removal from the result is
    satisfiable, which is full minimality by monotonicity.
    """
    current = frozenset(subset)
    if oracle(current):
        raise ContractError("shrink requires an unsatisfiable starting set")
    for i in sorted(current):
        candidate = current - {i}
        if not oracle(candidate):
            current = candidate
    return current


def grow(subset: Iterable[int], universe: Iterable[int], oracle: SetOracle) -> frozenset[int]:
    """Grow a satisfiable set to an MSS by adding elements that keep it satisfiable."""
    current = frozenset(subset)
    allvars = frozenset(universe)
    if not current <= allvars:
        raise ContractError("grow requires subset <= universe")
    if not oracle(current):
        raise ContractError("grow requires a satisfiable starting set")
    for i in sorted(allvars - current):
        candidate = current | {i}
        if oracle(candidate):
            current = candidate
    return current


# -- per-query oracle harness ---------------------------------------------------


class _QueryOracle:
    """Memoized absence-set oracle bound to one prediction.

    ``__call__(absent)`` decides whether freeing the given referenced
    dimensions (plus every unreferenced dimension, which never matters)
    keeps the prediction at the query label. Budget is enforced here, right
    before each non-memoized underlying oracle call.
    """

    def __init__(self, query: Query, deadline: float | None):
        self.query = query
        self.deadline = deadline
        self.refs = frozenset(classifier_referenced_vars(query.classifier).indices)
        unreferenced = set(range(query.classifier.n_features)) - self.refs
        self._base_los, self._base_his = _free_bounds(query.instance, unreferenced)
        self.calls = 0
        self._memo: dict[frozenset[int], bool] = {}

    def __call__(self, absent: frozenset[int]) -> bool:
        absent = frozenset(absent)
        cached = self._memo.get(absent)
        if cached is not None:
            return cached
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise _BudgetExceeded
        los = self._base_los.copy()
        his = self._base_his.copy()
        for i in absent:
            los[i] = float("-inf")
            his[i] = float("inf")
        self.calls += 1
        verdict = _is_valid_fast(self.query.classifier, los, his, self.query.label)
        self._memo[absent] = verdict
        return verdict

    def valid_fixed(self, fixed: Iterable[int]) -> bool:
        """Validity of the explanation containing exactly ``fixed`` indices."""
        return self(self.refs - frozenset(fixed))


def _check_query(query: Query) -> None:
    predicted = predict_class(query.classifier, query.instance)
    if predicted != query.label:
        raise ContractError(
            f"query label {query.label} is not the model's prediction {predicted}"
        )


def _setup(query: Query, weights: CostWeights | None, budget: float | None):
    _check_query(query)
    if weights is None:
        weights = CostWeights.unit(query.classifier.n_features)
    elif len(weights.weights) != query.classifier.n_features:
        raise ValueError("weights length must equal the model's feature count")
    start = time.perf_counter()
    deadline = None if budget is None else start + budget
    return weights, start, _QueryOracle(query, deadline)


def _make_explanation(
    indices: Iterable[int], query: Query, weights: CostWeights
) -> Explanation:
    idx = sorted(indices)
    pairs = tuple((i, query.instance[i]) for i in idx)
    return Explanation(pairs, cost(idx, weights))


# -- the algorithms ---------------------------------------------------------------


def minimal_explanation(
    query: Query,
    order: Sequence[int] | None = None,
    *,
    weights: CostWeights | None = None,
    budget: float | None = None,
) -> ExplanationReport:
    """Deletion-filter a single minimal explanation out of the full instance.

    Relaxes dimensions one at a time in the given order (ascending index by
    default), keeping each relaxation that preserves validity. Always
    succeeds; on budget exhaustion the current (valid, possibly non-minimal)
    explanation is returned with the timeout flag set.
    """
    n = query.classifier.n_features
    if order is None:
        order = range(n)
    elif sorted(order) != list(range(n)):
        raise ValueError(f"order must be a permutation of range({n})")
    weights, start, oracle = _setup(query, weights, budget)

    deleted: set[int] = set()
    timed_out = False
    try:
        for i in order:
            if i not in oracle.refs:
                continue
            if oracle(frozenset(deleted | {i})):
                deleted.add(i)
    except _BudgetExceeded:
        timed_out = True

    explanation = _make_explanation(oracle.refs - deleted, query, weights)
    return ExplanationReport(
        instance=query.instance,
        label=query.label,
        mode="minimal",
        explanations=(explanation,),
        oracle_calls=oracle.calls,
        elapsed=time.perf_counter() - start,
        timed_out=timed_out,
    )


def enumerate_minimal(
    query: Query,
    *,
    weights: CostWeights | None = None,
    budget: float | None = None,
    default_polarity: bool = True,
    dump_dimacs_to=None,
) -> ExplanationReport:
    """Enumerate all minimal explanations with MARCO.

    Seeds come from a SAT solver over blocking clauses; satisfiable seeds grow
    to MSSes (their complements are recorded as minimal explanations),
    unsatisfiable seeds shrink to MUSes. Terminates when the formula becomes
    unsatisfiable, i.e. when every MUS and MSS has been enumerated.
    """
    weights, start, oracle = _setup(query, weights, budget)
    refs = oracle.refs
    formula = SeedFormula(refs, default_polarity=default_polarity)
    found: list[frozenset[int]] = []
    timed_out = False
    try:
        while True:
            if oracle.deadline is not None and time.perf_counter() > oracle.deadline:
                raise _BudgetExceeded
            model = formula.solve()
            if model is None:
                break
            seed = frozenset(v for v in refs if model[v])
            if oracle(seed):
                mss = grow(seed, refs, oracle)
                formula.block_subsets(mss, refs)
                found.append(refs - mss)
            else:
                mus = shrink(seed, oracle)
                formula.block_supersets(mus)
    except _BudgetExceeded:
        timed_out = True

    if dump_dimacs_to is not None:
        dump_dimacs_to.write_text(formula.to_dimacs())
    explanations = tuple(_make_explanation(mcs, query, weights) for mcs in found)
    return ExplanationReport(
        instance=query.instance,
        label=query.label,
        mode="enumerate",
        explanations=explanations,
        oracle_calls=oracle.calls,
        elapsed=time.perf_counter() - start,
        timed_out=timed_out,
    )


def minimum_explanation_marco(
    query: Query,
    *,
    weights: CostWeights | None = None,
    budget: float | None = None,
    default_polarity: bool = True,
    dump_dimacs_to=None,
) -> ExplanationReport:
    """Find one minimum-cost minimal explanation with cost-pruned MARCO.

    Like MARCO, but seeds whose corresponding explanation already costs at
    least as much as the incumbent are blocked (with their subsets) without an
    oracle call, so exactly one minimum explanation is produced.
    """
    weights, start, oracle = _setup(query, weights, budget)
    refs = oracle.refs
    formula = SeedFormula(refs, default_polarity=default_polarity)
    incumbent: frozenset[int] = frozenset()  # absence set; explanation is refs - incumbent
    timed_out = False
    try:
        while True:
            if oracle.deadline is not None and time.perf_counter() > oracle.deadline:
                raise _BudgetExceeded
            model = formula.solve()
            if model is None:
                break
            seed = frozenset(v for v in refs if model[v])
            if cost(refs - incumbent, weights) <= cost(refs - seed, weights):
                formula.block_subsets(seed, refs)
            elif oracle(seed):
                mss = grow(seed, refs, oracle)
                formula.block_subsets(mss, refs)
                incumbent = mss
            else:
                mus = shrink(seed, oracle)
                formula.block_supersets(mus)
    except _BudgetExceeded:
        timed_out = True

    if dump_dimacs_to is not None:
        dump_dimacs_to.write_text(formula.to_dimacs())
    explanation = _make_explanation(refs - incumbent, query, weights)
    return ExplanationReport(
        instance=query.instance,
        label=query.label,
        mode="minimum-marco",
        explanations=(explanation,),
        oracle_calls=oracle.calls,
        elapsed=time.perf_counter() - start,
        timed_out=timed_out,
    )


def minimum_explanation_bb(
    query: Query,
    *,
    weights: CostWeights | None = None,
    budget: float | None = None,
) -> ExplanationReport:
    """Branch-and-bound baseline for a minimum-cost explanation.

    Recursively adds one fixed dimension at a time, bounding branches whose
    cost already reaches the incumbent's. One up-front oracle call covers the
    empty explanation, which the recursion itself can never reach.
    """
    weights, start, oracle = _setup(query, weights, budget)
    refs = sorted(oracle.refs)
    incumbent: frozenset[int] = frozenset(refs)
    timed_out = False

    def add_variable(fixed: frozenset[int], i: int) -> None:
        nonlocal incumbent
        fixed = fixed | {i}
        if cost(incumbent, weights) <= cost(fixed, weights):
            return
        if oracle.valid_fixed(fixed):
            incumbent = fixed
        else:
            for j in refs:
                if j not in fixed:
                    add_variable(fixed, j)

    try:
        if oracle.valid_fixed(frozenset()):
            incumbent = frozenset()
        else:
            for i in refs:
                add_variable(frozenset(), i)
    except _BudgetExceeded:
        timed_out = True

    explanation = _make_explanation(incumbent, query, weights)
    return ExplanationReport(
        instance=query.instance,
        label=query.label,
        mode="minimum-bb",
        explanations=(explanation,),
        oracle_calls=oracle.calls,
        elapsed=time.perf_counter() - start,
        timed_out=timed_out,
    )


def explanation_verdict(
    query: Query, indices: Iterable[int], weights: CostWeights | None = None
) -> tuple[bool, bool, float]:
    """(valid, minimal, cost) of an arbitrary supplied explanation.

    The explanation fixes exactly ``indices`` at the instance's values;
    minimality is certified by re-checking every single-index removal.
    """
    _check_query(query)
    if weights is None:
        weights = CostWeights.unit(query.classifier.n_features)
    idx = frozenset(indices)
    if any(not (0 <= i < query.classifier.n_features) for i in idx):
        raise ValueError("explanation index out of range")
    oracle = _QueryOracle(query, deadline=None)
    valid = oracle(oracle.refs - idx)
    minimal = valid and all(not oracle(oracle.refs - (idx - {i})) for i in sorted(idx))
    return valid, minimal, cost(idx, weights)
