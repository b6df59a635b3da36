"""Validity oracles: worked examples, tie semantics, brute-force agreement."""

import random

import pytest

from boxplain.intervals import INF, Box, Interval, TOP, singleton, top_box
from boxplain.model import (
    BinaryClassifier,
    Ensemble,
    MultiClassifier,
    predict_class,
)
from boxplain.oracle import (
    Query,
    build_box,
    is_valid,
    is_valid_binary,
    is_valid_multiclass,
    is_valid_query,
)

import helpers


class TestBuildBox:
    def test_all_fixed(self):
        assert build_box((0.0, 0.0, 0.0), set()) == Box(
            (singleton(0.0), singleton(0.0), singleton(0.0))
        )

    def test_all_free(self):
        assert build_box((0.0, 0.0, 0.0), {0, 1, 2}) == top_box(3)

    def test_one_free(self):
        assert build_box((0.0, 0.0, 0.0), {2}) == Box(
            (singleton(0.0), singleton(0.0), TOP)
        )


class TestBinaryOracle:
    def test_e3_x2_alone_is_valid(self, e3):
        box = build_box((0.0, 0.0, 0.0), {0, 1})
        assert is_valid_binary(e3.ensemble, box, 1)

    def test_e3_x0_x1_is_valid(self, e3):
        box = build_box((0.0, 0.0, 0.0), {2})
        assert is_valid_binary(e3.ensemble, box, 1)

    def test_e3_x0_alone_is_invalid(self, e3):
        # Freeing x1 and x2 admits points classified 0, e.g. (0, 1, 1).
        box = build_box((0.0, 0.0, 0.0), {1, 2})
        assert not is_valid_binary(e3.ensemble, box, 1)

    def test_label_range_checked(self, e3):
        with pytest.raises(ValueError):
            is_valid_binary(e3.ensemble, top_box(3), 2)

    def test_score_exactly_zero_is_label_zero(self):
        # sigmoid(0) == 0.5 is not > 0.5; a constant-zero model always
        # predicts 0 and the fully-free explanation must be accepted for 0.
        clf = helpers.constant_classifier(n=2, value=0.0)
        assert predict_class(clf, (1.0, 1.0)) == 0
        assert is_valid_binary(clf.ensemble, top_box(2), 0)
        assert not is_valid_binary(clf.ensemble, top_box(2), 1)

    def test_zero_score_region_agrees_with_prediction(self):
        # Tree with a 0-score region (label 0) and a positive region (label 1).
        from boxplain.intervals import float_succ

        tree = helpers.make_tree(
            1, [({0: (-INF, 0.0)}, (0.0,)), ({0: (float_succ(0.0), INF)}, (1.0,))]
        )
        clf = BinaryClassifier(Ensemble((tree,)))
        assert predict_class(clf, (-1.0,)) == 0
        assert is_valid_binary(clf.ensemble, Box((Interval(-INF, 0.0),)), 0)
        assert not is_valid_binary(clf.ensemble, top_box(1), 0)


class TestMulticlassOracle:
    def test_separated_ensembles_decided_without_refinement(self):
        # All of F_d's leaf values exceed all of F_i's: valid for the top box.
        high = Ensemble((helpers.make_tree(2, [({}, (5.0,))]),))
        low = Ensemble(
            (
                helpers.make_tree(
                    2,
                    [
                        ({0: (-INF, 0.0)}, (1.0,)),
                        ({0: (helpers.float_succ_zero(), INF)}, (2.0,)),
                    ],
                ),
            )
        )
        assert is_valid_multiclass([high, low], top_box(2), 0)
        assert not is_valid_multiclass([low, high], top_box(2), 0)

    def test_singleton_box_matches_prediction(self):
        rng = random.Random(61)
        for seed in range(10):
            clf = helpers.random_multiclass_classifier(random.Random(seed), n=3, classes=3)
            for _ in range(20):
                x = helpers.random_instance(rng, 3)
                d = predict_class(clf, x)
                box = build_box(x, set())
                for label in range(3):
                    assert is_valid_multiclass(clf, box, label) == (label == d)

    def test_one_freed_variable_agrees_with_cell_enumeration(self):
        rng = random.Random(67)
        for seed in range(15):
            clf = helpers.random_multiclass_classifier(
                random.Random(seed), n=3, classes=3, integer_leaves=(seed % 2 == 0)
            )
            for _ in range(10):
                x = helpers.random_instance(rng, 3)
                d = predict_class(clf, x)
                freed = {rng.randrange(3)}
                got = is_valid_multiclass(clf, build_box(x, freed), d)
                want = helpers.brute_is_valid(clf, x, freed, d)
                assert got == want

    def test_tie_goes_to_smallest_index(self):
        # Two identical score ensembles tie everywhere; class 0 wins the tie,
        # class 1 never can.
        same = lambda: Ensemble((helpers.make_tree(2, [({}, (1.0,))]),))
        weak = Ensemble((helpers.make_tree(2, [({}, (0.0,))]),))
        clf = MultiClassifier((same(), same(), weak))
        assert predict_class(clf, (0.0, 0.0)) == 0
        assert is_valid_multiclass(clf, top_box(2), 0)
        assert not is_valid_multiclass(clf, top_box(2), 1)
        assert not is_valid_multiclass(clf, top_box(2), 2)

    def test_tie_with_larger_index_still_valid(self):
        weak = Ensemble((helpers.make_tree(2, [({}, (0.0,))]),))
        same = lambda: Ensemble((helpers.make_tree(2, [({}, (1.0,))]),))
        clf = MultiClassifier((weak, same(), same()))
        assert predict_class(clf, (0.0, 0.0)) == 1
        assert is_valid_multiclass(clf, top_box(2), 1)
        assert not is_valid_multiclass(clf, top_box(2), 2)


class TestBruteForceAgreement:
    def _run(self, classes, seeds, queries_per_model, rng_seed):
        rng = random.Random(rng_seed)
        for seed in seeds:
            integer = seed % 3 == 0
            if classes == 2:
                clf = helpers.random_binary_classifier(
                    random.Random(seed), n=4, trees=3, depth=3, integer_leaves=integer
                )
            else:
                clf = helpers.random_multiclass_classifier(
                    random.Random(seed), n=4, classes=classes, trees=2, depth=2,
                    integer_leaves=integer,
                )
            for _ in range(queries_per_model):
                x = helpers.random_instance(rng, 4)
                d = predict_class(clf, x)
                size = rng.choice((0, 1, 1, 2, 2, 3))
                absent = set(rng.sample(range(4), size))
                got = is_valid(clf, build_box(x, absent), d)
                want = helpers.brute_is_valid(clf, x, absent, d)
                assert got == want, (seed, x, absent, d)

    def test_binary_models(self):
        self._run(classes=2, seeds=range(10), queries_per_model=20, rng_seed=71)

    def test_three_class_models(self):
        self._run(classes=3, seeds=range(10), queries_per_model=20, rng_seed=73)


class TestSigmoidRouteVsSignTest:
    def test_checker_routes_agree_on_random_boxes(self):
        # The production oracle routes the score interval through the
        # abstract sigmoid before comparing with 0.5; the sign test on raw
        # scores (z > 0) must reach the same verdict.
        from boxplain.engine import Verdict, _refine

        def sign_checker(d):
            def check(los, his, out_lo, out_hi):
                if out_lo[0] > 0.0:
                    labels = 1
                elif out_hi[0] <= 0.0:
                    labels = 0
                else:
                    return Verdict.UNSURE
                return Verdict.PASS if labels == d else Verdict.FAIL

            return check

        rng = random.Random(89)
        for seed in range(10):
            clf = helpers.random_binary_classifier(
                random.Random(seed), n=4, trees=3, integer_leaves=(seed % 2 == 0)
            )
            ensemble = clf.ensemble
            for _ in range(30):
                x = helpers.random_instance(rng, 4)
                d = predict_class(clf, x)
                absent = set(rng.sample(range(4), rng.choice((0, 1, 2))))
                box = build_box(x, absent)
                via_sigmoid = is_valid_binary(ensemble, box, d)
                los = [iv.lower for iv in box.dims]
                his = [iv.upper for iv in box.dims]
                order = range(len(ensemble.trees))
                via_sign = (
                    _refine(ensemble, los, his, sign_checker(d), order)
                    is Verdict.PASS
                )
                assert via_sigmoid == via_sign


class TestOracleProperties:
    def test_monotonicity_of_validity(self):
        # Valid with absent S implies valid with any subset of S freed.
        rng = random.Random(79)
        for seed in range(10):
            clf = helpers.random_binary_classifier(random.Random(seed), n=4, trees=3)
            for _ in range(20):
                x = helpers.random_instance(rng, 4)
                d = predict_class(clf, x)
                absent = set(rng.sample(range(4), rng.choice((1, 2, 3))))
                if is_valid(clf, build_box(x, absent), d):
                    for drop in list(absent):
                        smaller = absent - {drop}
                        assert is_valid(clf, build_box(x, smaller), d)

    def test_empty_absent_always_valid(self, e3, bankloan, constant):
        rng = random.Random(83)
        fixtures = [e3, bankloan, constant] + [
            helpers.random_binary_classifier(random.Random(s), n=4, trees=3)
            for s in range(5)
        ]
        for clf in fixtures:
            for _ in range(20):
                x = helpers.random_instance(rng, clf.n_features)
                d = predict_class(clf, x)
                assert is_valid(clf, build_box(x, set()), d)

    def test_is_valid_query_roundtrip(self, e3):
        q = Query(e3, (0.0, 0.0, 0.0), 1, frozenset({0, 1}))
        assert is_valid_query(q)

    def test_query_validates_inputs(self, e3):
        with pytest.raises(ValueError):
            Query(e3, (0.0, 0.0), 1)
        with pytest.raises(ValueError):
            Query(e3, (0.0, 0.0, 0.0), 1, frozenset({7}))
