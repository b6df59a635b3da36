"""Provably correct explanations for tree-ensemble classifiers.

Computes minimal, all-minimal and minimum-cost explanations for predictions
made by decision-tree ensembles, built around a sound-and-complete validity
oracle that runs abstract interpretation in the interval domain.
"""

from .engine import Verdict, ensemble_transform, tree_transform, vote_refine
from .explain import (
    CostWeights,
    Explanation,
    ExplanationReport,
    cost,
    enumerate_minimal,
    explanation_verdict,
    grow,
    minimal_explanation,
    minimum_explanation_bb,
    minimum_explanation_marco,
    shrink,
)
from .intervals import BOTTOM, TOP, Box, Interval
from .model import (
    BinaryClassifier,
    Classifier,
    Ensemble,
    Leaf,
    MultiClassifier,
    ReferencedVars,
    Tree,
    classifier_referenced_vars,
    load_model,
    predict_class,
    predict_ensemble,
    predict_tree,
    referenced_vars,
    save_model,
    softmax,
)
from .oracle import Query, build_box, is_valid, is_valid_binary, is_valid_multiclass
from .satseed import SeedFormula

__version__ = "0.1.0"
