"""Fixture generation for boxplain.

Trains small gradient-boosting classifiers on locally available tabular
datasets, converts the boosters' node-form trees into boxplain's leaf-table
model schema, and emits sample CSVs plus golden-prediction files so the
explainer's predictions can be cross-checked against the training library's
own, bit for bit. Communicates with boxplain only through its external
interfaces: the model JSON schema, the samples CSV format, and the CLI.
"""

from .export import ExportError, FixtureSpec, SPECS, export_model

__version__ = "0.1.0"
