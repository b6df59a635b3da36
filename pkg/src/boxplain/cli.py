"""Batch harness: run an explanation mode over a sample file and emit reports.

Outputs per run directory:
  reports.jsonl  one JSON object per sample (instance, label, explanations,
                 costs, oracle calls, elapsed seconds, timeout flag)
  summary.csv    one aggregate row: min/avg/max runtime, min/avg/max
                 explanation counts, min/avg/max cost, timeout count
  costs.csv      one row per (sample, explanation) with its cost
  burnup.csv     cumulative elapsed seconds vs. fraction of samples explained
  predictions.csv  (mode=predict) sample index and predicted label

Exit codes: 0 ok, 2 usage, 3 input error, 4 internal invariant violation.
Queries are independent and may run on a worker pool; results are assembled
in sample order by a single writer, so reports are byte-identical across
worker counts (timing columns aside).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import random
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .explain import (
    ContractError,
    CostWeights,
    ExplanationReport,
    enumerate_minimal,
    explanation_verdict,
    minimal_explanation,
    minimum_explanation_bb,
    minimum_explanation_marco,
)
from .model import Classifier, ModelError, load_model, predict_class
from .oracle import Query

__all__ = ["RunConfig", "run", "verify_explanations", "main"]

MODES = ("predict", "check", "minimal", "enumerate", "minimum-marco", "minimum-bb")
ORDERS = ("asc", "desc", "random")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_INTERNAL = 4


class InputError(Exception):
    """A user-supplied file is missing or malformed."""


@dataclass
class RunConfig:
    model: Path
    samples: Path
    mode: str
    out: Path
    weights: Path | None = None
    explanations: Path | None = None
    timeout: float = 3600.0
    workers: int = 1
    order: str = "asc"
    seed: int = 0
    dump_dimacs: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def _read_samples(path: Path, n_features: int) -> tuple[list[tuple[float, ...]], list[int | None]]:
    """Sample CSV: header with feature names, optional trailing 'label' column."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read samples file {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: empty samples file")
    header = rows[0]
    has_label = header and header[-1].strip().lower() == "label"
    want = n_features + (1 if has_label else 0)
    if len(header) != want:
        raise InputError(
            f"{path}: header has {len(header)} columns, expected {want} "
            f"({n_features} features{' + label' if has_label else ''})"
        )
    instances: list[tuple[float, ...]] = []
    labels: list[int | None] = []
    for ln, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != want:
            raise InputError(f"{path}:{ln}: row has {len(row)} columns, expected {want}")
        try:
            values = tuple(float(v) for v in row[:n_features])
        except ValueError as exc:
            raise InputError(f"{path}:{ln}: bad feature value: {exc}") from exc
        if any(math.isnan(v) for v in values):
            raise InputError(f"{path}:{ln}: NaN feature value")
        label: int | None = None
        if has_label:
            try:
                label = int(row[-1])
            except ValueError as exc:
                raise InputError(f"{path}:{ln}: bad label: {exc}") from exc
        instances.append(values)
        labels.append(label)
    if not instances:
        raise InputError(f"{path}: no sample rows")
    return instances, labels


def _read_weights(path: Path, n_features: int) -> CostWeights:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read weights file {path}: {exc}") from exc
    if not isinstance(doc, list) or len(doc) != n_features:
        raise InputError(f"{path}: weights must be a JSON array of {n_features} numbers")
    try:
        return CostWeights(tuple(float(w) for w in doc))
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _read_explanations(path: Path) -> list[tuple[int, list[int]]]:
    """Explanation file: JSON lines {"sample": int, "indices": [int, ...]}."""
    out = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read explanations file {path}: {exc}") from exc
    for ln, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{ln}: not valid JSON: {exc}") from exc
        if (
            not isinstance(doc, dict)
            or not isinstance(doc.get("sample"), int)
            or not isinstance(doc.get("indices"), list)
            or any(not isinstance(i, int) for i in doc["indices"])
        ):
            raise InputError(f'{path}:{ln}: expected {{"sample": int, "indices": [int, ...]}}')
        out.append((doc["sample"], list(doc["indices"])))
    return out


def _query_order(config: RunConfig, n: int, sample_index: int) -> list[int] | None:
    if config.order == "asc":
        return None
    if config.order == "desc":
        return list(range(n - 1, -1, -1))
    rng = random.Random((config.seed, sample_index))
    order = list(range(n))
    rng.shuffle(order)
    return order


def _explain_one(
    classifier: Classifier, config: RunConfig, index: int, instance: tuple[float, ...],
    weights: CostWeights | None,
) -> ExplanationReport:
    label = predict_class(classifier, instance)
    query = Query(classifier, instance, label)
    dimacs = None
    if config.dump_dimacs and config.mode in ("enumerate", "minimum-marco"):
        dimacs_dir = config.out / "dimacs"
        dimacs_dir.mkdir(parents=True, exist_ok=True)
        dimacs = dimacs_dir / f"sample_{index}.cnf"
    if config.mode == "minimal":
        order = _query_order(config, classifier.n_features, index)
        return minimal_explanation(query, order, weights=weights, budget=config.timeout)
    if config.mode == "enumerate":
        return enumerate_minimal(
            query, weights=weights, budget=config.timeout, dump_dimacs_to=dimacs
        )
    if config.mode == "minimum-marco":
        return minimum_explanation_marco(
            query, weights=weights, budget=config.timeout, dump_dimacs_to=dimacs
        )
    if config.mode == "minimum-bb":
        return minimum_explanation_bb(query, weights=weights, budget=config.timeout)
    raise AssertionError(f"unexpected mode {config.mode}")


# Worker-process state, loaded once per process by _init_worker.
_WORKER: dict = {}


def _init_worker(model_path: str, config: RunConfig, weights: CostWeights | None) -> None:
    _WORKER["classifier"] = load_model(model_path)
    _WORKER["config"] = config
    _WORKER["weights"] = weights


def _run_task(args: tuple[int, tuple[float, ...]]) -> tuple[int, dict]:
    index, instance = args
    report = _explain_one(
        _WORKER["classifier"], _WORKER["config"], index, instance, _WORKER["weights"]
    )
    return index, _report_row(index, report)


def _report_row(index: int, report: ExplanationReport) -> dict:
    return {
        "sample": index,
        "instance": list(report.instance),
        "label": report.label,
        "mode": report.mode,
        "explanations": [
            {"indices": [i for i, _ in e.pairs], "pairs": [[i, v] for i, v in e.pairs],
             "cost": e.cost}
            for e in report.explanations
        ],
        "costs": list(report.costs),
        "oracle_calls": report.oracle_calls,
        "elapsed": report.elapsed,
        "timed_out": report.timed_out,
    }


def _aggregate(rows: list[dict], mode: str, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "reports.jsonl", "w") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")

    runtimes = [r["elapsed"] for r in rows]
    counts = [len(r["explanations"]) for r in rows]
    all_costs = [(r["sample"], c) for r in rows for c in r["costs"]]
    timeouts = sum(1 for r in rows if r["timed_out"])

    def stats(vals):
        if not vals:
            return ("", "", "")
        return (min(vals), sum(vals) / len(vals), max(vals))

    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "mode", "samples", "timeouts",
                "runtime_min", "runtime_avg", "runtime_max",
                "count_min", "count_avg", "count_max",
                "cost_min", "cost_avg", "cost_max",
            ]
        )
        costs_only = [c for _, c in all_costs]
        writer.writerow(
            [mode, len(rows), timeouts, *stats(runtimes), *stats(counts), *stats(costs_only)]
        )

    with open(out / "costs.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample", "cost"])
        writer.writerows(all_costs)

    with open(out / "burnup.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cumulative_seconds", "fraction_explained"])
        done = 0
        acc = 0.0
        for r in rows:
            acc += r["elapsed"]
            if not r["timed_out"]:
                done += 1
            writer.writerow([acc, done / len(rows)])


def verify_explanations(
    classifier: Classifier,
    instances: Sequence[tuple[float, ...]],
    supplied: Sequence[tuple[int, list[int]]],
    weights: CostWeights | None,
) -> list[dict]:
    """Check supplied explanations: valid? minimal? cost. Bad rows are reported,
    not fatal."""
    rows = []
    for sample, indices in supplied:
        row: dict = {"sample": sample, "indices": sorted(indices)}
        if not (0 <= sample < len(instances)):
            row["error"] = f"sample index {sample} out of range"
            rows.append(row)
            continue
        if any(not (0 <= i < classifier.n_features) for i in indices):
            row["error"] = "explanation index out of range"
            rows.append(row)
            continue
        instance = instances[sample]
        label = predict_class(classifier, instance)
        query = Query(classifier, instance, label)
        valid, minimal, xcost = explanation_verdict(query, indices, weights)
        row.update({"label": label, "valid": valid, "minimal": minimal, "cost": xcost})
        rows.append(row)
    return rows


def run(config: RunConfig) -> int:
    """Execute one batch run; returns the process exit code."""
    classifier = load_model(config.model)
    instances, given_labels = _read_samples(config.samples, classifier.n_features)
    weights = (
        _read_weights(config.weights, classifier.n_features) if config.weights else None
    )
    config.out.mkdir(parents=True, exist_ok=True)

    if config.mode == "predict":
        rows = []
        mismatches = 0
        for i, instance in enumerate(instances):
            label = predict_class(classifier, instance)
            row = {"sample": i, "label": label}
            if given_labels[i] is not None:
                row["label_provided"] = given_labels[i]
                row["matches"] = label == given_labels[i]
                mismatches += 0 if row["matches"] else 1
            rows.append(row)
        with open(config.out / "reports.jsonl", "w") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
        with open(config.out / "predictions.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample", "label"])
            writer.writerows([r["sample"], r["label"]] for r in rows)
        print(f"predicted {len(rows)} samples" + (f", {mismatches} label mismatches" if any(
            l is not None for l in given_labels) else ""))
        return EXIT_OK

    if config.mode == "check":
        if config.explanations is None:
            raise InputError("mode=check needs --explanations FILE")
        supplied = _read_explanations(config.explanations)
        rows = verify_explanations(classifier, instances, supplied, weights)
        with open(config.out / "reports.jsonl", "w") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
        ok = sum(1 for r in rows if r.get("valid"))
        minimal = sum(1 for r in rows if r.get("minimal"))
        errors = sum(1 for r in rows if "error" in r)
        print(f"checked {len(rows)} explanations: {ok} valid, {minimal} minimal, {errors} errors")
        return EXIT_OK

    tasks = list(enumerate(instances))
    if config.workers == 1:
        rows = [_report_row(i, _explain_one(classifier, config, i, x, weights)) for i, x in tasks]
    else:
        import concurrent.futures

        with concurrent.futures.ProcessPoolExecutor(
            max_workers=config.workers,
            initializer=_init_worker,
            initargs=(str(config.model), config, weights),
        ) as pool:
            indexed = dict(pool.map(_run_task, tasks))
        rows = [indexed[i] for i, _ in tasks]

    _aggregate(rows, config.mode, config.out)
    timeouts = sum(1 for r in rows if r["timed_out"])
    print(
        f"explained {len(rows)} samples in mode {config.mode} "
        f"({timeouts} timeouts); reports in {config.out}"
    )
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boxplain",
        description="Minimal, all-minimal and minimum-cost explanations for "
        "tree-ensemble classifiers.",
    )
    parser.add_argument("--model", required=True, type=Path, help="model JSON file")
    parser.add_argument("--samples", required=True, type=Path, help="samples CSV file")
    parser.add_argument("--mode", required=True, choices=MODES)
    parser.add_argument("--timeout", type=float, default=3600.0,
                        help="per-query budget in seconds (default 3600)")
    parser.add_argument("--workers", type=int,
                        default=int(os.environ.get("BOXPLAIN_WORKERS", "1")),
                        help="parallel queries (default $BOXPLAIN_WORKERS or 1)")
    parser.add_argument("--weights", type=Path, default=None,
                        help="JSON array of per-dimension cost weights")
    parser.add_argument("--order", choices=ORDERS, default="asc",
                        help="deletion-filter relaxation order")
    parser.add_argument("--seed", type=int, default=0, help="seed for --order random")
    parser.add_argument("--out", required=True, type=Path, help="output directory")
    parser.add_argument("--explanations", type=Path, default=None,
                        help="explanations JSONL file (mode=check)")
    parser.add_argument("--dump-dimacs", action="store_true",
                        help="dump final seed formulas in DIMACS format")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)  # exits with code 2 on usage errors
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = RunConfig(
            model=args.model,
            samples=args.samples,
            mode=args.mode,
            out=args.out,
            weights=args.weights,
            explanations=args.explanations,
            timeout=args.timeout,
            workers=args.workers,
            order=args.order,
            seed=args.seed,
            dump_dimacs=args.dump_dimacs,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(config)
    except (InputError, ModelError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ContractError, AssertionError) as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
