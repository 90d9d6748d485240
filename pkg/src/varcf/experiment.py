"""Batch experiment driver: load -> split -> train -> evaluate -> report.

Every number in a report is a pure function of the three seeds (split,
init, sampling) plus the corpus; wall-clock timing and the creation
timestamp are the only volatile fields, and they are grouped so they can
be stripped when comparing runs (see :func:`strip_volatile`).
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field, fields

from .data import RatingsDataset, load_ratings, registry, split
from .errors import ConfigError, VarcfError
from .metrics import PredictionPairs, mae, mse, r2, ranking_sweep
from .models import (
    ARCHITECTURES,
    ModelConfig,
    ModelParams,
    build_model,
    predict,
    train_model,
)
from .rng import RngState, derive_seed

REPORT_SCHEMA_VERSION = "1.0"

# fixed per-architecture codes: results do not depend on which other
# architectures share the run
_ARCH_CODE = {arch: i + 1 for i, arch in enumerate(ARCHITECTURES)}
_INIT_TAG = 0x494E4954
_TRAIN_TAG = 0x54524E31
_EVAL_TAG = 0x4556414C

PROTOCOL = {
    "candidate_set": "user-test-items",
    "tie_break": "ascending-item-index",
    "recall_without_relevant_items": "user-skipped",
    "ndcg_zero_idcg": "user-skipped",
    "prediction_clamp": "rating-scale-at-report-time",
    "duplicate_policy": "keep-last",
    "split_level": "rating",
}


@dataclass
class ExperimentSpec:
    """Everything needed to reproduce one experiment run."""

    dataset_path: str
    dataset_name: str | None = None
    architectures: list[str] = field(default_factory=lambda: ["VDeepMF"])
    split_ratio: float = 0.8
    split_seed: int = 0
    init_seed: int = 0
    sample_seed: int = 0
    epochs: int | None = None  # None -> per-dataset registry default
    embedding_dim: int = 5
    latent_dim: int = 5
    mlp_hidden: tuple[int, ...] | None = None
    batch_size: int = 32
    learning_rate: float = 0.001
    n_samples: int = 10
    n_sweep: tuple[int, ...] = tuple(range(1, 11))
    relevance_threshold: float | None = None
    report_path: str | None = None
    report_format: str = "json"

    def __post_init__(self):
        if not self.architectures:
            raise ConfigError("an experiment needs at least one architecture")
        canonical = {a.lower(): a for a in ARCHITECTURES}
        resolved = []
        for arch in self.architectures:
            key = str(arch).lower()
            if key not in canonical:
                raise ConfigError(
                    f"unknown architecture {arch!r}; expected one of {ARCHITECTURES}"
                )
            resolved.append(canonical[key])
        self.architectures = resolved
        if self.report_format not in ("json", "csv"):
            raise ConfigError(
                f"unknown report format {self.report_format!r}; expected 'json' or 'csv'"
            )
        if self.mlp_hidden is not None:
            self.mlp_hidden = tuple(int(w) for w in self.mlp_hidden)
        self.n_sweep = tuple(int(n) for n in self.n_sweep)
        if any(n < 1 for n in self.n_sweep):
            raise ConfigError(f"top-N sweep values must be >= 1, got {self.n_sweep}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown experiment config keys: {unknown}")
        return cls(**d)


def resolve_epochs(spec: ExperimentSpec, arch: str, dataset_name: str | None) -> int:
    """Explicit epochs, else the per-dataset default for this architecture."""
    if spec.epochs is not None:
        return spec.epochs
    info = registry(dataset_name)
    if info is not None and arch in info.default_epochs:
        return info.default_epochs[arch]
    raise ConfigError(
        f"no epoch default known for {arch} on dataset {dataset_name!r}; pass epochs explicitly"
    )


def _clean(value: float) -> float | None:
    """NaN -> None so reports stay JSON-native and round-trip structurally."""
    return None if isinstance(value, float) and math.isnan(value) else value


def build_arch_config(spec: ExperimentSpec, arch: str, dataset: RatingsDataset) -> ModelConfig:
    return ModelConfig(
        architecture=arch,
        num_users=dataset.num_users,
        num_items=dataset.num_items,
        embedding_dim=spec.embedding_dim,
        latent_dim=spec.latent_dim,
        mlp_hidden=spec.mlp_hidden,
        batch_size=spec.batch_size,
        epochs=resolve_epochs(spec, arch, dataset.name),
        learning_rate=spec.learning_rate,
        seed=derive_seed(spec.init_seed, _INIT_TAG, _ARCH_CODE[arch]),
        n_prediction_samples=spec.n_samples,
        rating_min=dataset.scale_min,
        rating_max=dataset.scale_max,
    )


def evaluate_model(
    params: ModelParams,
    config: ModelConfig,
    test: RatingsDataset,
    eval_seed: int,
    n_sweep,
    threshold: float | None,
) -> dict:
    """Metric block for one trained model on one test split."""
    rng = RngState(eval_seed)
    preds = predict(params, config, test.user_ids, test.item_ids, rng, clip=True)
    pairs = PredictionPairs(
        user_ids=test.user_ids,
        item_ids=test.item_ids,
        ratings=test.ratings,
        predictions=preds,
    )
    block = {
        "mae": mae(pairs),
        "mse": mse(pairs),
        "r2": r2(pairs),
    }
    if n_sweep:
        if threshold is None:
            raise ConfigError(
                "ranking metrics need a relevance threshold; pass one explicitly "
                "or use a registered dataset name"
            )
        sweep = ranking_sweep(pairs, n_sweep, threshold)
        block["ranking"] = {
            str(n): {k: _clean(v) for k, v in values.items()} for n, values in sweep.items()
        }
    return block


def run_experiment(spec: ExperimentSpec, dataset: RatingsDataset | None = None) -> dict:
    """Train and evaluate every requested architecture; returns the report.

    ``dataset`` can be passed to skip re-loading in callers that already
    hold the corpus (the CLI loads from spec.dataset_path).
    """
    if dataset is None:
        dataset = load_ratings(spec.dataset_path, name=spec.dataset_name)
    threshold = (
        spec.relevance_threshold
        if spec.relevance_threshold is not None
        else dataset.relevance_threshold
    )
    pair = split(dataset, spec.split_ratio, spec.split_seed)

    arch_blocks = {}
    for arch in spec.architectures:
        code = _ARCH_CODE[arch]
        config = build_arch_config(spec, arch, dataset)
        params = build_model(config)
        fit = train_model(
            params, config, pair.train, derive_seed(spec.sample_seed, _TRAIN_TAG, code)
        )
        block = evaluate_model(
            params,
            config,
            pair.test,
            derive_seed(spec.sample_seed, _EVAL_TAG, code),
            spec.n_sweep,
            threshold,
        )
        block["fit_epochs"] = fit.epochs
        block["final_train_loss"] = fit.epoch_losses[-1] if fit.epoch_losses else None
        block["config"] = config.to_dict()
        block["timing"] = {"fit_seconds": fit.seconds}
        arch_blocks[arch] = block

    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "metadata": {
            "dataset": {
                "name": dataset.name,
                "path": str(spec.dataset_path),
                "num_users": dataset.num_users,
                "num_items": dataset.num_items,
                "num_ratings": len(dataset),
                "scale": [dataset.scale_min, dataset.scale_max],
                "relevance_threshold": threshold,
                "corpus_checksum": dataset.checksum(),
            },
            "split": {
                "ratio": spec.split_ratio,
                "train_ratings": len(pair.train),
                "test_ratings": len(pair.test),
            },
            "seeds": {
                "split": spec.split_seed,
                "init": spec.init_seed,
                "sample": spec.sample_seed,
            },
            "prediction_samples": spec.n_samples,
            "n_sweep": list(spec.n_sweep),
            "protocol": dict(PROTOCOL),
            "created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        },
        "architectures": arch_blocks,
    }


def strip_volatile(report: dict) -> dict:
    """Copy of a report without wall-clock fields; everything left is a
    deterministic function of seeds and corpus."""
    out = json.loads(json.dumps(report))
    out.get("metadata", {}).pop("created_at", None)
    for block in out.get("architectures", {}).values():
        block.pop("timing", None)
    return out


def canonical_bytes(report: dict) -> bytes:
    """Canonical serialization of the deterministic part of a report."""
    return json.dumps(strip_volatile(report), sort_keys=True, indent=2).encode()


def emit_report(report: dict, path, fmt: str = "json") -> None:
    """Write the full report as nested JSON or as a flat CSV.

    CSV layout: one ``metric`` row per (architecture, metric, N) plus
    ``meta`` rows for run metadata and per-architecture fit info.
    """
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return
    if fmt != "csv":
        raise ConfigError(f"unknown report format {fmt!r}; expected 'json' or 'csv'")

    def flatten(prefix: str, value, rows: list) -> None:
        if isinstance(value, dict):
            for k in sorted(value):
                flatten(f"{prefix}.{k}" if prefix else str(k), value[k], rows)
        elif isinstance(value, list):
            rows.append((prefix, json.dumps(value)))
        else:
            rows.append((prefix, value))

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["record", "architecture", "metric", "n", "value"])
        meta_rows: list = [("schema_version", report["schema_version"])]
        flatten("", report.get("metadata", {}), meta_rows)
        for key, value in meta_rows:
            writer.writerow(["meta", "", key, "", value])
        for arch in sorted(report.get("architectures", {})):
            block = report["architectures"][arch]
            for key, value in block.items():
                if key in ("ranking", "config", "timing"):
                    continue
                if key in ("mae", "mse", "r2"):
                    continue
                writer.writerow(["meta", arch, key, "", value])
            for key in ("fit_seconds",):
                if key in block.get("timing", {}):
                    writer.writerow(["meta", arch, f"timing.{key}", "", block["timing"][key]])
            for metric in ("mae", "mse", "r2"):
                writer.writerow(["metric", arch, metric, "", block[metric]])
            for n in sorted(block.get("ranking", {}), key=int):
                for metric in ("precision", "recall", "ndcg"):
                    writer.writerow(
                        ["metric", arch, metric, n, block["ranking"][n][metric]]
                    )


def load_report(path) -> dict:
    """Read a JSON report back, rejecting unknown major schema versions."""
    with open(path, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    version = str(report.get("schema_version", ""))
    if version.split(".")[0] != REPORT_SCHEMA_VERSION.split(".")[0]:
        raise VarcfError(
            f"report schema version {version!r} not supported "
            f"(expected major {REPORT_SCHEMA_VERSION.split('.')[0]})"
        )
    return report
