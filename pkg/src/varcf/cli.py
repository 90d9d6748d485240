"""Command-line driver.

Subcommands: split, train, evaluate, run, predict.
Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import data as data_mod
from .data import load_ratings, load_json, save_json, save_ratings_csv, split
from .errors import (
    ConfigError,
    DataError,
    IndexRangeError,
    NumericError,
    VarcfError,
)
from .experiment import (
    ExperimentSpec,
    build_arch_config,
    emit_report,
    evaluate_model,
    run_experiment,
)
from .models import (
    build_model,
    load_checkpoint,
    predict,
    save_checkpoint,
    train_model,
)
from .rng import RngState, derive_seed

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default; route through exit code 1
    def error(self, message):
        raise _UsageError(message)


def _parse_sweep(text: str) -> tuple[int, ...]:
    """Accept '1-10' ranges or comma lists like '1,2,5,10'."""
    text = text.strip()
    if "-" in text and "," not in text:
        lo, hi = text.split("-", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(part) for part in text.split(",") if part.strip())


def _parse_widths(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--arch", help="architecture (or comma list for run)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--embedding-dim", type=int)
    p.add_argument("--latent-dim", type=int)
    p.add_argument("--mlp-hidden", type=_parse_widths, metavar="W1,W2,...")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float, dest="learning_rate")
    p.add_argument("--init-seed", type=int)
    p.add_argument("--sample-seed", type=int)
    p.add_argument("--n-samples", type=int, help="prediction samples to average (default 10)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="varcf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="split a corpus into train/test files plus a manifest")
    p.add_argument("--dataset", required=True)
    p.add_argument("--name", help="registered dataset name for scale/threshold defaults")
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("train", help="train one architecture and write a checkpoint")
    p.add_argument("--dataset", required=True, help="ratings file to train on")
    p.add_argument("--name")
    p.add_argument("--mapping", help="id mapping json from 'split' (keeps indices aligned)")
    _add_model_flags(p)
    p.add_argument("--checkpoint", required=True, help="output .npz path")

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a test split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--test-file", required=True)
    p.add_argument("--name")
    p.add_argument("--mapping")
    p.add_argument("--theta", type=float, help="relevance threshold for ranking metrics")
    p.add_argument("--n-samples", type=int)
    p.add_argument("--sample-seed", type=int, default=0)
    p.add_argument("--top-n-sweep", type=_parse_sweep, default=tuple(range(1, 11)))
    p.add_argument("--report", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("run", help="full pipeline: load, split, train, evaluate, report")
    p.add_argument("--config", help="experiment spec json; flags override file values")
    p.add_argument("--dataset")
    p.add_argument("--name")
    p.add_argument("--ratio", type=float)
    p.add_argument("--split-seed", type=int)
    _add_model_flags(p)
    p.add_argument("--theta", type=float)
    p.add_argument("--top-n-sweep", type=_parse_sweep)
    p.add_argument("--report")
    p.add_argument("--format", choices=("json", "csv"))

    p = sub.add_parser("predict", help="score user,item pairs with a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--pairs", required=True, help="csv of user,item per line")
    p.add_argument("--mapping")
    p.add_argument("--n-samples", type=int)
    p.add_argument("--sample-seed", type=int, default=0)
    p.add_argument("--out", help="output file (default stdout)")
    return parser


def _cmd_split(args) -> int:
    dataset = load_ratings(args.dataset, name=args.name)
    pair = split(dataset, args.ratio, args.split_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_ratings_csv(pair.train, out / "train.csv")
    save_ratings_csv(pair.test, out / "test.csv")
    save_json(data_mod.mapping_dict(dataset), out / "mapping.json")
    save_json(data_mod.split_manifest(pair, dataset), out / "manifest.json")
    print(
        f"split {len(dataset)} ratings into {len(pair.train)} train / "
        f"{len(pair.test)} test under {out}"
    )
    return EXIT_OK


def _spec_from_args(args) -> ExperimentSpec:
    values = {}
    if getattr(args, "config", None):
        values.update(load_json(args.config))
    overrides = {
        "dataset_path": getattr(args, "dataset", None),
        "dataset_name": getattr(args, "name", None),
        "split_ratio": getattr(args, "ratio", None),
        "split_seed": getattr(args, "split_seed", None),
        "init_seed": getattr(args, "init_seed", None),
        "sample_seed": getattr(args, "sample_seed", None),
        "epochs": getattr(args, "epochs", None),
        "embedding_dim": getattr(args, "embedding_dim", None),
        "latent_dim": getattr(args, "latent_dim", None),
        "mlp_hidden": getattr(args, "mlp_hidden", None),
        "batch_size": getattr(args, "batch_size", None),
        "learning_rate": getattr(args, "learning_rate", None),
        "n_samples": getattr(args, "n_samples", None),
        "n_sweep": getattr(args, "top_n_sweep", None),
        "relevance_threshold": getattr(args, "theta", None),
        "report_path": getattr(args, "report", None),
        "report_format": getattr(args, "format", None),
    }
    if getattr(args, "arch", None):
        overrides["architectures"] = [a.strip() for a in args.arch.split(",") if a.strip()]
    values.update({k: v for k, v in overrides.items() if v is not None})
    if not values.get("dataset_path"):
        raise ConfigError("a dataset path is required (--dataset or config file)")
    return ExperimentSpec.from_dict(values)


def _cmd_run(args) -> int:
    spec = _spec_from_args(args)
    report = run_experiment(spec)
    if spec.report_path:
        emit_report(report, spec.report_path, spec.report_format)
        print(f"report written to {spec.report_path} ({spec.report_format})")
    for arch, block in report["architectures"].items():
        print(
            f"{arch}: MAE={block['mae']:.4f} MSE={block['mse']:.4f} "
            f"R2={block['r2']:.4f} ({block['fit_epochs']} epochs, "
            f"{block['timing']['fit_seconds']:.1f}s)"
        )
    return EXIT_OK


def _cmd_train(args) -> int:
    if not args.arch:
        raise ConfigError("--arch is required for train")
    mapping = load_json(args.mapping) if args.mapping else None
    dataset = load_ratings(args.dataset, name=args.name, mapping=mapping)
    spec_fields = {
        "dataset_path": args.dataset,
        "dataset_name": args.name,
        "architectures": [args.arch],
    }
    for key, attr in (
        ("epochs", "epochs"),
        ("embedding_dim", "embedding_dim"),
        ("latent_dim", "latent_dim"),
        ("mlp_hidden", "mlp_hidden"),
        ("batch_size", "batch_size"),
        ("learning_rate", "learning_rate"),
        ("init_seed", "init_seed"),
        ("sample_seed", "sample_seed"),
        ("n_samples", "n_samples"),
    ):
        value = getattr(args, attr, None)
        if value is not None:
            spec_fields[key] = value
    spec = ExperimentSpec.from_dict(spec_fields)
    arch = spec.architectures[0]
    config = build_arch_config(spec, arch, dataset)
    params = build_model(config)
    fit = train_model(
        params, config, dataset, derive_seed(spec.sample_seed, 0x54524E31, 1)
    )
    path = save_checkpoint(args.checkpoint, config, params)
    print(
        f"trained {arch} for {fit.epochs} epochs "
        f"(final loss {fit.epoch_losses[-1]:.4f}, {fit.seconds:.1f}s); "
        f"checkpoint at {path}"
    )
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    config, params = load_checkpoint(args.checkpoint)
    mapping = load_json(args.mapping) if args.mapping else None
    test = load_ratings(args.test_file, name=args.name, mapping=mapping)
    threshold = args.theta if args.theta is not None else test.relevance_threshold
    n_samples = args.n_samples if args.n_samples is not None else config.n_prediction_samples
    config.n_prediction_samples = n_samples
    block = evaluate_model(
        params,
        config,
        test,
        derive_seed(args.sample_seed, 0x4556414C, 1),
        args.top_n_sweep,
        threshold,
    )
    report = {
        "schema_version": "1.0",
        "metadata": {
            "checkpoint": args.checkpoint,
            "test_file": args.test_file,
            "test_ratings": len(test),
            "sample_seed": args.sample_seed,
            "prediction_samples": n_samples,
            "n_sweep": list(args.top_n_sweep),
            "relevance_threshold": threshold,
        },
        "architectures": {config.architecture: block},
    }
    emit_report(report, args.report, args.format)
    print(f"MAE={block['mae']:.4f} MSE={block['mse']:.4f} R2={block['r2']:.4f}")
    print(f"report written to {args.report} ({args.format})")
    return EXIT_OK


def _cmd_predict(args) -> int:
    config, params = load_checkpoint(args.checkpoint)
    mapping = load_json(args.mapping) if args.mapping else None
    users, items = [], []
    with open(args.pairs, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = [p.strip() for p in line.replace("\t", ",").split(",")]
            if len(parts) < 2:
                raise DataError(f"{args.pairs} line {line_no}: expected 'user,item'")
            if mapping is not None:
                try:
                    users.append(int(mapping["users"][parts[0]]))
                    items.append(int(mapping["items"][parts[1]]))
                except KeyError as exc:
                    raise DataError(
                        f"{args.pairs} line {line_no}: id {exc.args[0]!r} not in mapping"
                    ) from None
            else:
                users.append(int(parts[0]))
                items.append(int(parts[1]))
    rng = RngState(derive_seed(args.sample_seed, 0x50524544))
    scores = predict(
        params,
        config,
        np.asarray(users, dtype=np.int64),
        np.asarray(items, dtype=np.int64),
        rng,
        n_samples=args.n_samples,
    )
    lines = "\n".join(f"{s!r}" for s in scores.tolist()) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(lines)
    else:
        sys.stdout.write(lines)
    return EXIT_OK


_COMMANDS = {
    "split": _cmd_split,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "run": _cmd_run,
    "predict": _cmd_predict,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except IndexRangeError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except VarcfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
