"""Command-line entry points.

Exit codes: 0 success, 1 usage error, 2 data error (missing files/columns,
unparseable input), 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .chem.errors import SmilesError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fragnet",
                description="Hierarchical graph-attention property prediction "
                            "with substructure-level explanations")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    t = sub.add_parser("train", help="train a model from a CSV")
    t.add_argument("--data", required=True)
    t.add_argument("--config", help="JSON training config")
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--smiles-col", default="smiles")
    t.add_argument("--target-cols", nargs="+", required=True)
    t.add_argument("--task", choices=["regression", "binary_multitask"],
                   default="regression")
    t.add_argument("--metrics-csv", help="write per-epoch history here")

    e = sub.add_parser("evaluate", help="evaluate a checkpoint on a CSV")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--smiles-col", default="smiles")
    e.add_argument("--target-cols", nargs="+", required=True)

    pr = sub.add_parser("predict", help="predict one SMILES")
    pr.add_argument("--checkpoint", required=True)
    pr.add_argument("--smiles", required=True)

    ex = sub.add_parser("explain", help="explanation JSON for one SMILES")
    ex.add_argument("--checkpoint", required=True)
    ex.add_argument("--smiles", required=True)
    ex.add_argument("--out", help="write JSON here (default stdout)")

    ag = sub.add_parser("aggregate",
                        help="fragment statistics over low/high-error predictions")
    ag.add_argument("--checkpoint", required=True)
    ag.add_argument("--data", required=True)
    ag.add_argument("--smiles-col", default="smiles")
    ag.add_argument("--target-cols", nargs="+", required=True)
    ag.add_argument("--low-error", type=float, default=0.1)
    ag.add_argument("--top-fraction", type=float, default=0.2)
    ag.add_argument("--out", required=True, help="CSV output path")

    em = sub.add_parser("embed", help="export penultimate embeddings to CSV")
    em.add_argument("--checkpoint", required=True)
    em.add_argument("--data", required=True)
    em.add_argument("--smiles-col", default="smiles")
    em.add_argument("--target-cols", nargs="+", required=True)
    em.add_argument("--out", required=True)

    sv = sub.add_parser("serve", help="HTTP explanation service")
    sv.add_argument("--models-dir", default=None,
                    help="directory of checkpoint JSON files "
                         "(FRAGNET_MODELS_DIR overrides)")
    sv.add_argument("--port", type=int, default=8460)
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--cors-origin", default="*")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s")
    try:
        return _dispatch(args)
    except SystemExit:
        raise
    except (FileNotFoundError, SmilesError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except Exception as err:  # noqa: BLE001
        from .training import (EmptyDataset, MissingColumn, TaskMismatch)
        from .interpret import EmptySelection
        from .fragments import DatasetTooSmall
        if isinstance(err, (EmptyDataset, MissingColumn, TaskMismatch,
                            EmptySelection, DatasetTooSmall)):
            print(f"data error: {err}", file=sys.stderr)
            return EXIT_DATA
        logging.exception("internal error")
        return EXIT_INTERNAL


def _dispatch(args) -> int:
    from .training import (TaskKind, TrainConfig, evaluate, load_checkpoint,
                           load_csv, make_split, save_checkpoint, train_model,
                           write_history_csv)

    if args.verb == "train":
        cfg = (TrainConfig.from_json_file(args.config) if args.config
               else TrainConfig())
        ds = load_csv(args.data, args.smiles_col, args.target_cols,
                      task=TaskKind(args.task))
        split = make_split(ds, cfg)
        ckpt, history = train_model(ds, split, cfg)
        save_checkpoint(ckpt, args.out)
        if args.metrics_csv:
            write_history_csv(history, args.metrics_csv)
        test_metrics = evaluate(ckpt, ds, split[2])
        print(json.dumps({"checkpoint": args.out,
                          "split_sizes": [len(s) for s in split],
                          "test_metrics": test_metrics}))
        return EXIT_OK

    if args.verb == "evaluate":
        ckpt = load_checkpoint(args.checkpoint)
        ds = load_csv(args.data, args.smiles_col, args.target_cols,
                      task=ckpt.task)
        print(json.dumps(evaluate(ckpt, ds)))
        return EXIT_OK

    if args.verb == "predict":
        ckpt = load_checkpoint(args.checkpoint)
        values = ckpt.predict_smiles(args.smiles)
        print(" ".join(f"{v:.6g}" for v in values))
        return EXIT_OK

    if args.verb == "explain":
        from .interpret import explain
        ckpt = load_checkpoint(args.checkpoint)
        exp = explain(args.smiles, ckpt)
        text = exp.to_json()
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        return EXIT_OK

    if args.verb == "aggregate":
        from .interpret import aggregate_substructures, write_fragment_stats_csv
        ckpt = load_checkpoint(args.checkpoint)
        ds = load_csv(args.data, args.smiles_col, args.target_cols,
                      task=ckpt.task)
        stats = aggregate_substructures(
            ckpt, ds, error_threshold_low=args.low_error,
            top_error_fraction=args.top_fraction)
        write_fragment_stats_csv(stats, args.out)
        flagged = [s.frag_smiles for s in stats if s.exclusively_high_error]
        print(json.dumps({"fragments": len(stats),
                          "exclusively_high_error": flagged}))
        return EXIT_OK

    if args.verb == "embed":
        from .interpret import export_embeddings
        ckpt = load_checkpoint(args.checkpoint)
        ds = load_csv(args.data, args.smiles_col, args.target_cols,
                      task=ckpt.task)
        n = export_embeddings(ckpt, ds, args.out)
        print(json.dumps({"rows": n, "out": args.out}))
        return EXIT_OK

    if args.verb == "serve":
        import os
        import uvicorn
        from .server import create_app_from_dir
        models_dir = os.environ.get("FRAGNET_MODELS_DIR", args.models_dir)
        if not models_dir:
            print("error: --models-dir or FRAGNET_MODELS_DIR required",
                  file=sys.stderr)
            return EXIT_USAGE
        app = create_app_from_dir(models_dir, cors_origin=args.cors_origin)
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
        return EXIT_OK

    raise AssertionError(f"unhandled verb {args.verb}")


if __name__ == "__main__":
    sys.exit(main())
