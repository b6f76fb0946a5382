"""Command line entry point ``np2l``."""
import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from np2l import datasets
from np2l.encoders import EmbeddingConfig
from np2l.experiments import ExperimentConfig, run_experiment, run_grid, save_results
from np2l.np2e import run_np2e

DATA_ENV = "NP2L_DATA_DIR"


def _data_dir(args):
    return args.data_dir or os.environ.get(DATA_ENV, "data")


def _add_data_args(p):
    p.add_argument("--data-dir", default=None, help=f"dataset root (default ${DATA_ENV} or ./data)")
    p.add_argument("--dataset", required=True)


def cmd_run(args):
    cfg = ExperimentConfig(
        dataset=args.dataset, task=args.task, model=args.model, head=args.head, o=args.o, k=args.k,
        lr=args.lr, weight_decay=args.wd, hidden=args.hidden, out_dim=args.hidden, epochs=args.epochs,
        seed=args.seed, num_seeds=args.seeds, split=args.split, alpha=args.alpha, sgcn_plus=args.sgcn_plus,
        dense_loss=args.dense_loss, loss=args.loss, scale=args.scale, gate=args.gate, shared=not args.unshared,
        embed_model=args.embed_model, embed_epochs=args.embed_epochs, data_dir=_data_dir(args),
    )
    data = datasets.load_dataset(cfg.data_dir, cfg.dataset)
    if args.grid:
        res = run_grid(cfg, data, workers=args.workers, out_dir=args.out)
        best_cfg = res.best_config.resolved(data.num_classes)
        print(f"best cell: lr={best_cfg.lr} wd={best_cfg.weight_decay} ({len(res.cells)} cells)")
        _report(best_cfg, res.best)
        return 0
    rec = run_experiment(cfg, data)
    resolved = cfg.resolved(data.num_classes)
    path = save_results(args.out, resolved, rec)
    _report(resolved, rec)
    print(f"wrote {path}")
    return 0


def _report(cfg, rec):
    if rec.task == "link":
        print(f"{cfg.dataset} {cfg.head}-{cfg.model}: AUC {100 * rec.auc:.2f} ± {100 * rec.auc_std:.2f}  "
              f"AP {100 * rec.ap:.2f} ± {100 * rec.ap_std:.2f}  ({len(rec.seeds)} seeds, {rec.wall_time:.1f}s)")
    else:
        print(f"{cfg.dataset} {cfg.model} split {cfg.split}: accuracy {100 * rec.accuracy:.2f} ± "
              f"{100 * rec.accuracy_std:.2f}  ({len(rec.seeds)} seeds, {rec.wall_time:.1f}s)")
    if rec.recall is not None:
        print(f"  partial-label recall {rec.recall:.4f}, negative edges {rec.num_negative_edges:.0f}")


def cmd_build_signed(args):
    data = datasets.load_dataset(_data_dir(args), args.dataset)
    head, _, model = args.encoder.partition("-")
    if head not in ("gae", "vgae") or model not in ("gcn", "gncn"):
        raise SystemExit(f"--encoder must look like gae-gcn / vgae-gncn, got {args.encoder!r}")
    k = args.k or data.num_classes
    cfg = EmbeddingConfig(model=model, head=head, epochs=args.epochs, lr=args.lr, weight_decay=args.wd)
    res = run_np2e(data.graph, data.features, k, args.o, cfg, labels=data.labels, seed=args.seed)
    out = {
        "n": data.graph.n,
        "o": args.o,
        "k": k,
        "pos_edges": res.signed.pos_edges.tolist(),
        "dropped_edges": res.signed.dropped.tolist(),
        "num_negative_edges": res.signed.num_neg_edges,
        "relation": res.relation.to_json(),
        "recall": {
            "mode": res.recall.mode.value,
            "value": res.recall.recall,
            "curve": [{"o": r.o, "recall": r.recall} for r in res.curve],
        },
    }
    Path(args.out).write_text(json.dumps(out) + "\n")
    print(f"{args.dataset}: {len(out['pos_edges'])} positive, {out['num_negative_edges']} negative edges, "
          f"recall {res.recall.recall:.4f} -> {args.out}")
    if args.embeddings:
        np.savetxt(args.embeddings, res.embedding, delimiter=",", fmt="%.17g")
    return 0


def cmd_convert(args):
    fn = datasets.convert_planetoid if args.format == "planetoid" else datasets.convert_geom_gcn
    root = fn(args.raw, args.name, Path(args.out) / args.name.lower())
    ds = datasets.load_dataset(root)
    print(f"{ds.name}: n={ds.graph.n} edges={ds.graph.num_edges} m={ds.features.shape[1]} "
          f"classes={ds.num_classes} -> {root}")
    return 0


def cmd_make_synthetic(args):
    ds = datasets.make_csbm(n=args.n, num_classes=args.classes, avg_degree=args.degree,
                            homophily=args.homophily, num_features=args.features, seed=args.seed,
                            name=args.name)
    root = datasets.save_dataset(Path(args.out) / args.name, args.name, ds.graph, ds.features, ds.labels,
                                 ds.num_classes)
    print(f"{args.name}: n={ds.graph.n} edges={ds.graph.num_edges} -> {root}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="np2l", description="negative pseudo partial labels for GNNs")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="link prediction or node classification")
    _add_data_args(p)
    p.add_argument("--task", choices=("link", "node"), default="link")
    p.add_argument("--model", choices=("gcn", "sgcn", "gncn", "sgncn"), default="gcn")
    p.add_argument("--head", choices=("gae", "vgae"), default="gae")
    p.add_argument("--o", type=int, default=None, help="partial labels per node (default: published value)")
    p.add_argument("--k", type=int, default=None, help="clusters (default: number of classes)")
    p.add_argument("--split", type=int, choices=(1, 2, 3), default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=None, help="number of seeds (default 1 link, 10 node)")
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--wd", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--scale", type=float, default=1.8, help="GNCN row norm")
    p.add_argument("--gate", choices=("learned", "closed", "open"), default="learned")
    p.add_argument("--unshared", action="store_true", help="separate weights for the negative stream")
    p.add_argument("--loss", choices=("bce", "mse"), default="bce")
    p.add_argument("--dense-loss", action="store_true", help="exact loss over all node pairs")
    p.add_argument("--embed-model", choices=("gcn", "gncn"), default="gcn")
    p.add_argument("--embed-epochs", type=int, default=200)
    p.add_argument("--sgcn-plus", action="store_true")
    p.add_argument("--grid", action="store_true", help="sweep the lr x weight-decay grid")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="results")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("build-signed", help="run the partial-label pipeline and write the signed graph")
    _add_data_args(p)
    p.add_argument("--o", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--encoder", default="gae-gcn")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--wd", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="signed.json")
    p.add_argument("--embeddings", default=None, help="also write the embedding matrix as CSV")
    p.set_defaults(func=cmd_build_signed)

    p = sub.add_parser("convert", help="convert a raw public release to the on-disk format")
    p.add_argument("--format", choices=("planetoid", "geom-gcn"), required=True)
    p.add_argument("--raw", required=True)
    p.add_argument("--name", required=True)
    p.add_argument("--out", default="data")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("make-synthetic", help="write a contextual SBM dataset")
    p.add_argument("--name", default="csbm")
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--degree", type=float, default=4.0)
    p.add_argument("--homophily", type=float, default=0.8)
    p.add_argument("--features", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="data")
    p.set_defaults(func=cmd_make_synthetic)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "command", None) == "run" and args.seeds is None:
        args.seeds = 1 if args.task == "link" else 10
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError) as err:
        print(f"np2l: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
