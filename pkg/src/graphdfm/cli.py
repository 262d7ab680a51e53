"""Command-line entry points: gen-data, train, sample, eval, verify.

Options may come from a flat ``key = value`` file passed with ``--config``;
flags given on the command line take precedence over file values.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import distortion, metrics, verify
from .config import ConfigError, load_config, merge
from .ctmc import DB_DESIGNS, RateConfig
from .datasets import FAMILIES, SynthSpec, generate
from .denoiser import DenoiserParams, FeaturizedDenoiser, OracleDenoiser
from .graph import GraphDataset
from .initial import KINDS, build_initial, initial_from_json, initial_to_json
from .sampling import GuidedDenoiser, SampleConfig, sample
from .training import TrainConfig, train

log = logging.getLogger("graphdfm")

ORACLE_FORMAT = "graphdfm-oracle"


class CliError(RuntimeError):
    pass


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _load_dataset(path) -> GraphDataset:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"dataset not found: {path}")
    return GraphDataset.load(p)


# ---------------------------------------------------------------------------
# gen-data


def cmd_gen_data(args) -> int:
    spec = SynthSpec(args.family, args.n, args.n_min, args.n_max, args.seed, args.labels)
    ds = generate(spec)
    ds.save(args.out)
    log.info("wrote %d %s graphs to %s", len(ds), args.family, args.out)
    return 0


# ---------------------------------------------------------------------------
# train


_TRAIN_FLAGS = ("lam", "train_distortion", "initial_distribution", "epochs", "batch_size", "noise_draws",
                "learning_rate", "momentum", "seed", "conditional", "label_drop", "hidden", "rrwp_depth",
                "grad_clip")


def cmd_train(args) -> int:
    values = merge(load_config(args.config), {k: getattr(args, k) for k in _TRAIN_FLAGS})
    data_path = values.pop("data", None) if args.data is None else args.data
    out = args.out or values.pop("out", None)
    if data_path is None or out is None:
        raise CliError("train needs --data and --out (flag or config key)")
    cfg = TrainConfig.from_mapping(values)
    ds = _load_dataset(data_path)
    init = build_initial(cfg.initial_distribution, ds)
    echo = {"config": asdict(cfg), "data": str(Path(data_path).resolve()),
            "initial": initial_to_json(init), "node_counts": ds.node_counts().tolist()}
    if args.oracle:
        _write_json(out, {"format": ORACLE_FORMAT, "closure": args.closure, **echo})
        log.info("oracle manifest written to %s", out)
        return 0
    result = train(ds, cfg, init=init)
    result.params.save(out, extra=echo)
    loss_csv = args.loss_csv or f"{out}.loss.csv"
    with open(loss_csv, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "loss"])
        for e, v in enumerate(result.epoch_loss, 1):
            w.writerow([e, repr(v)])
    log.info("checkpoint %s, loss curve %s", out, loss_csv)
    return 0


def load_denoiser(path):
    """Return ``(denoiser, init, node_counts)`` from a checkpoint or oracle manifest."""
    p = Path(path)
    if not p.is_file():
        raise CliError(f"checkpoint not found: {path}")
    doc = json.loads(p.read_text())
    if doc.get("format") == ORACLE_FORMAT:
        init = initial_from_json(doc["initial"])
        return OracleDenoiser(_load_dataset(doc["data"]), init, closure=doc.get("closure", False)), init, \
            doc["node_counts"]
    params = DenoiserParams.load(p)
    extra = doc.get("extra", {})
    if "initial" not in extra:
        raise CliError(f"{path} carries no initial distribution")
    return FeaturizedDenoiser(params), initial_from_json(extra["initial"]), extra["node_counts"]


# ---------------------------------------------------------------------------
# sample


def cmd_sample(args) -> int:
    denoiser, init, counts = load_denoiser(args.checkpoint)
    rate = RateConfig(omega=args.omega, eta=args.eta, db_design=args.db_design,
                      exact_expectation=args.exact_expectation)
    cfg = SampleConfig(n_steps=args.steps, sample_distortion=args.sample_distortion, rate=rate,
                       gamma=args.gamma, label=args.label, seed=args.seed)
    if args.label is not None:
        denoiser = GuidedDenoiser(denoiser, args.label, args.gamma)
    if args.n_nodes is not None:
        counts = [args.n_nodes]
    graphs = sample(denoiser, init, cfg, args.n, counts)
    GraphDataset(graphs, init.x_card, init.e_card).save(args.out)
    manifest = {"checkpoint": str(Path(args.checkpoint).resolve()), "n_graphs": args.n,
                "samples": str(Path(args.out).resolve()), "config": asdict(cfg)}
    _write_json(args.manifest or f"{args.out}.manifest.json", manifest)
    return 0


# ---------------------------------------------------------------------------
# eval


def cmd_eval(args) -> int:
    generated = _load_dataset(args.samples)
    report = metrics.evaluate(generated.graphs, _load_dataset(args.train), _load_dataset(args.test), args.validity)
    text = metrics.report_json(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.csv:
        Path(args.csv).write_text(metrics.report_csv(report))
    return 0


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    sweep = verify.tv_sweep(kind=args.tv_kind)
    checks = verify.run_all(n=args.tuples, seed=args.seed, omega=args.omega, sweep=sweep)
    for c in checks:
        print(c.line())
    if args.tv_sweep:
        with open(args.tv_sweep, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["steps", "tv"])
            for n, tv in sweep:
                w.writerow([n, repr(tv)])
    return 0 if all(c.passed for c in checks) else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphdfm", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write a synthetic dataset")
    p.add_argument("--family", choices=FAMILIES, default="tree")
    p.add_argument("--n", type=int, default=64, help="number of graphs")
    p.add_argument("--n-min", type=int, default=6)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labels", action="store_true", help="attach density-above-median labels")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="fit the denoiser (or record an oracle manifest)")
    p.add_argument("--config", help="flat key = value file; flags override its keys")
    p.add_argument("--data")
    p.add_argument("--out", help="checkpoint path")
    p.add_argument("--loss-csv", help="per-epoch loss curve (default: <out>.loss.csv)")
    p.add_argument("--oracle", action="store_true", help="skip training; use the exact posterior")
    p.add_argument("--closure", action="store_true", help="oracle over all node relabelings of the data")
    p.add_argument("--lam", type=float)
    p.add_argument("--train-distortion", choices=distortion.KINDS)
    p.add_argument("--initial-distribution", choices=KINDS)
    for name, typ in (("epochs", int), ("batch-size", int), ("noise-draws", int), ("learning-rate", float),
                      ("momentum", float), ("seed", int), ("label-drop", float), ("hidden", int),
                      ("rrwp-depth", int), ("grad-clip", float)):
        p.add_argument(f"--{name}", type=typ)
    p.add_argument("--conditional", action="store_const", const="true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample", help="generate graphs from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", help="default: <out>.manifest.json")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--n-nodes", type=int, help="fixed size instead of the training size histogram")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--sample-distortion", choices=distortion.KINDS, default="identity")
    p.add_argument("--omega", type=float, default=0.0, help="target guidance")
    p.add_argument("--eta", type=float, default=0.0, help="stochasticity")
    p.add_argument("--db-design", choices=DB_DESIGNS, default="general")
    p.add_argument("--exact-expectation", action="store_true")
    p.add_argument("--gamma", type=float, default=1.0, help="guidance weight (with --label)")
    p.add_argument("--label", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="V.U.N., MMD and ratio of a sample file")
    p.add_argument("--samples", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--validity", choices=sorted(metrics.VALIDITY), default="tree")
    p.add_argument("--out", help="JSON report (default: stdout)")
    p.add_argument("--csv", help="flat metric,value rows")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="run the rate-matrix and TV-scaling checks")
    p.add_argument("--omega", type=float, default=0.1)
    p.add_argument("--tuples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tv-kind", choices=KINDS, default="masking")
    p.add_argument("--tv-sweep", help="write the TV-vs-steps CSV here")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CliError, ConfigError, ValueError, OSError) as exc:
        print(f"graphdfm {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
