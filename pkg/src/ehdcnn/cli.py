"""Command-line front end.

    ehdcnn gen-data --fn sinc --m 1000 --dim 10 --out-dir out
    ehdcnn train --csv housing.csv --target-col price --batch full --curvature 1
    ehdcnn sweep --fn sqrt_ratio --sweep 0,0.25,0.5,1,2,4
    ehdcnn sweep --csv super.csv --ablation
    ehdcnn hyperbolicity --fn cosc --m 200 --dim 5

Every command writes CSV into ``--out-dir``.  Exit status: 0 success, 1 usage
error, 2 data error, 3 numerical divergence.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import data, metrics, train
from .data import DataError, SplitSpec
from .geometry import exp0
from .train import TrainConfig

log = logging.getLogger("ehdcnn")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED = 0, 1, 2, 3
ABLATION_SPANS = (6, 7, 8, 9)
ABLATION_DEPTHS = (3, 4, 5, 6)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _batch(text: str):
    if text.lower() in ("full", "auto"):
        return None if text.lower() == "full" else "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"batch must be a positive integer or 'full', got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("batch must be positive")
    return value


def _float_list(text: str):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_source(p):
    src = p.add_argument_group("data source")
    src.add_argument("--fn", choices=data.SYNTHETIC_FUNCTIONS, help="synthetic target function")
    src.add_argument("--csv", type=Path, help="headed CSV file")
    src.add_argument("--wisdm", type=Path, help="raw WISDM accelerometer file")
    src.add_argument("--target-col", default=None, help="target column name or index (default: last)")
    src.add_argument("--task", choices=("regression", "classification"), default="regression")
    src.add_argument("--m", type=int, default=1000, help="synthetic sample count")
    src.add_argument("--dim", type=int, default=10, help="synthetic input dimension")
    src.add_argument("--noise-var", type=float, default=0.01, help="synthetic noise variance")
    src.add_argument("--train-fraction", type=float, default=0.8)
    src.add_argument("--window", type=int, default=80, help="WISDM window length")
    src.add_argument("--train-users", type=int, default=28, help="WISDM users 1..k train, the rest test")


def _add_training(p):
    t = p.add_argument_group("training")
    t.add_argument("--layers", type=int, default=4)
    t.add_argument("--filter-span", type=int, default=8)
    t.add_argument("--lr", type=float, default=0.01)
    t.add_argument("--weight-decay", type=float, default=0.0005)
    t.add_argument("--batch", type=_batch, default="auto",
                   help=f"minibatch size or 'full' (default {train.SYNTHETIC_BATCH_SIZE} synthetic, 128 otherwise)")
    t.add_argument("--epochs", type=int, default=100)
    t.add_argument("--embed", choices=("exp0", "rescale"), default="exp0")
    t.add_argument("--truncate", choices=("on", "off"), default="on")
    t.add_argument("--momentum", type=float, default=0.0)
    t.add_argument("--workers", type=int, default=1, help="parallel runs in a sweep")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ehdcnn", description="Hyperbolic deep convolutional networks on the Poincaré ball.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    parser.commands = {}

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        parser.commands[name] = p
        p.add_argument("--config", type=Path, help="key=value file; flags given on the command line win")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", type=Path, default=Path("out"))
        return p

    g = command("gen-data", "write a synthetic regression dataset")
    g.add_argument("--fn", choices=data.SYNTHETIC_FUNCTIONS, required=True)
    g.add_argument("--m", type=int, default=1000)
    g.add_argument("--dim", type=int, default=10)
    g.add_argument("--noise-var", type=float, default=0.01)

    t = command("train", "train one model and write its history")
    _add_source(t)
    _add_training(t)
    t.add_argument("--curvature", type=float, default=1.0)

    s = command("sweep", "train one model per curvature")
    _add_source(s)
    _add_training(s)
    s.add_argument("--sweep", type=_float_list, default=list(train.DEFAULT_CURVATURES),
                   help="comma-separated curvatures")
    s.add_argument("--ablation", action="store_true",
                   help="repeat the sweep over filter spans 6-9 and depths 3-6")

    h = command("hyperbolicity", "four-point Gromov delta of a point set")
    _add_source(h)
    h.add_argument("--metric", choices=("euclidean", "poincare"), default="euclidean")
    h.add_argument("--curvature", type=float, default=1.0, help="used by --metric poincare")
    h.add_argument("--max-quadruples", type=int, default=1_000_000)
    return parser


def read_config(path: Path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment.  Keys use flag spelling."""
    out = {}
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    values = read_config(args.config)
    sub = parser.commands[args.command]
    known = {a.dest: a for a in sub._actions}
    for key, value in values.items():
        if key not in known or key in ("config", "help"):
            raise UsageError(f"{args.config}: unknown key {key!r} for {args.command}")
        if known[key].nargs == 0:  # on/off switches such as ablation
            if value.lower() not in ("true", "false", "on", "off", "1", "0", "yes", "no"):
                raise UsageError(f"{args.config}: {key} expects a boolean, got {value!r}")
            values[key] = value.lower() in ("true", "on", "1", "yes")
    # string defaults go through each flag's type conversion, so re-parsing applies them
    sub.set_defaults(**values)
    return parser.parse_args(argv)


# -- data resolution -------------------------------------------------------------

def _target_column(text):
    if text is None:
        return -1
    try:
        return int(text)
    except ValueError:
        return text


def load_task(args):
    """``(train, test)`` from the source flags; CSV and WISDM data are standardised."""
    sources = [s for s in ("fn", "csv", "wisdm") if getattr(args, s, None) is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one of --fn, --csv, --wisdm")
    if args.fn:
        tr, te = data.synthetic_task(args.fn, args.m, args.dim, args.noise_var, args.seed, args.train_fraction)
        return tr, te
    if args.csv:
        ds = data.load_csv(args.csv, _target_column(args.target_col), task=args.task)
        spec = SplitSpec(args.train_fraction, args.seed, stratify=args.task == "classification")
        tr, te = data.split(ds, spec)
        return data.standardize(tr, te)
    ds = data.window_har(data.read_wisdm(args.wisdm), args.window)
    tr, te = data.split_by_group(ds, range(1, args.train_users + 1))
    return data.standardize(tr, te)


def make_config(args, train_ds, curvature: float) -> TrainConfig:
    batch = args.batch
    if batch == "auto":
        batch = train.SYNTHETIC_BATCH_SIZE if args.fn else 128
    return TrainConfig(
        curvature=curvature, layers=args.layers, filter_span=args.filter_span, lr=args.lr,
        weight_decay=args.weight_decay, batch_size=batch, epochs=args.epochs, seed=args.seed,
        truncate=args.truncate == "on", task=train_ds.task, n_classes=train_ds.n_classes,
        momentum=args.momentum, embed=args.embed,
    )


def _check_shape(cfg: TrainConfig, n: int):
    if cfg.filter_span < 2:
        raise UsageError(f"--filter-span must be at least 2, got {cfg.filter_span}")
    if cfg.filter_span > n:
        raise UsageError(f"--filter-span {cfg.filter_span} exceeds the input dimension {n} (need s <= n)")


def _tag(c: float) -> str:
    return f"{c:g}".replace(".", "p")


# -- commands --------------------------------------------------------------------

def cmd_gen_data(args) -> int:
    ds = data.gen_synthetic(args.fn, args.m, args.dim, args.noise_var, args.seed)
    path = args.out_dir / f"{args.fn}_m{args.m}_d{args.dim}_s{args.seed}.csv"
    try:
        data.save_csv(ds, path)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from None
    print(f"wrote {path}: {ds.m} rows x {ds.n + 1} columns")
    return EXIT_OK


def cmd_train(args) -> int:
    tr, te = load_task(args)
    cfg = make_config(args, tr, args.curvature)
    _check_shape(cfg, tr.n)
    hist = train.fit(cfg, tr, te)
    path = train.write_history_csv(hist, args.out_dir / f"history_c{_tag(cfg.curvature)}.csv")
    if hist.diverged:
        log.error("%s", hist.message)
        print(f"wrote {path} ({len(hist.records)} epochs before divergence)")
        return EXIT_DIVERGED
    name = "accuracy" if cfg.task == "classification" else "rmse"
    print(f"wrote {path}")
    print(f"final test {name} at c={cfg.curvature:g}: {hist.final_metric:.6f}")
    return EXIT_OK


def _run_sweep(args, tr, te, out_dir: Path, base: TrainConfig):
    hists = train.curvature_sweep(base, args.sweep, tr, te, workers=args.workers)
    for h in hists:
        if h.records:
            train.write_history_csv(h, out_dir / f"history_c{_tag(h.curvature)}.csv")
    train.write_sweep_csv(hists, out_dir / "sweep.csv")
    return hists


def _summary(hists) -> str:
    lines = [f"{'curvature':>10}  {'final':>10}  status"]
    for h in hists:
        status = h.message if h.diverged else "ok"
        lines.append(f"{h.curvature:>10g}  {h.final_metric:>10.6f}  {status}")
    return "\n".join(lines)


def cmd_sweep(args) -> int:
    if not args.sweep:
        raise UsageError("--sweep needs at least one curvature")
    tr, te = load_task(args)
    base = make_config(args, tr, args.sweep[0])
    failed = False
    if args.ablation:
        for s in ABLATION_SPANS:
            for depth in ABLATION_DEPTHS:
                cfg = replace(base, filter_span=s, layers=depth)
                _check_shape(cfg, tr.n)
                hists = _run_sweep(args, tr, te, args.out_dir / f"ablation_s{s}_L{depth}", cfg)
                print(f"s={s} L={depth}\n{_summary(hists)}\n")
                failed = failed or any(h.diverged for h in hists)
    else:
        _check_shape(base, tr.n)
        hists = _run_sweep(args, tr, te, args.out_dir, base)
        print(_summary(hists))
        failed = any(h.diverged for h in hists)
    print(f"outputs in {args.out_dir}")
    return EXIT_DIVERGED if failed else EXIT_OK


def graph_points(ds) -> np.ndarray:
    """Rows ``(x, y)``: each sample together with its target."""
    return np.column_stack([ds.features, ds.targets])


def cmd_hyperbolicity(args) -> int:
    sources = [s for s in ("fn", "csv", "wisdm") if getattr(args, s, None) is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one of --fn, --csv, --wisdm")
    if args.fn:
        ds = data.gen_synthetic(args.fn, args.m, args.dim, 0.0, args.seed)
    elif args.csv:
        ds = data.load_csv(args.csv, _target_column(args.target_col), task=args.task)
    else:
        ds = data.window_har(data.read_wisdm(args.wisdm), args.window)
    if ds.m < 4:
        raise DataError(f"need at least 4 points, got {ds.m}")
    pts = graph_points(ds)
    if args.metric == "poincare":
        pts = exp0(pts, args.curvature)
    est = metrics.gromov_delta(pts, args.metric, args.curvature, args.max_quadruples, args.seed)
    path = args.out_dir / "hyperbolicity.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["delta", "quadruples_evaluated", "exhaustive"])
        w.writerow([repr(est.delta), est.quadruples_evaluated, est.exhaustive])
    print(f"delta={est.delta:.7f} quadruples={est.quadruples_evaluated} exhaustive={est.exhaustive}")
    return EXIT_OK


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "hyperbolicity": cmd_hyperbolicity,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ehdcnn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"ehdcnn: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"ehdcnn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
