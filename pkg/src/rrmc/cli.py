"""Command line entry point: ``rrmc {simulate,train,bound,run,table,cost}``.

Exit status is 0 on success, 2 for configuration errors and 3 for numerical
failures.
"""
import argparse
import json
import logging
import sys
import warnings

from . import bounds, costmodel, experiment
from .backward import ContinuationModel
from .errors import CapacityError, ConfigError, NumericalError, RRMCError
from .market_models import PathSet

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class JsonFormatter(logging.Formatter):
    def format(self, record):
        doc = {"level": record.levelname, "logger": record.name, "message": record.getMessage()}
        extra = getattr(record, "rrmc", None)
        if extra is not None:
            doc.update(extra)
        return json.dumps(doc)


def _setup_logging(as_json, verbose):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonFormatter() if as_json else
                         logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("rrmc")
    root.handlers[:] = [handler]
    root.setLevel(logging.INFO if verbose or as_json else logging.WARNING)
    root.propagate = False


def _load_config(args):
    cfg = experiment.load_json(args.config) if args.config else {}
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    if args.paper_scale:
        cfg["N"] = cfg["N_test"] = experiment.PAPER_SCALE
    for flag, key in (("seed", "seed"), ("paths", "N"), ("test_paths", "N_test"),
                      ("inner", "inner"), ("outer", "outer")):
        value = getattr(args, flag, None)
        if value is not None:
            cfg[key] = value
    if "product" not in cfg:
        raise ConfigError("config needs a product section, e.g. {\"product\": {\"max_call\": {}}}")
    return experiment.normalize_config(cfg)


def _emit(doc, out):
    text = json.dumps(doc, indent=1, default=str)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_simulate(args):
    cfg = _load_config(args)
    params, product, _, _ = experiment.build_problem(cfg)
    if args.which == "train":
        paths = experiment.training_paths(cfg, params, product.grid)
    else:
        paths = experiment.holdout_paths(cfg, params, product.grid)
    if not args.out:
        raise ConfigError("simulate needs --out for the binary path file")
    paths.dump(args.out)
    print(json.dumps({"paths": args.out, "shape": list(paths.states.shape), "seed": paths.seed}))


def cmd_train(args):
    cfg = _load_config(args)
    params, product, basis, method = experiment.build_problem(cfg)
    paths = experiment.training_paths(cfg, params, product.grid)
    model = experiment.train(paths, product, basis, method, strict=cfg["strict"],
                             memory_cap=cfg["memory_cap_gib"] * 2**30)
    out = args.out or cfg["outputs"]["model"]
    if not out:
        raise ConfigError("train needs --out (or outputs.model) for the model JSON")
    model.save(out)
    print(json.dumps({"model": out, "dates": model.num_dates, "width": basis.width}))


def cmd_bound(args):
    cfg = _load_config(args)
    params, product, _, _ = experiment.build_problem(cfg)
    model = ContinuationModel.load(args.model)
    if model.product != product:
        raise ConfigError("model was trained on a different product than the config describes")
    tests = experiment.holdout_paths(cfg, params, product.grid)
    results = {}
    timings = {}
    if args.kind in ("lower", "both"):
        results["lower"] = bounds.lower_bound(model, tests)
    if args.kind in ("upper", "both"):
        if not cfg["outer"]:
            raise ConfigError("upper bound needs outer > 0 (set --outer)")
        outer = PathSet(tests.states[:cfg["outer"]], tests.grid, tests.seed, params)
        results["upper"] = bounds.dual_upper_bound(model, outer, cfg["inner"], tests.seed)
    if cfg["outputs"]["csv"]:
        for est in results.values():
            bounds.append_csv(cfg["outputs"]["csv"], experiment.result_row(cfg, est, timings))
    _emit({k: v.to_dict() for k, v in results.items()}, args.out)


def cmd_run(args):
    cfg = _load_config(args)
    if args.out:
        cfg["outputs"]["report"] = args.out
    report = experiment.run_experiment(cfg)
    if not args.out:
        _emit(report, None)


def cmd_table(args):
    if args.layout:
        sweep = experiment.table_sweeps()[args.layout]
    elif args.sweep:
        sweep = experiment.expand_sweep(experiment.load_json(args.sweep))
    else:
        raise ConfigError("table needs --sweep FILE or --layout {max_call,swap}")
    template = experiment.load_json(args.config) if args.config else {}
    if args.layout and "product" not in template:
        template["product"] = {args.layout: {}}
    if args.paper_scale:
        template["N"] = template["N_test"] = experiment.PAPER_SCALE
    for flag, key in (("seed", "seed"), ("paths", "N"), ("test_paths", "N_test"),
                      ("inner", "inner"), ("outer", "outer")):
        if getattr(args, flag) is not None:
            template[key] = getattr(args, flag)
    out = args.out or "results.csv"
    rows = experiment.run_table(template, sweep, out)
    failed = sum(1 for r in rows if r.get("error"))
    print(json.dumps({"csv": out, "rows": len(rows), "failed": failed}))


def cmd_cost(args):
    p = costmodel.CostParams(args.c_f, args.c_star, args.N, args.N_test, args.J, args.K,
                             args.K_r, 1)
    doc = {"reinforced_training": costmodel.reinforced_training_cost(p),
           "standard_training": costmodel.standard_training_cost(p),
           "evaluation": costmodel.evaluation_cost(p)}
    if p.c_f:
        doc["training_ratio"], doc["evaluation_ratio"] = costmodel.cost_ratios(p)
    if args.max_call_d:
        doc["max_call_ratio"] = costmodel.max_call_ratio(args.max_call_d, args.J)
    _emit({k: float(v) for k, v in doc.items()}, args.out)


def build_parser():
    parser = argparse.ArgumentParser(prog="rrmc", description=__doc__.splitlines()[0])
    parser.add_argument("--log-json", action="store_true", help="machine-readable log lines")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-date diagnostics")
    parser.add_argument("--threads", type=int, help="cap compiled-kernel worker threads")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help="output file"):
        p.add_argument("config", nargs="?", help="experiment config JSON")
        p.add_argument("--seed", type=int)
        p.add_argument("--paths", type=int, help="training paths N")
        p.add_argument("--test-paths", type=int, help="test paths N_test")
        p.add_argument("--inner", type=int, help="inner paths per outer state for the dual")
        p.add_argument("--outer", type=int, help="outer paths for the dual (0 skips it)")
        p.add_argument("--paper-scale", action="store_true", help="N = N_test = 10^6")
        p.add_argument("--out", help=out_help)
        return p

    p = common(sub.add_parser("simulate", help="simulate paths to a binary file"))
    p.add_argument("--which", choices=("train", "test"), default="train")
    p.set_defaults(func=cmd_simulate)
    common(sub.add_parser("train", help="fit a continuation model"),
           "model JSON").set_defaults(func=cmd_train)
    p = common(sub.add_parser("bound", help="lower/upper bounds for a saved model"))
    p.add_argument("--model", required=True)
    p.add_argument("--kind", choices=("lower", "upper", "both"), default="lower")
    p.set_defaults(func=cmd_bound)
    common(sub.add_parser("run", help="simulate, train and bound end to end"),
           "report JSON").set_defaults(func=cmd_run)
    p = common(sub.add_parser("table", help="run a sweep into one CSV"), "results CSV")
    p.add_argument("--sweep", help="JSON list of overrides or {\"grid\": {...}}")
    p.add_argument("--layout", choices=("max_call", "swap"), help="built-in table sweep")
    p.set_defaults(func=cmd_table)
    p = sub.add_parser("cost", help="cost-model predictions")
    for name, kind, default in (("--c-f", float, 1.0), ("--c-star", float, 1.0),
                                ("--N", int, 1), ("--N-test", int, 1), ("--J", int, 1),
                                ("--K", int, 1), ("--K-r", int, 1)):
        p.add_argument(name, type=kind, default=default)
    p.add_argument("--max-call-d", type=int, help="also print (2d+J)/(d(d+1))")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cost)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.log_json, args.verbose)
    # an old system TBB is detected and skipped; the workqueue layer is used
    warnings.filterwarnings("ignore", message=".*TBB threading layer.*")
    if args.threads:
        import numba
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        args.func(args)
    except (ConfigError, CapacityError, OSError, json.JSONDecodeError) as exc:
        print(f"config error{_stage(exc)}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure{_stage(exc)}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RRMCError as exc:
        print(f"error{_stage(exc)}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def _stage(exc):
    stage = getattr(exc, "stage", None)
    return f" in {stage}" if stage else ""


if __name__ == "__main__":
    sys.exit(main())
