"""Config-driven train/bound/report pipelines and table sweeps.

A config is one JSON object.  Exactly one product section is given; all
other keys have defaults (see :data:`DEFAULTS`) and unknown keys are
rejected so typos fail loudly.  Example::

    {"product": {"max_call": {"d": 2}},
     "method": "reinforced-tvr", "basis": "1, X_i",
     "N": 100000, "N_test": 100000, "outer": 1000, "inner": 500, "seed": 7}
"""
import copy
import csv
import hashlib
import json
import logging
import time

import numpy as np

from . import __version__, bounds, costmodel, rng
from .backward import DEFAULT_MEMORY_CAP, train
from .basis import PAYOFF, QUADRATIC, BasisSpec, FixedBasisFamily, ReinforcementSpec
from .errors import ConfigError, RRMCError
from .market_models import GBMParams, PathSet, TimeGrid, simulate
from .products import MaxCallSpec, PutSpec, SwapSpec

log = logging.getLogger(__name__)

DESK_SCALE = 100_000
PAPER_SCALE = 1_000_000

PRODUCT_DEFAULTS = {
    "max_call": {"d": 2, "K": 100.0, "r": 0.05, "delta": 0.1, "sigma": 0.2, "x0": 100.0,
                 "rho": 0.0, "T": 3.0, "J": 9},
    "swap": {"d": 20, "r": 0.05, "delta": 0.0, "sigma": 0.2, "x0": 100.0, "rho": 0.0,
             "alpha": 0.05, "n1": 5, "n2": 10, "s1": 0.09, "s2": 0.03, "s3": 0.0,
             "T": 5.0, "J": 10, "notional": 1e4},
    "put": {"K": 100.0, "r": 0.05, "delta": 0.0, "sigma": 0.2, "x0": 100.0, "T": 1.0, "J": 4},
}

DEFAULT_BASIS = {"max_call": "constant-linear", "swap": "swap-order-stats",
                 "put": "constant-linear"}

METHODS = {"standard-tvr": ("tvr", 0), "reinforced-tvr": ("tvr", 1),
           "standard-ls": ("ls", 0), "reinforced-ls": ("ls", 1)}

DEFAULTS = {
    "product": None,
    "method": "reinforced-tvr",
    "basis": None,          # product-specific default
    "ordered": None,        # sort coordinates before the basis; default on for the max-call
    "variant": "value",
    "N": DESK_SCALE,
    "N_test": DESK_SCALE,
    "outer": 0,             # outer paths for the dual bound; 0 skips it
    "inner": 1000,
    "seed": 1,
    "strict": False,
    "memory_cap_gib": DEFAULT_MEMORY_CAP / 2**30,
    "outputs": {},
}

OUTPUT_KEYS = ("report", "csv", "model")


def _merge_section(name, given, defaults):
    if not isinstance(given, dict):
        raise ConfigError(f"{name} must be an object")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {unknown}; allowed: {sorted(defaults)}")
    out = dict(defaults)
    out.update(given)
    return out


def normalize_config(config):
    """Validate ``config`` and fill every default; returns a new dict."""
    cfg = _merge_section("config", config, DEFAULTS)
    section = cfg["product"]
    if not isinstance(section, dict) or len(section) != 1:
        raise ConfigError(f"product must hold exactly one of {sorted(PRODUCT_DEFAULTS)}")
    (kind, params), = section.items()
    if kind not in PRODUCT_DEFAULTS:
        raise ConfigError(f"unknown product {kind!r}; choose from {sorted(PRODUCT_DEFAULTS)}")
    cfg["product"] = {kind: _merge_section(f"product.{kind}", params or {},
                                           PRODUCT_DEFAULTS[kind])}
    cfg["outputs"] = _merge_section("outputs", cfg["outputs"] or {},
                                    dict.fromkeys(OUTPUT_KEYS))
    if cfg["method"] not in METHODS:
        raise ConfigError(f"unknown method {cfg['method']!r}; choose from {sorted(METHODS)}")
    if cfg["basis"] is None:
        cfg["basis"] = DEFAULT_BASIS[kind]
    if cfg["ordered"] is None:
        cfg["ordered"] = kind == "max_call"
    for key in ("N", "N_test", "outer", "inner", "seed"):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool) or cfg[key] < 0:
            raise ConfigError(f"{key} must be a non-negative integer")
    if cfg["N"] < 1:
        raise ConfigError("N must be >= 1")
    if cfg["outer"] and cfg["inner"] < 2:
        raise ConfigError("inner must be >= 2 when outer > 0")
    if cfg["outer"] > cfg["N_test"]:
        raise ConfigError("outer paths are drawn from the test set, so outer <= N_test")
    return cfg


def config_hash(config):
    """SHA-256 of the normalized config in canonical JSON form."""
    text = json.dumps(normalize_config(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def product_kind(cfg):
    return next(iter(cfg["product"]))


def build_problem(config):
    """``(params, product, basis, method)`` described by a config."""
    cfg = normalize_config(config)
    kind = product_kind(cfg)
    p = cfg["product"][kind]
    grid = TimeGrid.uniform(p["T"], p["J"])
    d = p.get("d", 1)
    params = GBMParams.symmetric(d, p["r"], p["delta"], p["sigma"], p["x0"], p.get("rho", 0.0))
    if kind == "max_call":
        product = MaxCallSpec(p["K"], p["r"], grid)
    elif kind == "put":
        product = PutSpec(p["K"], p["r"], grid)
    else:
        product = SwapSpec(p["alpha"], p["n1"], p["n2"], p["s1"], p["s2"], p["s3"], p["r"],
                           params.spot, grid, notional=p["notional"])
    method, b = METHODS[cfg["method"]]
    fixed = FixedBasisFamily(cfg["basis"], d, bool(cfg["ordered"]))
    if b and fixed.code == PAYOFF:
        raise ConfigError("the payoff basis cannot be reinforced: g already enters through the "
                          "reinforcing function at the second-to-last date")
    basis = BasisSpec(fixed, ReinforcementSpec(b, cfg["variant"]))
    return params, product, basis, method


class _Stage:
    """Context manager tagging escaping library errors with a pipeline stage."""

    def __init__(self, name, timings):
        self.name, self.timings = name, timings

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timings[self.name] = self.timings.get(self.name, 0.0) + time.perf_counter() - self.start
        if exc is not None and isinstance(exc, RRMCError) and not hasattr(exc, "stage"):
            exc.stage = self.name
        return False


def training_paths(cfg, params, grid):
    return simulate(params, grid, cfg["N"], cfg["seed"])


def holdout_paths(cfg, params, grid):
    return simulate(params, grid, cfg["N_test"], rng.test_seed(cfg["seed"]))


def cost_summary(cfg, basis, model):
    """Predicted costs for this basis against a standard quadratic comparator, plus counts."""
    d = basis.fixed.dim
    comparator = FixedBasisFamily("constant-linear-quadratic", d, basis.fixed.ordered)
    k_r = basis.K
    k = max(comparator.size, k_r) if basis.fixed.code != QUADRATIC else k_r
    out = {"K_r": k_r, "K_standard": k, "J": model.num_dates}
    if model.counter is not None:
        out["counted_f_evals"] = model.counter.f_evals
        out["counted_mul_adds"] = model.counter.mul_adds
    if k_r < k:
        p = costmodel.CostParams(1, 1, cfg["N"], max(cfg["N_test"], 1), model.num_dates, k, k_r,
                                 basis.b)
        out.update(costmodel.predicted_costs(p))
    return out


def run_experiment(config):
    """Simulate, train, bound and report; writes any configured output files."""
    cfg = normalize_config(config)
    timings = {}
    with _Stage("setup", timings):
        params, product, basis, method = build_problem(cfg)
    with _Stage("simulate", timings):
        train_set = training_paths(cfg, params, product.grid)
    with _Stage("train", timings):
        model = train(train_set, product, basis, method, strict=cfg["strict"],
                      memory_cap=cfg["memory_cap_gib"] * 2**30)
        del train_set
    outputs = cfg["outputs"]
    if outputs["model"]:
        with _Stage("report", timings):
            model.save(outputs["model"])
    lower = upper = None
    if cfg["N_test"]:
        with _Stage("simulate", timings):
            tests = holdout_paths(cfg, params, product.grid)
        with _Stage("bound", timings):
            lower = bounds.lower_bound(model, tests)
        if cfg["outer"]:
            outer = PathSet(tests.states[:cfg["outer"]], tests.grid, tests.seed, params)
            with _Stage("bound", timings):
                upper = bounds.dual_upper_bound(model, outer, cfg["inner"], tests.seed)
    report = {
        "version": __version__,
        "config": cfg,
        "config_hash": config_hash(cfg),
        "lower": lower.to_dict() if lower else None,
        "upper": upper.to_dict() if upper else None,
        "costs": cost_summary(cfg, basis, model),
        "diagnostics": model.diagnostics,
        "timings": timings,
    }
    with _Stage("report", timings):
        if outputs["report"]:
            with open(outputs["report"], "w") as fh:
                json.dump(report, fh, indent=1, default=_json_default)
        if outputs["csv"]:
            for est in (lower, upper):
                if est is not None:
                    bounds.append_csv(outputs["csv"], result_row(cfg, est, timings))
    return report


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _row_fields(cfg):
    kind = product_kind(cfg)
    p = cfg["product"][kind]
    return {"product": kind, "d": p.get("d", 1), "rho": p.get("rho", 0.0),
            "basis": cfg["basis"], "method": cfg["method"], "N": cfg["N"],
            "N_test": cfg["N_test"], "seed": cfg["seed"]}


def result_row(cfg, estimate, timings):
    row = bounds.csv_row(estimate, **_row_fields(cfg))
    row["inner"] = estimate.inner_paths if estimate.kind == "upper" else ""
    row["wall_seconds"] = round(sum(timings.values()), 3)
    return row


TABLE_COLUMNS = bounds.CSV_COLUMNS + ("error",)


def apply_override(template, override):
    """Deep-merge ``override`` into a copy of ``template`` (nested dicts merge, others replace)."""
    out = copy.deepcopy(template)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = apply_override(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def run_table(template, sweep, out_path):
    """Run every override in ``sweep`` and write one CSV row per bound.

    A cell that fails records its error message and the sweep continues.
    Returns the list of rows written.
    """
    rows = []
    with open(out_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TABLE_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for override in sweep:
            cfg = apply_override(template, override)
            cfg["outputs"] = {}
            try:
                report = run_experiment(cfg)
                cfg = report["config"]
                cell = []
                for kind in ("lower", "upper"):
                    doc = report[kind]
                    if doc is None:
                        continue
                    est = bounds.BoundEstimate(doc["kind"], doc["value"], doc["std_error"],
                                               doc["num_paths"], doc["seed"], doc["inner_paths"])
                    cell.append(result_row(cfg, est, report["timings"]))
            except (RRMCError, ValueError) as exc:
                log.error("sweep cell %s failed: %s", override, exc)
                row = _safe_fields(cfg)
                row["error"] = f"{getattr(exc, 'stage', 'config')}: {exc}"
                cell = [row]
            for row in cell:
                writer.writerow(row)
                rows.append(row)
            fh.flush()
    return rows


def _safe_fields(cfg):
    try:
        return _row_fields(normalize_config(cfg))
    except (RRMCError, ValueError):
        return {"method": cfg.get("method"), "basis": cfg.get("basis")}


def expand_sweep(spec):
    """Sweep from a list of overrides, or ``{"grid": {dotted.key: [values]}}`` as a product."""
    if isinstance(spec, list):
        return spec
    if not isinstance(spec, dict) or set(spec) != {"grid"}:
        raise ConfigError("sweep must be a list of overrides or {\"grid\": {...}}")
    cells = [{}]
    for dotted, values in spec["grid"].items():
        new = []
        for cell in cells:
            for value in values:
                override = copy.deepcopy(cell)
                node = override
                parts = dotted.split(".")
                for part in parts[:-1]:
                    node = node.setdefault(part, {})
                node[parts[-1]] = value
                new.append(override)
        cells = new
    return cells if spec["grid"] else []


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def table_sweeps():
    """Ready-made sweeps mirroring the two published table layouts."""
    max_call = [{"product": {"max_call": {"d": d}}, "basis": basis, "method": method}
                for d in (2, 5, 10, 20)
                for basis in ("constant-linear", "constant-linear-quadratic",
                              "constant-linear-payoff")
                for method in ("standard-tvr", "reinforced-tvr")
                if not (basis == "constant-linear-payoff" and method == "reinforced-tvr")]
    swap = [{"product": {"swap": {"rho": rho}}, "basis": basis, "method": method}
            for rho in (0.0, 0.2, 0.5, 0.8)
            for basis in ("swap-order-stats", "swap-order-stats-quadratic")
            for method in ("standard-tvr", "reinforced-tvr")]
    return {"max_call": max_call, "swap": swap}


__all__ = ["DEFAULTS", "normalize_config", "config_hash", "build_problem",
           "run_experiment", "run_table", "expand_sweep", "table_sweeps", "apply_override"]
