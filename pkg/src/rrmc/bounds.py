"""Out-of-sample lower bounds and nested-simulation dual upper bounds."""
from dataclasses import asdict, dataclass
import csv
import os

import numpy as np

from . import _kernels, rng
from .basis import reinforcing
from .errors import ConfigError
from .market_models import step_coefficients

CI_Z = 1.96

CSV_COLUMNS = ("product", "d", "rho", "basis", "method", "kind", "value", "std_error", "ci_low",
               "ci_high", "N", "N_test", "inner", "seed", "wall_seconds")


@dataclass(frozen=True)
class BoundEstimate:
    kind: str
    value: float
    std_error: float
    num_paths: int
    seed: int = None
    inner_paths: int = None

    @property
    def ci95(self):
        return (self.value - CI_Z * self.std_error, self.value + CI_Z * self.std_error)

    def to_dict(self):
        doc = asdict(self)
        doc["ci95"] = list(self.ci95)
        return doc


def _estimate(kind, samples, seed, inner=None):
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    se = float(samples.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return BoundEstimate(kind, float(samples.mean()), se, n, seed, inner)


def continuation_values(model, states, date):
    """Excess continuation ``C_date`` at each row of ``states`` by the backward recursion.

    Starts from ``C_{J-1} = 0`` and applies the fitted regressions down to
    ``date``, re-evaluating the reinforcing feature at the given states each
    time.  Cost is ``O(K + J - date)`` basis/reward evaluations per state.
    """
    product, basis = model.product, model.basis
    n_dates = model.num_dates
    if not 0 <= date < n_dates:
        raise ConfigError(f"date index {date} outside 0..{n_dates - 1}")
    states = np.asarray(states, dtype=float)
    c = np.zeros(states.shape[0])
    if date == n_dates - 1:
        return c
    feats = basis.fixed.evaluate(states, product.basis_scalar(states, date))
    for l in range(n_dates - 1, date, -1):
        gamma = model.coeffs[l - 1]
        new = feats @ gamma[:basis.K]
        if basis.b:
            nu = reinforcing(basis.reinforcement.variant, product.exercise_value(states, l), c)
            new += gamma[basis.K] * nu
        c = new
    return c


def evaluate_continuation(model, state, date, accrued=0.0):
    """``C_date(state)`` for one state; ``accrued`` adds cash flows already received."""
    state = np.asarray(state, dtype=float)
    return float(accrued + continuation_values(model, state[None, :], date)[0])


def _check(model, paths, product):
    product = model.product if product is None else product
    if product != model.product:
        raise ConfigError("product differs from the one the model was trained on")
    if paths.grid != product.grid:
        raise ConfigError("test path grid differs from product grid")
    return product


def stop_and_reward(model, paths, product=None):
    """Stopping dates (0-based) and realised rewards along each path."""
    product = _check(model, paths, product)
    states = paths.states
    n, n_dates, _ = states.shape
    accrued = np.cumsum(product.cashflow_table(paths), axis=1)
    tau = np.full(n, n_dates - 1)
    reward = np.empty(n)
    alive = np.arange(n)
    for j in range(n_dates):
        x = states[alive, j]
        g = product.exercise_value(x, j)
        if j == n_dates - 1:
            stop = np.ones(alive.size, dtype=bool)
        else:
            stop = g >= continuation_values(model, x, j)
        hit = alive[stop]
        tau[hit] = j
        reward[hit] = g[stop] + accrued[hit, j]
        alive = alive[~stop]
        if alive.size == 0:
            break
    return tau, reward


def pathwise_stop_times(model, test_paths, product=None):
    """First date with ``g_j >= C_j`` on each path (the last date if none earlier)."""
    return stop_and_reward(model, test_paths, product)[0]


def lower_bound(model, test_paths, product=None):
    """Mean reward of the fitted stopping rule on independent paths."""
    if test_paths.seed is not None and model.seed is not None and test_paths.seed == model.seed:
        raise ConfigError("test paths share the training seed; use rng.test_seed(seed)")
    _, reward = stop_and_reward(model, test_paths, product)
    return _estimate("lower", reward, test_paths.seed)


def in_sample_value(model, paths, product=None):
    """Policy value on arbitrary paths, including the training set (for overfitting checks)."""
    _, reward = stop_and_reward(model, paths, product)
    return _estimate("in-sample", reward, paths.seed)


def kernel_arguments(model):
    """Positional model/product arguments shared by the compiled kernels."""
    basis = model.basis
    code, params, barrier, disc, accrual, dts = _kernels.pack_product(model.product,
                                                                      basis.fixed.dim)
    return (np.ascontiguousarray(model.coefficient_matrix()), basis.fixed.code,
            basis.fixed.ordered, basis.K, basis.b == 1,
            basis.reinforcement.variant == "indicator",
            code, params, barrier, disc, accrual, dts)


def dual_upper_bound(model, outer_paths, inner_count=1000, seed=0, product=None):
    """Andersen-Broadie style upper bound from the fitted stopping policy.

    Along each outer path a martingale is built from the value of following
    the policy, each conditional expectation replaced by the average over
    ``inner_count`` sub-paths branched from the outer state.  Sub-path random
    numbers depend only on ``(seed, outer index, date, inner index)``.
    """
    product = _check(model, outer_paths, product)
    if inner_count < 2:
        raise ConfigError("inner_count must be >= 2")
    params = outer_paths.params
    if params is None:
        raise ConfigError("outer paths carry no model parameters to branch from")
    drift, diffusion = step_coefficients(params, product.grid.steps)
    samples = _kernels.dual_samples(
        np.ascontiguousarray(outer_paths.states), int(inner_count), rng.as_key(seed), drift,
        diffusion, np.ascontiguousarray(params.chol), *kernel_arguments(model))
    return _estimate("upper", samples, seed, int(inner_count))


def append_csv(path, row):
    """Append one result row, writing the header if the file is new or empty."""
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, extrasaction="ignore")
        if new:
            writer.writeheader()
        writer.writerow(row)


def csv_row(estimate, **fields):
    low, high = estimate.ci95
    row = dict(fields)
    row.update(kind=estimate.kind, value=estimate.value, std_error=estimate.std_error,
               ci_low=low, ci_high=high)
    return row
