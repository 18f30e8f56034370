"""Independent ground truth for small problems.

:func:`lattice_price` prices one-asset Bermudan puts and calls on a
Cox-Ross-Rubinstein tree; :func:`exhaustive_value` solves the stopping
problem exactly on the empirical measure of a handful of simulated paths.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConvergenceError
from .market_models import TimeGrid

EXHAUSTIVE_CAP = 10_000


@dataclass(frozen=True)
class LatticeSpec:
    """One-asset Bermudan option exercisable at ``grid`` dates only.

    Parameters
    ----------
    strike, spot, rate, vol, dividend
        Contract and Black-Scholes model parameters.
    grid : TimeGrid
        Exercise dates.
    kind : {"put", "call"}
    steps : int
        Tree steps per unit time; each exercise date is snapped to a node.
    """

    strike: float
    spot: float
    rate: float
    vol: float
    grid: TimeGrid
    dividend: float = 0.0
    kind: str = "put"
    steps: int = 50

    def __post_init__(self):
        if self.kind not in ("put", "call"):
            raise ConfigError(f"lattice kind must be 'put' or 'call', got {self.kind!r}")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.spot <= 0 or self.vol < 0:
            raise ConfigError("spot must be positive and vol non-negative")


def _tree_value(spec, steps_per_date):
    """CRR backward induction with ``steps_per_date`` sub-steps between exercise dates."""
    n_dates = spec.grid.num_dates
    n = n_dates * steps_per_date
    dt = spec.grid.maturity / n
    u = np.exp(spec.vol * np.sqrt(dt))
    disc = np.exp(-spec.rate * dt)
    if u == 1.0:
        q = 1.0
        u = np.exp((spec.rate - spec.dividend) * dt)
        d = u
    else:
        d = 1.0 / u
        q = (np.exp((spec.rate - spec.dividend) * dt) - d) / (u - d)
    if not 0.0 <= q <= 1.0:
        raise ConfigError(f"risk-neutral probability {q:.4f} outside [0, 1]; refine the tree")
    sign = -1.0 if spec.kind == "put" else 1.0

    def payoff(level):
        k = np.arange(level + 1)
        return np.maximum(sign * (spec.spot * u**k * d**(level - k) - spec.strike), 0.0)

    values = payoff(n)
    for level in range(n - 1, -1, -1):
        values = disc * (q * values[1:] + (1.0 - q) * values[:-1])
        if level and level % steps_per_date == 0:
            np.maximum(values, payoff(level), out=values)
    return float(values[0])


def _smoothed(spec, m):
    # CRR values oscillate between neighbouring step counts; the average does not
    return 0.5 * (_tree_value(spec, m) + _tree_value(spec, m + 1))


def lattice_price(spec, tol=1e-4, max_steps=2**16):
    """Bermudan value converged by step doubling with Richardson extrapolation.

    Stops when two successive extrapolated values differ by less than ``tol``.
    Raises :class:`ConvergenceError` with the last two iterates otherwise.
    """
    steps = spec.grid.steps
    if not np.allclose(steps, steps[0]):
        raise ConfigError("lattice oracle needs equally spaced exercise dates")
    n = max(1, int(np.ceil(spec.steps * steps[0])))
    prev_raw = _smoothed(spec, n)
    prev_ext = None
    while True:
        n *= 2
        if n * spec.grid.num_dates > max_steps:
            raise ConvergenceError(f"lattice did not converge to {tol} within {max_steps} steps",
                                   iterates=(prev_ext, prev_raw))
        raw = _smoothed(spec, n)
        ext = 2.0 * raw - prev_raw
        if prev_ext is not None and abs(ext - prev_ext) < tol:
            return ext
        prev_raw, prev_ext = raw, ext


def exhaustive_value(paths, reward):
    """Optimal stopping value on the empirical measure of ``paths``.

    Paths that agree on their first ``j`` states share an information node
    at date ``j``; the dynamic program runs over that prefix tree.  For
    paths with distinct states this is the mean of ``max_j g_j``, the
    anticipative envelope that bounds every stopping rule from above.
    """
    values = np.asarray(getattr(reward, "values", reward), dtype=float)
    states = np.asarray(paths.states if hasattr(paths, "states") else paths, dtype=float)
    if values.ndim != 2 or values.shape != states.shape[:2]:
        raise ConfigError(f"reward table {values.shape} does not match paths {states.shape[:2]}")
    n, n_dates = values.shape
    if n * n_dates > EXHAUSTIVE_CAP:
        raise ConfigError(f"exhaustive evaluation limited to {EXHAUSTIVE_CAP} path-dates, "
                          f"got {n * n_dates}")
    flat = states.reshape(n, n_dates, -1)
    node_value = values[:, -1].copy()
    for j in range(n_dates - 2, -1, -1):
        keys = [flat[i, :j + 1].tobytes() for i in range(n)]
        groups = {}
        for i, key in enumerate(keys):
            groups.setdefault(key, []).append(i)
        new = np.empty(n)
        for members in groups.values():
            cont = node_value[members].mean()
            new[members] = max(values[members[0], j], cont)
        node_value = new
    return float(node_value.mean())
