"""Reward processes ``g_j(Z_j)`` for the benchmark products.

Every product splits its reward into two pieces::

    g_j = exercise_value_j(Z_j) + sum_{i <= j} cashflow_i(Z_i)

The first is what stopping at date ``j`` pays on top of everything already
accrued (a discounted option payoff), the second is a running sum of
discounted cash flows that the holder keeps regardless of the stopping date
(the swap's net coupons).  Options have no cash flows; the swap has no
exercise value.  Discounting to time 0 is folded into both pieces, so the
stopping problem itself is undiscounted.

All date indices are 0-based positions in ``grid.dates``.
"""
from dataclasses import dataclass, asdict

import numpy as np

from .errors import ConfigError
from .market_models import TimeGrid

MAX_CALL, PUT, SWAP = 0, 1, 2


def _check_grid(product, paths):
    if paths.grid != product.grid:
        raise ConfigError(f"product grid {product.grid.dates} does not match path grid "
                          f"{paths.grid.dates}")


class _Product:
    """Shared vectorised machinery; subclasses supply the three hooks."""

    def exercise_value(self, states, date):
        return np.zeros(np.shape(states)[0])

    def cashflow(self, states, date):
        return np.zeros(np.shape(states)[0])

    @property
    def has_cashflows(self):
        return False

    def discount(self, date):
        return float(np.exp(-self.rate * self.grid.dates[date]))

    def cashflow_table(self, paths):
        """Array ``(N, J)`` of per-date cash flows along each path."""
        _check_grid(self, paths)
        out = np.zeros(paths.states.shape[:2])
        if self.has_cashflows:
            for j in range(self.grid.num_dates):
                out[:, j] = self.cashflow(paths.states[:, j], j)
        return out

    def to_dict(self):
        doc = asdict(self)
        doc["grid"] = list(self.grid.dates)
        doc["kind"] = self.kind
        return doc


@dataclass(frozen=True)
class MaxCallSpec(_Product):
    """Bermudan call on the maximum of ``d`` assets, discounted to time 0."""

    strike: float
    rate: float
    grid: TimeGrid
    kind = "max_call"
    code = MAX_CALL

    def __post_init__(self):
        if self.strike <= 0:
            raise ConfigError("strike must be positive")

    def payoff(self, states):
        """Undiscounted ``(max_l x_l - K)^+``; also serves as the g(X) basis column."""
        return np.maximum(np.max(states, axis=-1) - self.strike, 0.0)

    def exercise_value(self, states, date):
        return self.discount(date) * self.payoff(states)

    def basis_scalar(self, states, date):
        return self.payoff(states)


@dataclass(frozen=True)
class PutSpec(_Product):
    """Single-asset Bermudan put, discounted to time 0 (oracle fixture product)."""

    strike: float
    rate: float
    grid: TimeGrid
    kind = "put"
    code = PUT

    def __post_init__(self):
        if self.strike <= 0:
            raise ConfigError("strike must be positive")

    def payoff(self, states):
        states = np.asarray(states)
        if states.shape[-1] != 1:
            raise ConfigError("PutSpec is a single-asset product")
        return np.maximum(self.strike - states[..., 0], 0.0)

    def exercise_value(self, states, date):
        return self.discount(date) * self.payoff(states)

    def basis_scalar(self, states, date):
        return self.payoff(states)


@dataclass(frozen=True)
class SwapSpec(_Product):
    """Asset-based cancelable coupon swap.

    The coupon rate steps down from ``s1`` to ``s2`` to ``s3`` as more assets
    end a period at or below ``(1 - quantile)`` of their starting value.  The
    holder receives the risk-free accrual and pays the coupon; ``notional``
    scales every cash flow (1e4 reports in basis points).
    """

    quantile: float
    n1: int
    n2: int
    s1: float
    s2: float
    s3: float
    rate: float
    spot0: tuple
    grid: TimeGrid
    notional: float = 1.0
    kind = "swap"
    code = SWAP

    def __post_init__(self):
        object.__setattr__(self, "spot0", tuple(float(s) for s in self.spot0))
        if not 0.0 < self.quantile < 1.0:
            raise ConfigError("quantile must lie in (0, 1)")
        if not 1 <= self.n1 < self.n2 <= len(self.spot0):
            raise ConfigError(f"need 1 <= n1 < n2 <= d, got n1={self.n1}, n2={self.n2}, "
                              f"d={len(self.spot0)}")

    @property
    def has_cashflows(self):
        return True

    def counts(self, states):
        barrier = (1.0 - self.quantile) * np.asarray(self.spot0)
        return np.count_nonzero(np.asarray(states) <= barrier, axis=-1)

    def coupon_rates(self, counts):
        counts = np.asarray(counts)
        return np.where(counts <= self.n1, self.s1, np.where(counts <= self.n2, self.s2, self.s3))

    def net_coupons(self, counts, date):
        t = self.grid.dates[date]
        dt = t - (self.grid.dates[date - 1] if date > 0 else 0.0)
        coupon = self.coupon_rates(counts) * dt
        return self.notional * np.exp(-self.rate * t) * (np.expm1(self.rate * dt) - coupon)

    def cashflow(self, states, date):
        return self.net_coupons(self.counts(states), date)

    basis_scalar = cashflow


def max_call_reward(spec, state, date):
    """``e^{-r t_date} (max_l state_l - K)^+``."""
    state = np.asarray(state, dtype=float)
    if np.any(state <= 0):
        raise ConfigError("asset values must be positive")
    if not 0 <= date < spec.grid.num_dates:
        raise ConfigError(f"date index {date} outside grid")
    return float(spec.exercise_value(state[None, :], date)[0])


def swap_coupon_count(spec, state):
    """Number of assets at or below ``(1 - quantile)`` times their start value."""
    state = np.asarray(state, dtype=float)
    if state.shape != (len(spec.spot0),):
        raise ConfigError("state and spot0 must have equal length")
    return int(spec.counts(state))


def swap_net_coupon(spec, count, date):
    """Discounted net coupon ``e^{-r t_i} (e^{r dt} - 1 - a(count) dt)`` at date index ``date``."""
    if not 0 <= date < spec.grid.num_dates:
        raise ConfigError(f"date index {date} outside grid")
    return float(spec.net_coupons(count, date))


@dataclass(frozen=True, eq=False)
class RewardTable:
    """``values[i, j] = g_j(Z_j^(i))``; for the swap the aggregated net coupon."""

    values: np.ndarray


def build_reward_table(product, paths):
    _check_grid(product, paths)
    values = np.cumsum(product.cashflow_table(paths), axis=1)
    for j in range(product.grid.num_dates):
        values[:, j] += product.exercise_value(paths.states[:, j], j)
    if not np.all(np.isfinite(values)):
        raise ConfigError("reward table contains non-finite values")
    values.setflags(write=False)
    return RewardTable(values)


def product_from_dict(doc):
    doc = dict(doc)
    kind = doc.pop("kind")
    grid = TimeGrid(tuple(doc.pop("grid")))
    cls = {"max_call": MaxCallSpec, "put": PutSpec, "swap": SwapSpec}.get(kind)
    if cls is None:
        raise ConfigError(f"unknown product kind {kind!r}")
    return cls(grid=grid, **doc)
