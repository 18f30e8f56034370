"""Correlated geometric Brownian motion sampled at the exercise dates."""
from dataclasses import dataclass, field
import struct

import numba
import numpy as np

from .errors import ConfigError, FactorizationError, SimulationError
from . import rng

PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Exercise dates ``t_1 < ... < t_J = maturity``; time 0 is implicit."""

    dates: tuple

    def __post_init__(self):
        dates = tuple(float(t) for t in self.dates)
        if len(dates) < 1:
            raise ConfigError("time grid needs at least one exercise date")
        if dates[0] <= 0 or any(b <= a for a, b in zip(dates, dates[1:])):
            raise ConfigError(f"exercise dates must be positive and strictly increasing: {dates}")
        object.__setattr__(self, "dates", dates)

    @classmethod
    def uniform(cls, maturity, num_dates):
        """Equally spaced dates ``t_i = i * maturity / num_dates``."""
        if num_dates < 1:
            raise ConfigError("num_dates must be >= 1")
        return cls(tuple(maturity * i / num_dates for i in range(1, num_dates + 1)))

    @property
    def maturity(self):
        return self.dates[-1]

    @property
    def num_dates(self):
        return len(self.dates)

    @property
    def times(self):
        return np.asarray(self.dates)

    @property
    def steps(self):
        """Interval lengths ``t_j - t_{j-1}`` with ``t_0 = 0``."""
        return np.diff(np.concatenate(([0.0], self.times)))


def cholesky(corr):
    """Lower Cholesky factor of a correlation matrix.

    Tolerates semidefinite input: a pivot in ``[-1e-12, 0]`` is clamped to zero
    (perfect correlation), anything more negative raises
    :class:`FactorizationError` naming the pivot.
    """
    a = np.array(corr, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise FactorizationError(f"correlation matrix must be square, got shape {a.shape}")
    if not np.allclose(a, a.T, atol=1e-14, rtol=0):
        raise FactorizationError("correlation matrix is not symmetric")
    if not np.allclose(np.diag(a), 1.0, atol=1e-14, rtol=0):
        raise FactorizationError("correlation matrix must have unit diagonal")
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j] - low[j, :j] @ low[j, :j]
        if pivot < -PIVOT_TOL:
            raise FactorizationError(
                f"correlation matrix is not positive semidefinite: pivot {j} = {pivot:.3e}\n{a}",
                pivot=j)
        ljj = np.sqrt(max(pivot, 0.0))
        low[j, j] = ljj
        if j + 1 < n:
            rest = a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]
            if ljj > 0:
                low[j + 1:, j] = rest / ljj
            elif np.any(np.abs(rest) > 1e-10):
                raise FactorizationError(
                    f"correlation matrix is not positive semidefinite at pivot {j}", pivot=j)
    return low


def equicorrelation(dim, rho):
    """Correlation matrix with unit diagonal and constant off-diagonal ``rho``."""
    c = np.full((dim, dim), float(rho))
    np.fill_diagonal(c, 1.0)
    return c


@dataclass(frozen=True)
class GBMParams:
    """Risk-neutral GBM: ``dX_l / X_l = (rate - dividend) dt + vol_l dW_l``."""

    rate: float
    dividend: float
    vols: tuple
    corr: np.ndarray
    spot: tuple
    chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vols = tuple(float(v) for v in np.atleast_1d(self.vols))
        spot = tuple(float(s) for s in np.atleast_1d(self.spot))
        corr = np.array(self.corr, dtype=float)
        if len(vols) != len(spot) or corr.shape != (len(vols), len(vols)):
            raise ConfigError("vols, spot and corr must agree on the dimension")
        if min(vols) < 0 or min(spot) <= 0:
            raise ConfigError("vols must be non-negative and spot strictly positive")
        corr.setflags(write=False)
        object.__setattr__(self, "vols", vols)
        object.__setattr__(self, "spot", spot)
        object.__setattr__(self, "corr", corr)
        low = cholesky(corr)
        low.setflags(write=False)
        object.__setattr__(self, "chol", low)

    @classmethod
    def symmetric(cls, dim, rate, dividend, vol, spot, rho=0.0):
        """Identically distributed assets with equicorrelation ``rho``."""
        return cls(rate, dividend, (vol,) * dim, equicorrelation(dim, rho), (spot,) * dim)

    @property
    def dim(self):
        return len(self.vols)

    def to_dict(self):
        return {"rate": self.rate, "dividend": self.dividend, "vols": list(self.vols),
                "corr": self.corr.tolist(), "spot": list(self.spot)}

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["rate"], doc["dividend"], tuple(doc["vols"]), np.asarray(doc["corr"]),
                   tuple(doc["spot"]))


@dataclass(frozen=True, eq=False)
class PathSet:
    """States ``Z_j^(i)`` stored as a read-only array ``(path, date, asset)``.

    Column ``j`` of the date axis holds the state at ``grid.dates[j]``; the
    common starting point ``params.spot`` at time 0 is not stored.
    """

    states: np.ndarray
    grid: TimeGrid
    seed: int
    params: GBMParams = None

    @property
    def num_paths(self):
        return self.states.shape[0]

    @property
    def dim(self):
        return self.states.shape[2]

    def dump(self, path):
        """Write the flat binary layout: 4 little-endian int64 header words then float64 payload."""
        n, j, d = self.states.shape
        with open(path, "wb") as fh:
            fh.write(struct.pack("<4Q", n, j, d, int(self.seed) & ((1 << 64) - 1)))
            fh.write(np.ascontiguousarray(self.states, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path, grid, params=None):
        with open(path, "rb") as fh:
            n, j, d, seed = struct.unpack("<4Q", fh.read(32))
            data = np.frombuffer(fh.read(), dtype="<f8")
        if j != grid.num_dates:
            raise ConfigError(f"path file has {j} dates, grid has {grid.num_dates}")
        states = data.reshape(n, j, d).astype(float)
        states.setflags(write=False)
        return cls(states, grid, seed, params)


@numba.njit(cache=True)
def _gbm_kernel(n_paths, log_spot, drift, diffusion, chol, key, tag):
    """Exact lognormal stepping; ``drift``/``diffusion`` are ``(steps, dim)``."""
    n_steps, dim = drift.shape
    out = np.empty((n_paths, n_steps, dim))
    xi = np.empty(dim)
    logx = np.empty(dim)
    for i in range(n_paths):
        for l in range(dim):
            logx[l] = log_spot[l]
        for j in range(n_steps):
            rng.fill_normals(xi, j, np.uint64(i), np.uint64(0), tag, key)
            for l in range(dim):
                z = 0.0
                for m in range(l + 1):
                    z += chol[l, m] * xi[m]
                logx[l] += drift[j, l] + diffusion[j, l] * z
                out[i, j, l] = np.exp(logx[l])
    return out


def step_coefficients(params, steps):
    """Per-interval log drift and diffusion scale, both shaped ``(len(steps), dim)``."""
    vols = np.asarray(params.vols)
    dt = np.asarray(steps, dtype=float)[:, None]
    drift = (params.rate - params.dividend - 0.5 * vols**2) * dt
    return drift, vols * np.sqrt(dt)


def simulate(params, grid, num_paths, seed):
    """Sample ``num_paths`` trajectories of the GBM at ``grid`` dates, all from ``params.spot``.

    Path ``i`` depends only on ``(seed, i)``, so the result is reproducible
    bit for bit and independent of how path blocks are scheduled.
    """
    if num_paths < 1:
        raise ConfigError("num_paths must be >= 1")
    drift, diffusion = step_coefficients(params, grid.steps)
    states = _gbm_kernel(int(num_paths), np.log(np.asarray(params.spot)), drift, diffusion,
                         np.ascontiguousarray(params.chol), rng.as_key(seed), np.uint64(0))
    bad = ~np.isfinite(states)
    if bad.any():
        i, j, _ = np.argwhere(bad)[0]
        raise SimulationError(f"non-finite state at path {i}, date {j}", path=int(i), date=int(j))
    states.setflags(write=False)
    return PathSet(states, grid, int(seed), params)
