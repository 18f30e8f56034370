"""Backward induction with reinforced regression bases.

The continuation estimates are fitted from the last exercise date backwards.
At the step that produces ``C_{j-1}`` the design is the fixed basis at the
date ``j-1`` states, optionally extended by one reinforcing column built from
the step before, ``nu(x) = max(g_j(x), C_j(x))``.  Because ``C_j`` itself
contains ``max(g_{j+1}, C_{j+1})`` and so on, evaluating the new fit at old
states needs ``C_j`` at *every* earlier date of every training path.  The
workspace keeps that whole matrix and refreshes it after each fit, which
costs ``O(N j K)`` per step instead of re-running the recursion.

Regressions target the continuation value in excess of cash flows already
accrued (see :mod:`rrmc.products`), which for options is the plain
continuation value.  Dates are 0-based positions in the grid; the last date
has continuation identically zero and no coefficients.
"""
from dataclasses import dataclass, field
import json
import logging

import numpy as np

from .basis import BasisSpec, reinforcing
from .errors import CapacityError, ConfigError, NumericalError
from .products import product_from_dict
from .regression import solve_least_squares

log = logging.getLogger(__name__)

MODEL_FORMAT = "rrmc.continuation-model"
MODEL_VERSION = 1
DEFAULT_MEMORY_CAP = 3 * 2**30


@dataclass
class CostCounter:
    """Coarse event counts: function evaluations and add-multiply pairs."""

    f_evals: int = 0
    mul_adds: int = 0


@dataclass(eq=False)
class BackwardWorkspace:
    """Precomputed training data plus the running continuation matrix.

    ``features[m, l]``   fixed basis at ``Z_l^(m)``
    ``exercise[m, l, i]`` exercise value of date ``i`` at ``Z_l^(m)``, ``i >= l``
    ``cashflows[m, l]``  cash flow paid at date ``l``
    ``cont[m, l]``       current continuation estimate ``C_j(Z_l^(m))``, valid for ``l <= date``
    """

    features: np.ndarray
    exercise: np.ndarray
    cashflows: np.ndarray
    cont: np.ndarray
    basis: BasisSpec
    date: int
    counter: CostCounter = field(default_factory=CostCounter)

    @property
    def num_paths(self):
        return self.features.shape[0]

    @property
    def num_dates(self):
        return self.features.shape[1]


@dataclass(eq=False)
class LSWorkspace:
    """Dummy cash flows of the Longstaff-Schwartz variant.

    ``excess`` holds the realised value from the current date on, net of cash
    flows accrued up to that date; :attr:`dummy_cashflows` adds them back.
    """

    excess: np.ndarray
    accrued: np.ndarray

    @property
    def dummy_cashflows(self):
        return self.excess + self.accrued


@dataclass(eq=False)
class ContinuationModel:
    """Coefficients ``coeffs[j]`` of ``C_j`` for dates ``0..J-2``; ``C_{J-1} = 0``."""

    basis: BasisSpec
    coeffs: list
    product: object
    method: str = "tvr"
    num_paths: int = 0
    seed: int = None
    diagnostics: list = field(default_factory=list)
    counter: CostCounter = None

    def __post_init__(self):
        n_dates = self.product.grid.num_dates
        if len(self.coeffs) != n_dates - 1:
            raise ConfigError(f"model needs {n_dates - 1} coefficient vectors, got {len(self.coeffs)}")
        self.coeffs = [np.asarray(c, dtype=float) for c in self.coeffs]
        for c in self.coeffs:
            if c.shape != (self.basis.width,) or not np.all(np.isfinite(c)):
                raise ConfigError("coefficient vector has wrong length or non-finite entries")

    @property
    def num_dates(self):
        return self.product.grid.num_dates

    def coefficient_matrix(self):
        """Coefficients stacked as ``(J, width)`` with a zero row for the last date."""
        out = np.zeros((self.num_dates, self.basis.width))
        if self.coeffs:
            out[:-1] = np.vstack(self.coeffs)
        return out

    def to_dict(self):
        return {"format": MODEL_FORMAT, "version": MODEL_VERSION, "method": self.method,
                "basis": self.basis.to_dict(), "product": self.product.to_dict(),
                "coefficients": [c.tolist() for c in self.coeffs],
                "num_paths": self.num_paths, "seed": self.seed}

    @classmethod
    def from_dict(cls, doc):
        if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
            raise ConfigError(f"not a version-{MODEL_VERSION} continuation model document")
        return cls(BasisSpec.from_dict(doc["basis"]), doc["coefficients"],
                   product_from_dict(doc["product"]), doc["method"], doc["num_paths"], doc["seed"])

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def workspace_bytes(num_paths, num_dates, width):
    """Bytes held by a workspace: features, the N*J^2 reward block, cash flows, continuation."""
    return 8 * num_paths * num_dates * (width + num_dates + 2)


def precompute(paths, product, basis, memory_cap=DEFAULT_MEMORY_CAP):
    """Evaluate and store the fixed basis and all rewards ``g_i(Z_l)``, ``l <= i``."""
    if paths.grid != product.grid:
        raise ConfigError("path grid and product grid differ")
    if paths.dim != basis.fixed.dim:
        raise ConfigError(f"basis dimension {basis.fixed.dim} != path dimension {paths.dim}")
    n, n_dates, _ = paths.states.shape
    need = workspace_bytes(n, n_dates, basis.K)
    if memory_cap is not None and need > memory_cap:
        rewards = 8 * n * n_dates * n_dates
        raise CapacityError(
            f"workspace needs {need / 2**30:.2f} GiB (cap {memory_cap / 2**30:.2f} GiB); the reward "
            f"block g_i(Z_l) for N*J^2/2 = {n * n_dates**2 // 2} pairs alone is "
            f"{rewards / 2**30:.2f} GiB stored densely. Reduce N or raise the cap.")
    counter = CostCounter()
    features = np.empty((n, n_dates, basis.K))
    exercise = np.zeros((n, n_dates, n_dates))
    for l in range(n_dates):
        x = paths.states[:, l]
        features[:, l] = basis.fixed.evaluate(x, product.basis_scalar(x, l))
        for i in range(l, n_dates):
            exercise[:, l, i] = product.exercise_value(x, i)
    counter.f_evals += n * n_dates * basis.K + n * n_dates * (n_dates + 1) // 2
    cashflows = product.cashflow_table(paths)
    return BackwardWorkspace(features, exercise, cashflows, np.zeros((n, n_dates)), basis,
                             n_dates - 1, counter)


def _reinforcing_column(ws, gamma_date, at):
    """Reinforcing feature for the regression at ``gamma_date``, evaluated at training dates ``at``."""
    nxt = gamma_date + 1
    return reinforcing(ws.basis.reinforcement.variant, ws.exercise[:, at, nxt], ws.cont[:, at])


def refresh_continuation_values(ws, gamma, date):
    """Replace ``cont[:, l]`` for ``l <= date`` by the model just fitted at ``date``.

    Expects ``cont`` to hold the continuation of ``date + 1`` at those states.
    """
    gamma = np.asarray(gamma, dtype=float)
    basis = ws.basis
    if date != ws.date - 1:
        raise ConfigError(f"workspace holds date {ws.date}; cannot refresh to {date}")
    span = slice(0, date + 1)
    new = ws.features[:, span] @ gamma[:basis.K]
    if basis.b:
        new += gamma[basis.K] * _reinforcing_column(ws, date, span)
    ws.cont[:, span] = new
    ws.date = date
    ws.counter.mul_adds += ws.num_paths * (date + 1) * basis.width
    return ws


def _design(ws, date):
    m = ws.features[:, date]
    if ws.basis.b:
        m = np.hstack([m, _reinforcing_column(ws, date, date)[:, None]])
    return m


def _induct(paths, product, basis, ws, method, response_fn, after_fit, strict, memory_cap):
    if ws is None:
        ws = precompute(paths, product, basis, memory_cap)
    elif ws.basis != basis or ws.num_paths != paths.num_paths or ws.date != ws.num_dates - 1:
        raise ConfigError("workspace was built for different inputs or is already used")
    ws.cont[:] = 0.0
    n_dates = ws.num_dates
    coeffs = [None] * (n_dates - 1)
    diagnostics = []
    for j in range(n_dates - 1, 0, -1):
        y = response_fn(j)
        design = _design(ws, j - 1)
        try:
            step = solve_least_squares(design, y, strict=strict, date_index=j - 1)
        except NumericalError as exc:
            raise type(exc)(f"regression for date {j - 1} failed: {exc}") from exc
        ws.counter.mul_adds += design.shape[0] * design.shape[1] ** 2
        coeffs[j - 1] = step.gamma
        diag = {"date": j - 1, "residual_norm": step.residual_norm, "rank": step.rank,
                "condition": step.condition}
        diagnostics.append(diag)
        log.info("backward date %d: residual %.6g rank %d/%d condition %.3g", j - 1,
                 step.residual_norm, step.rank, design.shape[1], step.condition,
                 extra={"rrmc": diag})
        refresh_continuation_values(ws, step.gamma, j - 1)
        after_fit(j - 1)
    return ContinuationModel(basis, coeffs, product, method, paths.num_paths, paths.seed,
                             diagnostics[::-1], ws.counter)


def backward_induct_tvr(paths, product, basis, workspace=None, *, strict=False,
                        memory_cap=DEFAULT_MEMORY_CAP):
    """Tsitsiklis-van Roy induction: regress ``max(g_j, C_j)`` at date-``j`` states on date ``j-1``."""
    ws = workspace

    def response(j):
        return np.maximum(ws.exercise[:, j, j], ws.cont[:, j]) + ws.cashflows[:, j]

    if ws is None:
        ws = precompute(paths, product, basis, memory_cap)
    return _induct(paths, product, basis, ws, "tvr", response, lambda d: None, strict, memory_cap)


def backward_induct_ls(paths, product, basis, workspace=None, *, strict=False,
                       memory_cap=DEFAULT_MEMORY_CAP, ls_state=None):
    """Longstaff-Schwartz induction: regress the realised dummy cash flow instead.

    The dummy cash flow at a date becomes the exercise value where
    ``g >= C`` and otherwise carries forward the value realised later.
    Pass an :class:`LSWorkspace` as ``ls_state`` to inspect the final dummy
    cash flows.
    """
    ws = workspace if workspace is not None else precompute(paths, product, basis, memory_cap)
    last = ws.num_dates - 1
    accrued = np.cumsum(ws.cashflows, axis=1)
    state = ls_state if ls_state is not None else LSWorkspace(None, None)
    state.excess = ws.exercise[:, last, last].copy()
    state.accrued = accrued[:, last].copy()

    def response(j):
        return state.excess + ws.cashflows[:, j]

    def update(date):
        g = ws.exercise[:, date, date]
        stop = g >= ws.cont[:, date]
        state.excess = np.where(stop, g, state.excess + ws.cashflows[:, date + 1])
        state.accrued = accrued[:, date].copy()

    return _induct(paths, product, basis, ws, "ls", response, update, strict, memory_cap)


def train(paths, product, basis, method="tvr", **kwargs):
    """Dispatch to the TvR or LS induction by name."""
    if method == "tvr":
        return backward_induct_tvr(paths, product, basis, **kwargs)
    if method == "ls":
        return backward_induct_ls(paths, product, basis, **kwargs)
    raise ConfigError(f"unknown induction method {method!r}")
