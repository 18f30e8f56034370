"""Least squares for one backward step.

The coefficients minimise ``||response - design @ gamma||_2``.  The solve uses a
column-pivoted Householder QR rather than inverting the Gram matrix, so nearly
collinear bases (payoff columns almost spanned by linear terms, order
statistics of highly correlated assets) degrade gracefully: columns whose
pivot falls below ``rcond * |R_00|`` get a zero coefficient.
"""
from dataclasses import dataclass
import logging
import warnings

import numpy as np
import scipy.linalg

from .errors import CollinearityError, NumericalError, UnderdeterminedError

log = logging.getLogger(__name__)

RCOND = 1e-12


@dataclass(frozen=True, eq=False)
class StepCoefficients:
    """Coefficients of one regression; fixed-basis entries first, reinforcing last."""

    gamma: np.ndarray
    date_index: int = None
    rank: int = None
    dropped: tuple = ()
    residual_norm: float = float("nan")
    condition: float = float("nan")


def solve_least_squares(design, response, *, strict=False, rcond=RCOND, date_index=None):
    """Minimise the 2-norm residual of ``design @ gamma - response``.

    With ``strict=True`` a rank-deficient design raises
    :class:`CollinearityError` naming the first dependent column; otherwise
    those columns get zero coefficients and a warning is emitted.
    """
    m = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if m.ndim != 2 or y.shape != (m.shape[0],):
        raise ValueError(f"design {m.shape} and response {y.shape} do not conform")
    n, k = m.shape
    if n < k:
        raise UnderdeterminedError(f"{n} rows cannot determine {k} coefficients")
    if not (np.all(np.isfinite(m)) and np.all(np.isfinite(y))):
        raise NumericalError("design or response contains non-finite entries")

    gamma = np.zeros(k)
    norms = np.linalg.norm(m, axis=0)
    if not norms.any():
        if strict:
            raise CollinearityError("design column 0 is identically zero", column=0)
        _warn_dropped(tuple(range(k)), date_index)
        return StepCoefficients(gamma, date_index, 0, tuple(range(k)), float(np.linalg.norm(y)))

    qty, r, perm = scipy.linalg.qr_multiply(m, y, mode="right", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.count_nonzero(diag > rcond * diag[0]))
    dropped = tuple(int(c) for c in perm[rank:])
    if dropped:
        if strict:
            c = dropped[0]
            kind = "identically zero" if norms[c] == 0 else "numerically dependent on earlier columns"
            raise CollinearityError(f"design column {c} is {kind}", column=c)
        _warn_dropped(dropped, date_index)
    z = scipy.linalg.solve_triangular(r[:rank, :rank], qty[:rank])
    gamma[perm[:rank]] = z
    resid = y - m @ gamma
    return StepCoefficients(gamma, date_index, rank, dropped, float(np.linalg.norm(resid)),
                            float(diag[0] / diag[rank - 1]))


def _warn_dropped(columns, date_index):
    where = "" if date_index is None else f" at date {date_index}"
    msg = f"rank-deficient design{where}: zero coefficients for columns {list(columns)}"
    log.warning(msg)
    warnings.warn(msg, RuntimeWarning, stacklevel=3)


def orthogonality_check(design, response, coeffs):
    """Largest ``|M_k . res| / (||M_k|| ||res||)`` over design columns ``k``."""
    m = np.asarray(design, dtype=float)
    gamma = coeffs.gamma if isinstance(coeffs, StepCoefficients) else np.asarray(coeffs)
    res = np.asarray(response, dtype=float) - m @ gamma
    denom = np.linalg.norm(m, axis=0) * np.linalg.norm(res) + np.finfo(float).tiny
    return float(np.max(np.abs(m.T @ res) / denom))
