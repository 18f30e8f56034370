"""Compiled per-state kernels for nested simulation.

The vectorised numpy code in :mod:`rrmc.basis`, :mod:`rrmc.products` and
:mod:`rrmc.bounds` is the reference; these scalar versions exist because the
dual bound evaluates the stopping policy on hundreds of millions of inner
states one at a time.  Tests check the two agree.
"""
import math

import numba
import numpy as np

from . import rng
from .basis import PAYOFF, QUADRATIC, SWAP_LINEAR, SWAP_QUADRATIC
from .products import MAX_CALL, PUT, SWAP

# Layout of the packed product parameter vector.
STRIKE, N1, N2, S1, S2, S3, NOTIONAL = range(7)


def pack_product(product, dim):
    """Flatten a product spec into ``(code, params, barrier, disc, accrual, dts)`` arrays."""
    grid = product.grid
    times = grid.times
    dts = grid.steps
    params = np.zeros(7)
    barrier = np.zeros(dim)
    if product.code in (MAX_CALL, PUT):
        params[STRIKE] = product.strike
    else:
        params[N1], params[N2] = product.n1, product.n2
        params[S1], params[S2], params[S3] = product.s1, product.s2, product.s3
        params[NOTIONAL] = product.notional
        barrier[:] = (1.0 - product.quantile) * np.asarray(product.spot0)
    disc = np.exp(-product.rate * times)
    accrual = np.expm1(product.rate * dts)
    return product.code, params, barrier, disc, accrual, dts


@numba.njit(cache=True)
def exercise_value(code, x, date, params, disc):
    if code == MAX_CALL:
        m = x[0]
        for i in range(1, x.shape[0]):
            if x[i] > m:
                m = x[i]
        return disc[date] * max(m - params[STRIKE], 0.0)
    if code == PUT:
        return disc[date] * max(params[STRIKE] - x[0], 0.0)
    return 0.0


@numba.njit(cache=True)
def net_coupon(x, date, params, barrier, disc, accrual, dts):
    count = 0
    for i in range(x.shape[0]):
        if x[i] <= barrier[i]:
            count += 1
    if count <= params[N1]:
        a = params[S1]
    elif count <= params[N2]:
        a = params[S2]
    else:
        a = params[S3]
    return params[NOTIONAL] * disc[date] * (accrual[date] - a * dts[date])


@numba.njit(cache=True)
def cashflow(code, x, date, params, barrier, disc, accrual, dts):
    if code == SWAP:
        return net_coupon(x, date, params, barrier, disc, accrual, dts)
    return 0.0


@numba.njit(cache=True)
def basis_scalar(code, x, date, params, barrier, disc, accrual, dts):
    if code == SWAP:
        return net_coupon(x, date, params, barrier, disc, accrual, dts)
    if code == MAX_CALL:
        m = x[0]
        for i in range(1, x.shape[0]):
            if x[i] > m:
                m = x[i]
        return max(m - params[STRIKE], 0.0)
    return max(params[STRIKE] - x[0], 0.0)


@numba.njit(cache=True)
def fixed_features(family, ordered, x, scalar, out, ybuf):
    d = x.shape[0]
    for i in range(d):
        ybuf[i] = x[i]
    swap = family == SWAP_LINEAR or family == SWAP_QUADRATIC
    if ordered or swap:
        ybuf.sort()
    k = 0
    out[k] = 1.0
    k += 1
    if swap:
        out[k] = scalar
        k += 1
    for i in range(d):
        out[k] = ybuf[i]
        k += 1
    if family == QUADRATIC or family == SWAP_QUADRATIC:
        for i in range(d):
            for j in range(i, d):
                out[k] = ybuf[i] * ybuf[j]
                k += 1
    if family == PAYOFF:
        out[k] = scalar
        k += 1
    return k


@numba.njit(cache=True)
def continuation(x, date, coef, family, ordered, n_fixed, reinforced, indicator,
                 code, params, barrier, disc, accrual, dts, feat, ybuf):
    """Excess continuation value at state ``x`` on ``date`` via the backward recursion."""
    n_dates = coef.shape[0]
    if date >= n_dates - 1:
        return 0.0
    scalar = basis_scalar(code, x, date, params, barrier, disc, accrual, dts)
    fixed_features(family, ordered, x, scalar, feat, ybuf)
    c = 0.0
    for l in range(n_dates - 1, date, -1):
        row = coef[l - 1]
        s = 0.0
        for k in range(n_fixed):
            s += row[k] * feat[k]
        if reinforced:
            g = exercise_value(code, x, l, params, disc)
            if indicator:
                nu = 1.0 if g >= c else 0.0
            else:
                nu = g if g >= c else c
            s += row[n_fixed] * nu
        c = s
    return c


@numba.njit(cache=True)
def _inner_path(x0, start, accrued, outer, inner, key, tag, drift, diffusion, chol,
                coef, family, ordered, n_fixed, reinforced, indicator,
                code, params, barrier, disc, accrual, dts, logx, x, xi, feat, ybuf):
    """Follow the stopping policy from ``x0`` at date ``start``; return the realised reward."""
    n_dates = coef.shape[0]
    d = x0.shape[0]
    for a in range(d):
        logx[a] = math.log(x0[a])
    total = accrued
    for l in range(start + 1, n_dates):
        rng.fill_normals(xi, l, np.uint64(inner), np.uint64(outer), tag, key)
        for a in range(d):
            z = 0.0
            for m in range(a + 1):
                z += chol[a, m] * xi[m]
            logx[a] += drift[l, a] + diffusion[l, a] * z
            x[a] = math.exp(logx[a])
        total += cashflow(code, x, l, params, barrier, disc, accrual, dts)
        g = exercise_value(code, x, l, params, disc)
        if l == n_dates - 1:
            return g + total
        c = continuation(x, l, coef, family, ordered, n_fixed, reinforced, indicator,
                         code, params, barrier, disc, accrual, dts, feat, ybuf)
        if g >= c:
            return g + total
    return total


@numba.njit(cache=True, parallel=True)
def dual_samples(outer_states, inner_count, key, drift, diffusion, chol,
                 coef, family, ordered, n_fixed, reinforced, indicator,
                 code, params, barrier, disc, accrual, dts):
    """Per outer path ``max_j (g_j - M_j)`` for the policy-value martingale.

    ``M`` is zero at the first exercise date and moves by
    ``L_j - E_{j-1}[L_j]`` afterwards, where ``L_j`` is the value of following
    the policy from date ``j``: the reward if the policy stops there, else the
    inner-sample continuation estimate.  ``E_{j-1}[L_j]`` is the inner estimate
    started from the date ``j-1`` state.
    """
    n_outer, n_dates, d = outer_states.shape
    width = coef.shape[1]
    out = np.empty(n_outer)
    for o in numba.prange(n_outer):
        logx = np.empty(d)
        x = np.empty(d)
        xi = np.empty(d)
        ybuf = np.empty(d)
        feat = np.empty(width + 1)
        accrued = 0.0
        mart = 0.0
        best = -np.inf
        q_prev = 0.0
        for j in range(n_dates):
            z = outer_states[o, j]
            accrued += cashflow(code, z, j, params, barrier, disc, accrual, dts)
            g_ex = exercise_value(code, z, j, params, disc)
            reward = g_ex + accrued
            q = 0.0
            if j == n_dates - 1:
                value = reward
            else:
                tag = np.uint64((1 << 32) | (j + 1))
                acc = 0.0
                for k in range(inner_count):
                    acc += _inner_path(z, j, accrued, o, k, key, tag, drift, diffusion, chol,
                                       coef, family, ordered, n_fixed, reinforced, indicator,
                                       code, params, barrier, disc, accrual, dts,
                                       logx, x, xi, feat, ybuf)
                q = acc / inner_count
                c = continuation(z, j, coef, family, ordered, n_fixed, reinforced, indicator,
                                 code, params, barrier, disc, accrual, dts, feat, ybuf)
                value = reward if g_ex >= c else q
            if j > 0:
                mart += value - q_prev
            if reward - mart > best:
                best = reward - mart
            q_prev = q
        out[o] = best
    return out


@numba.njit(cache=True)
def continuation_batch(states, date, coef, family, ordered, n_fixed, reinforced, indicator,
                       code, params, barrier, disc, accrual, dts):
    """Kernel continuation at many states; used to cross-check the numpy path."""
    n, d = states.shape
    out = np.empty(n)
    feat = np.empty(coef.shape[1] + 1)
    ybuf = np.empty(d)
    for i in range(n):
        out[i] = continuation(states[i], date, coef, family, ordered, n_fixed, reinforced,
                              indicator, code, params, barrier, disc, accrual, dts, feat, ybuf)
    return out
