"""Hot inner loops, each in two flavours.

Every kernel exists as a numba-compiled loop (``*_jit``) and as a
vectorised numpy version (``*_np``).  The public name (no suffix) points at
the jitted one unless numba is missing or ``SFCGAME_PURE_NUMPY`` is set to
a non-empty value other than ``0``.  The sweep twins accumulate units in
the same order and agree bit for bit; the follower-gain twins may differ in
the last few ulps because numpy's vectorised ``log1p`` is not numba's.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

PURE_NUMPY = os.environ.get("SFCGAME_PURE_NUMPY", "") not in ("", "0")
HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not PURE_NUMPY


def _njit(func):
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


# -- price sweep -------------------------------------------------------------

@_njit
def sweep_jit(prices, k, e_gen, e_min, e_req, p_sell, c_init):
    """Evaluate the leader cost at each price; return (costs, best index).

    The best index follows a ``<=`` running-minimum update started at
    ``c_init``, so ties go to the largest price.  -1 means no price reached
    ``c_init``.
    """
    n_p = prices.shape[0]
    n_u = k.shape[0]
    costs = np.empty(n_p)
    best = c_init
    best_i = -1
    for i in range(n_p):
        p = prices[i]
        s = 0.0
        for j in range(n_u):
            e = k[j] / p - 1.0
            if e < e_min[j]:
                e = e_min[j]
            if e > e_gen[j]:
                e = e_gen[j]
            s += e_gen[j] - e
        bought = s if s < e_req else e_req
        c = p_sell * e_req - (p_sell - p) * bought
        costs[i] = c
        if c <= best:
            best = c
            best_i = i
    return costs, best_i


def sweep_np(prices, k, e_gen, e_min, e_req, p_sell, c_init):
    prices = np.asarray(prices, dtype=np.float64)
    s = np.zeros_like(prices)
    for j in range(len(k)):
        e = np.minimum(np.maximum(k[j] / prices - 1.0, e_min[j]), e_gen[j])
        s += e_gen[j] - e
    bought = np.minimum(s, e_req)
    costs = p_sell * e_req - (p_sell - prices) * bought
    if costs.size == 0:
        return costs, -1
    m = costs.min()
    if not m <= c_init:
        return costs, -1
    best_i = int(np.flatnonzero(costs == m)[-1])
    return costs, best_i


# -- follower deviation check -----------------------------------------------

@_njit
def follower_gain_jit(k, e_gen, e_min, e_star, price, n_points):
    """Largest utility gain any unit gets by moving off ``e_star``.

    Each unit is probed on ``n_points`` evenly spaced consumptions over its
    own ``[e_min, e_gen]``.  Returns (gain per unit, argmax energy per unit).
    """
    n_u = k.shape[0]
    gains = np.empty(n_u)
    where = np.empty(n_u)
    for j in range(n_u):
        lo = e_min[j]
        hi = e_gen[j]
        u_star = k[j] * np.log1p(e_star[j]) + price * (hi - e_star[j])
        g = -np.inf
        at = lo
        for i in range(n_points):
            if n_points == 1:
                e = lo
            else:
                e = lo + (hi - lo) * (i / (n_points - 1))
            u = k[j] * np.log1p(e) + price * (hi - e)
            if u - u_star > g:
                g = u - u_star
                at = e
        gains[j] = g
        where[j] = at
    return gains, where


def follower_gain_np(k, e_gen, e_min, e_star, price, n_points):
    k = np.asarray(k, dtype=np.float64)
    e_gen = np.asarray(e_gen, dtype=np.float64)
    e_min = np.asarray(e_min, dtype=np.float64)
    e_star = np.asarray(e_star, dtype=np.float64)
    if n_points == 1:
        frac = np.zeros(1)
    else:
        frac = np.arange(n_points) / (n_points - 1)
    e = e_min[:, None] + (e_gen - e_min)[:, None] * frac[None, :]
    u = k[:, None] * np.log1p(e) + price * (e_gen[:, None] - e)
    u_star = k * np.log1p(e_star) + price * (e_gen - e_star)
    diff = u - u_star[:, None]
    idx = np.argmax(diff, axis=1)
    rows = np.arange(len(k))
    return diff[rows, idx], e[rows, idx]


if USE_NUMBA:
    sweep = sweep_jit
    follower_gain = follower_gain_jit
else:
    sweep = sweep_np
    follower_gain = follower_gain_np


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
