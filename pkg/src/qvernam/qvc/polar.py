"""Polar-structured subset parities and successive-cancellation decoding.

For a length ``M = 2**m`` bit vector ``v`` the transform ``u = v G`` with
``G`` the m-fold Kronecker power of [[1, 0], [1, 1]] gives
``u_i = XOR of v_j over all j whose binary digits include those of i``.
Announcing the parities ``u_i`` for the least reliable indices ``i`` lets a
successive-cancellation decoder recover ``v`` from a Bernoulli prior, which
is how the key-recycling hash step identifies the syndrome with close to
``N H(p)`` parities.
"""
from __future__ import annotations

from functools import lru_cache

import numba
import numpy as np

__all__ = ["superset_transform", "superset_members", "sc_decode", "prior_llr", "reliability_order", "scl_decode"]

_PAD_LLR = 1e6


def superset_transform(v: np.ndarray) -> np.ndarray:
    """u_i = XOR_{j superset of i} v_j (an involution over GF(2))."""
    u = np.asarray(v, dtype=np.uint8).copy()
    M = u.size
    h = 1
    while h < M:
        blk = u.reshape(-1, 2, h)
        blk[:, 0, :] ^= blk[:, 1, :]
        h *= 2
    return u


def superset_members(i: int, limit: int) -> np.ndarray:
    """Indices j < limit whose bits include those of i."""
    return _superset_cache(int(i), int(limit))


@lru_cache(maxsize=1 << 16)
def _superset_cache(i: int, limit: int) -> np.ndarray:
    j = np.arange(i, limit, dtype=np.int64)
    out = j[(j & i) == i]
    out.flags.writeable = False
    return out


@numba.njit(cache=True)
def _boxplus(a, b):
    s = 1.0
    if a < 0:
        s = -s
    if b < 0:
        s = -s
    aa = abs(a)
    bb = abs(b)
    m = aa if aa < bb else bb
    return s * m + np.log1p(np.exp(-abs(a + b))) - np.log1p(np.exp(-abs(a - b)))


@numba.njit(cache=True)
def _sc(llr, frozen, fval, u, leaf, start):
    n = llr.shape[0]
    out = np.empty(n, np.uint8)
    if n == 1:
        leaf[start] = llr[0]
        if frozen[start]:
            b = fval[start]
        else:
            b = 1 if llr[0] < 0 else 0
        u[start] = b
        out[0] = b
        return out
    h = n // 2
    la = np.empty(h)
    for j in range(h):
        la[j] = _boxplus(llr[j], llr[h + j])
    xa = _sc(la, frozen, fval, u, leaf, start)
    lb = np.empty(h)
    for j in range(h):
        lb[j] = llr[h + j] + (1 - 2 * xa[j]) * llr[j]
    xb = _sc(lb, frozen, fval, u, leaf, start + h)
    for j in range(h):
        out[j] = xa[j] ^ xb[j]
        out[h + j] = xb[j]
    return out


def sc_decode(llr: np.ndarray, frozen: np.ndarray, frozen_values: np.ndarray):
    """Successive-cancellation estimate of v given prior LLRs and frozen u bits.

    Returns ``(v_hat, u_hat, leaf_llr)``.
    """
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    M = llr.size
    u = np.zeros(M, np.uint8)
    leaf = np.zeros(M)
    v = _sc(llr, np.ascontiguousarray(frozen, dtype=np.bool_),
            np.ascontiguousarray(frozen_values, dtype=np.uint8), u, leaf, 0)
    return v, u, leaf


def prior_llr(M: int, n_real: int, p: float) -> np.ndarray:
    p = min(max(p, 1e-6), 0.5)
    llr = np.full(M, _PAD_LLR)
    llr[:n_real] = np.log((1 - p) / p)
    return llr


@lru_cache(maxsize=64)
def _order_cached(M: int, n_real: int, p_key: float, samples: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, M, n_real, int(p_key * 1e6)])))
    llr = prior_llr(M, n_real, p_key)
    frozen = np.ones(M, dtype=np.bool_)
    score = np.zeros(M)
    for _ in range(samples):
        v = np.zeros(M, np.uint8)
        v[:n_real] = rng.random(n_real) < p_key
        u = superset_transform(v)
        _, _, leaf = sc_decode(llr, frozen, u)
        # posterior probability of the wrong value under the genie path
        signed = leaf * (1 - 2 * u.astype(np.float64))
        score += 1.0 / (1.0 + np.exp(np.clip(signed, -700, 700)))
    score[n_real:] = -1.0  # pad-only indices are known to be zero
    order = np.argsort(-score, kind="stable")
    order.setflags(write=False)
    return order


def reliability_order(M: int, n_real: int, p: float, samples: int = 200, seed: int = 0) -> np.ndarray:
    """Indices sorted from least to most reliable under a genie-aided SC pass.

    Deterministic for given arguments (fixed internal design seed); the
    result is cached.
    """
    p_key = round(min(max(p, 1e-4), 0.5), 4)
    return _order_cached(int(M), int(n_real), p_key, int(samples), int(seed))


@numba.njit(cache=True)
def _penalty(llr, b):
    # -log P(bit = b) given LLR = log P(0)/P(1)
    t = -llr if b == 0 else llr
    if t > 30.0:
        return t
    return np.log1p(np.exp(t))


@numba.njit(cache=True)
def _scl(llr, frozen, fval, metric, start, act):
    # Live paths occupy rows 0..act[0]-1; the rest have infinite metric.
    L, n = llr.shape
    out = np.zeros((L, n), np.uint8)
    perm = np.arange(L)
    if n == 1:
        na = act[0]
        if frozen[start]:
            b = fval[start]
            for l in range(na):
                metric[l] += _penalty(llr[l, 0], b)
                out[l, 0] = b
            return out, perm
        cand = np.full(2 * L, np.inf)
        for l in range(na):
            cand[2 * l] = metric[l] + _penalty(llr[l, 0], 0)
            cand[2 * l + 1] = metric[l] + _penalty(llr[l, 0], 1)
        order = np.argsort(cand)
        for j in range(L):
            c = order[j]
            perm[j] = c // 2
            out[j, 0] = c % 2
            metric[j] = cand[c]
        act[0] = min(L, 2 * na)
        return out, perm
    h = n // 2
    na = act[0]
    la = np.empty((L, h))
    for l in range(na):
        for j in range(h):
            la[l, j] = _boxplus(llr[l, j], llr[l, h + j])
    xa, p1 = _scl(la, frozen, fval, metric, start, act)
    na = act[0]
    lb = np.empty((L, h))
    for l in range(na):
        src = p1[l]
        for j in range(h):
            lb[l, j] = llr[src, h + j] + (1 - 2 * xa[l, j]) * llr[src, j]
    xb, p2 = _scl(lb, frozen, fval, metric, start + h, act)
    na = act[0]
    for l in range(na):
        a = p2[l]
        for j in range(h):
            out[l, j] = xa[a, j] ^ xb[l, j]
            out[l, h + j] = xb[l, j]
        perm[l] = p1[a]
    return out, perm


def scl_decode(llr: np.ndarray, frozen: np.ndarray, frozen_values: np.ndarray, list_size: int = 16):
    """Successive-cancellation list decoding.

    Returns ``(candidates, metrics)`` with candidates sorted by increasing
    path metric (most likely first); dead paths are dropped.
    """
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    L = int(list_size)
    metric = np.full(L, np.inf)
    metric[0] = 0.0
    tiled = np.ascontiguousarray(np.broadcast_to(llr, (L, llr.size)))
    x, _ = _scl(tiled, np.ascontiguousarray(frozen, dtype=np.bool_),
                np.ascontiguousarray(frozen_values, dtype=np.uint8), metric, 0,
                np.ones(1, np.int64))
    keep = np.isfinite(metric)
    order = np.argsort(metric[keep], kind="stable")
    return x[keep][order], metric[keep][order]
