"""Independent reference computations used only by the tests.

Nothing here calls the package's kernels: energies are summed pair by pair,
fixed points use plain loops, and cut norms enumerate both sides.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def configs(n: int, q: int):
    """All colorings, site 0 fastest (the package's enumeration order)."""
    for tup in itertools.product(range(q), repeat=n):
        yield tup[::-1]


def brute_energy(A, J, h, y) -> float:
    n = len(y)
    e = 0.0
    for i in range(n):
        for j in range(n):
            e += 0.5 * A[i][j] * J[y[i]][y[j]]
        e += h[y[i]]
    return e


def brute_energies(A, J, h, q):
    return np.array([brute_energy(A, J, h, y) for y in configs(len(A), q)])


def brute_log_partition(A, J, h, q) -> float:
    H = brute_energies(A, J, h, q)
    top = H.max()
    return float(top + math.log(np.exp(H - top).sum()))


def bisect_root(g, lo, hi, iters=300):
    glo = g(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def magnetization(beta, B):
    """Distinguished root of m = tanh(beta m + B) by plain bisection."""
    if B == 0 and beta <= 1:
        return 0.0
    s = 1.0 if B >= 0 else -1.0
    g = lambda m: m - math.tanh(beta * m + abs(B))
    return s * bisect_root(g, 1e-12 if B == 0 else 0.0, 1.0)


def sigma_damped(beta, p, steps=200000):
    """Damped iteration s <- (s + eta(s)) / 2 from s = 1."""
    s = 1.0
    for _ in range(steps):
        new = 0.5 * s + 0.5 * math.tanh(beta * (1 - p) * math.tanh(beta * p * s))
        if new == s:
            break
        s = new
    return s


def H2(s):
    out = 0.0
    for x in ((1 + s) / 2, (1 - s) / 2):
        if x > 0:
            out -= x * math.log(x)
    return out


def bipartite_limit_formula(beta, p, s1, s2):
    if beta * beta * p * (1 - p) <= 1:
        return beta * p * (1 - p) / 2 + math.log(2)
    return (beta * p * (1 - p) / 2 + abs(beta) * p * (1 - p) / 2 * s1 * s2
            + p * H2(s1) + (1 - p) * H2(s2))


def _golden_max(f, a, b, iters=200):
    gr = (math.sqrt(5) - 1) / 2
    c, d = b - gr * (b - a), a + gr * (b - a)
    for _ in range(iters):
        if f(c) > f(d):
            b = d
        else:
            a = c
        c, d = b - gr * (b - a), a + gr * (b - a)
    x = 0.5 * (a + b)
    return f(x), x


def cw_f(theta, beta, h):
    theta = np.asarray(theta, dtype=float)
    ent = -sum(t * math.log(t) for t in theta if t > 0)
    return 0.5 * beta * float(np.sum(theta ** 2)) + float(np.dot(h, theta)) + ent


def cw_grid_q2(beta, h=(0.0, 0.0), step=1e-3):
    """1-d grid on theta_0 plus golden-section refinement around the best cell."""
    h = np.asarray(h, dtype=float)
    f = lambda t: cw_f([t, 1 - t], beta, h)
    grid = np.arange(0.0, 1.0 + step / 2, step)
    vals = [f(t) for t in grid]
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    v, t = _golden_max(f, lo, hi)
    return max(v, vals[i]), t


def cw_grid_q3(beta, h=(0.0, 0.0, 0.0), step=1e-3):
    """2-d simplex grid plus a few rounds of local refinement."""
    h = np.asarray(h, dtype=float)
    k = int(round(1 / step))
    a, b = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
    keep = a + b <= k
    t0, t1 = a[keep] / k, b[keep] / k
    t2 = 1 - t0 - t1
    T = np.stack([t0, t1, np.clip(t2, 0, 1)], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = -np.where(T > 0, T * np.log(np.where(T > 0, T, 1)), 0).sum(axis=1)
    vals = 0.5 * beta * (T ** 2).sum(axis=1) + T @ h + ent
    best = T[int(np.argmax(vals))]
    v = float(vals.max())
    r = step
    for _ in range(40):
        cand = []
        for d0 in (-r, 0, r):
            for d1 in (-r, 0, r):
                x = best + np.array([d0, d1, -d0 - d1])
                if np.all(x >= 0):
                    cand.append((cw_f(x, beta, h), tuple(x)))
        cv, cx = max(cand)
        if cv > v:
            v, best = cv, np.array(cx)
        else:
            r /= 2
    return v, best


def cut_norm_naive(M):
    M = np.asarray(M, dtype=float)
    k = M.shape[0]
    best = 0.0
    for S in itertools.product((0, 1), repeat=k):
        for T in itertools.product((0, 1), repeat=k):
            best = max(best, abs(np.array(S) @ M @ np.array(T)))
    return best


def inf_to_1_naive(M):
    M = np.asarray(M, dtype=float)
    k = M.shape[0]
    best = 0.0
    for f in itertools.product((-1, 1), repeat=k):
        for g in itertools.product((-1, 1), repeat=k):
            best = max(best, abs(np.array(f) @ M @ np.array(g)))
    return best
