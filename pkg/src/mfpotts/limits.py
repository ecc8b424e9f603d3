"""Limiting variational formulas: Curie-Weiss Potts, Ising LDP, bipartite Ising.

The Curie-Weiss functional on the simplex is

    f(theta) = beta/2 sum_r theta_r^2 + sum_r h_r theta_r - sum_r theta_r log theta_r

and the LDP rate function is ``I = -f``.  Stationary points satisfy
``theta = softmax(beta theta + h)``; they are located by damped fixed-point
iteration from several starts and polished with Newton steps restricted to
the simplex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import Stream

CLUSTER_RADIUS = 1e-6
VALUE_TOL = 1e-8
_DAMPING = 0.5
_FP_MAX_ITER = 20000


@dataclass
class MinimizerSet:
    """Deduplicated optimisers (sup-norm radius 1e-6) sharing the optimal rate."""

    points: list[np.ndarray]
    rate_min: float

    def __len__(self):
        return len(self.points)


@dataclass
class CWLimit:
    value: float
    argmax: MinimizerSet


def _as_fields(q: int, h) -> np.ndarray:
    h = np.zeros(q) if h is None else np.asarray(h, dtype=np.float64).reshape(-1)
    if q < 2:
        raise ValueError("q must be at least 2")
    if h.shape != (q,):
        raise ValueError(f"h must have length {q}")
    return h


def cw_functional(theta, beta: float, h) -> float:
    theta = np.asarray(theta, dtype=np.float64)
    safe = np.where(theta > 1e-300, theta, 1.0)
    return float(0.5 * beta * np.sum(theta ** 2) + np.dot(h, theta) - np.sum(theta * np.log(safe)))


def _softmax(x: np.ndarray) -> np.ndarray:
    e = np.exp(x - x.max())
    return e / e.sum()


def _newton_polish(theta: np.ndarray, beta: float, h: np.ndarray, steps: int = 50) -> np.ndarray:
    # Newton on the tangent space of the simplex; a step is kept only if it
    # stays interior and does not lower f.
    q = theta.size
    f = cw_functional(theta, beta, h)
    for _ in range(steps):
        if np.any(theta <= 0):
            break
        g = beta * theta + h - np.log(theta)
        kkt = np.zeros((q + 1, q + 1))
        kkt[:q, :q] = beta * np.eye(q) - np.diag(1.0 / theta)
        kkt[:q, q] = kkt[q, :q] = 1.0
        try:
            sol = np.linalg.solve(kkt, np.concatenate([-g, [0.0]]))
        except np.linalg.LinAlgError:
            break
        d = sol[:q]
        d -= d.mean()
        t = 1.0
        while t > 1e-12:
            cand = theta + t * d
            if np.all(cand > 0):
                cand = cand / cand.sum()
                fc = cw_functional(cand, beta, h)
                if fc >= f - 1e-15:
                    break
            t *= 0.5
        else:
            break
        if np.max(np.abs(cand - theta)) < 1e-16:
            theta = cand
            break
        theta, f = cand, fc
    return theta


def _stationary_from(theta: np.ndarray, beta: float, h: np.ndarray) -> np.ndarray:
    for _ in range(_FP_MAX_ITER):
        new = (1.0 - _DAMPING) * _softmax(beta * theta + h) + _DAMPING * theta
        if np.max(np.abs(new - theta)) < 1e-15:
            theta = new
            break
        theta = new
    return _newton_polish(theta, beta, h)


def _starts(q: int, seed: int = 0, n_random: int = 8) -> list[np.ndarray]:
    pts = [np.full(q, 1.0 / q)]
    for r in range(q):
        corner = np.full(q, 1e-3 / (q - 1))
        corner[r] = 1.0 - 1e-3
        pts.append(corner)
    u = Stream(seed).uniform(n_random * q).reshape(n_random, q)
    e = -np.log(1.0 - u)
    pts.extend(e / e.sum(axis=1, keepdims=True))
    return pts


def _maximise(q: int, beta: float, h: np.ndarray) -> tuple[float, list[np.ndarray]]:
    found = []
    for start in _starts(q):
        th = _stationary_from(start, beta, h)
        found.append((cw_functional(th, beta, h), th))
    best = max(v for v, _ in found)
    points: list[np.ndarray] = []
    for v, th in sorted(found, key=lambda t: -t[0]):
        if v < best - VALUE_TOL:
            continue
        if all(np.max(np.abs(th - p)) > CLUSTER_RADIUS for p in points):
            points.append(th)
    return best, points


def cw_limit(q: int, beta: float, h=None) -> CWLimit:
    """``sup`` over the simplex of the Curie-Weiss functional, with its maximisers."""
    h = _as_fields(q, h)
    if beta < 0:
        raise ValueError("cw_limit expects beta >= 0")
    value, points = _maximise(q, beta, h)
    return CWLimit(value, MinimizerSet(points, -value))


def ldp_minimizers(q: int, beta: float, h=None) -> MinimizerSet:
    """Minimisers of ``I(mu) = sum_r mu_r log mu_r - beta mu_r^2/2 - h_r mu_r``."""
    h = _as_fields(q, h)
    value, points = _maximise(q, beta, h)
    return MinimizerSet(points, -value)


def ldp_rate(q: int, beta: float, h, mu, rate_min: float | None = None) -> tuple[float, float]:
    """``(I(mu), I(mu) - min I)``."""
    h = _as_fields(q, h)
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (q,) or np.any(mu < 0) or abs(mu.sum() - 1.0) > 1e-12:
        raise ValueError("mu must be a probability vector of length q")
    rate = -cw_functional(mu, beta, h)
    if rate_min is None:
        rate_min = ldp_minimizers(q, beta, h).rate_min
    return rate, rate - rate_min


def _bisect(g, lo: float, hi: float, max_iter: int = 200) -> float:
    """Root of an increasing-through-zero ``g`` with ``g(lo) < 0 < g(hi)``."""
    glo = g(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return lo if abs(g(lo)) <= abs(g(hi)) else hi


def cw_magnetization(beta: float, B: float) -> float:
    """Root of ``m = tanh(beta m + B)``: the one with the sign of ``B``, or the
    positive one when ``B = 0`` and ``beta > 1``; ``0`` when ``B = 0`` and
    ``beta <= 1``."""
    if B == 0.0:
        if beta <= 1.0:
            return 0.0
        g = lambda m: m - math.tanh(beta * m)
        lo = 1e-15
        if not g(lo) < 0:
            return 0.0
        return _bisect(g, lo, 1.0)
    if B < 0:
        return -cw_magnetization(beta, -B)
    return _bisect(lambda m: m - math.tanh(beta * m + B), 0.0, 1.0)


def eta(beta: float, p: float, sigma: float) -> float:
    """``tanh(beta (1-p) tanh(beta p sigma))``."""
    return math.tanh(beta * (1.0 - p) * math.tanh(beta * p * sigma))


def binary_entropy(sigma: float) -> float:
    """``H(sigma)`` for a +-1 spin with mean ``sigma``."""
    out = 0.0
    for x in ((1.0 + sigma) / 2.0, (1.0 - sigma) / 2.0):
        if x > 0:
            out -= x * math.log(x)
    return out


def _check_p(p: float):
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")


def bipartite_sigma(beta: float, p: float) -> float:
    """Nonnegative fixed point of ``eta_{|beta|, p}``; zero when ``beta^2 p (1-p) <= 1``."""
    _check_p(p)
    b = abs(beta)
    if b * b * p * (1.0 - p) <= 1.0:
        return 0.0
    s = 1.0
    for _ in range(200):
        s = 0.5 * s + 0.5 * eta(b, p, s)
    g = lambda x: x - eta(b, p, x)
    lo = 1e-15
    if not g(lo) < 0:
        return 0.0
    return _bisect(g, lo, 1.0)


def bipartite_limit(beta: float, p: float, corrected: bool = False) -> float:
    """Limiting ``Phi_n / n`` for the Ising model on bi-regular bipartite graphs
    with side fraction ``p``, couplings ``beta / (c+d)`` and no field.

    The default evaluates the published closed form, whose fixed points use
    ``eta_{|beta|,p}`` and whose critical curve is ``beta^2 p (1-p) = 1``.
    For the Hamiltonian ``1/2 sum_ij A_ij J(y_i, y_j)`` the stationarity
    equations of the mean-field functional carry ``beta / 2`` instead (each
    unordered edge contributes ``beta/2 (1 + s s')``), so the fixed points
    and threshold are those of ``eta_{|beta|/2,p}``.  ``corrected=True`` uses
    that version, which is the one :func:`finite_bipartite_value` converges
    to; the two agree for ``beta^2 p (1-p) <= 1``.
    """
    _check_p(p)
    base = beta * p * (1.0 - p) / 2.0
    b = abs(beta) / 2.0 if corrected else abs(beta)
    if b * b * p * (1.0 - p) <= 1.0:
        return base + math.log(2.0)
    s1, s2 = bipartite_sigma(b, p), bipartite_sigma(b, 1.0 - p)
    return (base + abs(beta) * p * (1.0 - p) / 2.0 * s1 * s2
            + p * binary_entropy(s1) + (1.0 - p) * binary_entropy(s2))


def finite_bipartite_value(a: int, b: int, c: int, d: int, beta: float) -> float:
    """``sup M`` for the Ising model on a bi-regular bipartite graph ``G_{(a,b),(c,d)}``.

    Left vertices (``a`` of them) have degree ``c``, right ones degree ``d``;
    couplings are ``beta / (c + d)`` and there is no field.  In spin variables

        M = beta/2 * sum_{left i, right j} A_ij (1 + s_i s_j) + sum H(s_i),

    whose optimum is constant on each side: ``s_left = sigma_{|beta|/2, d/(c+d)}``
    and ``s_right = sigma_{|beta|/2, c/(c+d)}``, with opposite signs when
    ``beta < 0``.
    """
    if a * c != b * d:
        raise ValueError(f"bi-regularity requires a*c == b*d, got {a * c} != {b * d}")
    w = a * c / (c + d)
    base = 0.5 * beta * w
    pn = d / (c + d)
    half = abs(beta) / 2.0
    if half * half * pn * (1.0 - pn) <= 1.0:
        return base + (a + b) * math.log(2.0)
    sa, sb = bipartite_sigma(half, pn), bipartite_sigma(half, 1.0 - pn)
    return base + 0.5 * abs(beta) * w * sa * sb + a * binary_entropy(sa) + b * binary_entropy(sb)
