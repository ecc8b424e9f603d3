"""NumPy implementations of the hot loops in ``_kernels.pyx``.

Same signatures and return conventions as the compiled module.  The
algorithms are vectorised rather than transliterated: energies are evaluated
directly in blocks, and the eigensolver uses a round-robin (parallel)
ordering of the Jacobi rotations so that each round is a handful of array
operations.
"""
from __future__ import annotations

import numpy as np

_ENERGY_BLOCK = 1 << 14
_SUBSET_BLOCK = 1 << 14


def config_digits(start: int, count: int, n: int, q: int) -> np.ndarray:
    """Colors of configurations ``start .. start+count-1``, site 0 fastest."""
    idx = np.arange(start, start + count, dtype=np.int64)
    out = np.empty((count, n), dtype=np.int64)
    for i in range(n):
        out[:, i] = idx % q
        idx //= q
    return out


def energies(A, J, h, start, count):
    A = np.asarray(A, dtype=np.float64)
    J = np.asarray(J, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    n, q = A.shape[0], J.shape[0]
    out = np.empty(count, dtype=np.float64)
    eye = np.eye(q)
    for lo in range(0, count, _ENERGY_BLOCK):
        m = min(_ENERGY_BLOCK, count - lo)
        y = config_digits(start + lo, m, n, q)
        X = eye[y]  # (m, n, q) one-hot
        AXJ = np.matmul(A, X) @ J
        out[lo:lo + m] = 0.5 * np.einsum("mir,mir->m", X, AXJ) + h[y].sum(axis=1)
    return out


def _round_robin(m: int):
    """Pairings for a round-robin tournament on ``m`` (even) players."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        rounds.append([(players[i], players[m - 1 - i]) for i in range(m // 2)])
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(A_in, rel_tol, max_sweeps):
    a = np.array(A_in, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    fro = np.sqrt(np.sum(a * a))
    m = n + (n % 2)
    rounds = []
    for pairs in _round_robin(m) if n > 1 else []:
        pr = [(min(p, r), max(p, r)) for p, r in pairs if p < n and r < n]
        if pr:
            P = np.array([x[0] for x in pr])
            Q = np.array([x[1] for x in pr])
            rounds.append((P, Q))

    offdiag = ~np.eye(n, dtype=bool)

    def off_norm():
        return np.sqrt(np.sum(a[offdiag] ** 2))

    sweep = 0
    converged = False
    while True:
        if off_norm() <= rel_tol * fro:
            converged = True
            break
        if sweep >= max_sweeps:
            break
        sweep += 1
        for P, Q in rounds:
            apq = a[P, Q]
            nz = apq != 0.0
            if not nz.any():
                continue
            P_, Q_, apq = P[nz], Q[nz], apq[nz]
            with np.errstate(over="ignore", divide="ignore"):
                theta = (a[Q_, Q_] - a[P_, P_]) / (2.0 * apq)
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            ap, aq = a[:, P_].copy(), a[:, Q_]
            a[:, P_] = c * ap - s * aq
            a[:, Q_] = s * ap + c * aq
            ap, aq = a[P_, :].copy(), a[Q_, :]
            a[P_, :] = c[:, None] * ap - s[:, None] * aq
            a[Q_, :] = s[:, None] * ap + c[:, None] * aq
            a[P_, Q_] = 0.0
            a[Q_, P_] = 0.0
            vp, vq = v[:, P_].copy(), v[:, Q_]
            v[:, P_] = c * vp - s * vq
            v[:, Q_] = s * vp + c * vq
    return np.diag(a).copy(), v, sweep, converged


def subset_scan(M):
    M = np.asarray(M, dtype=np.float64)
    k = M.shape[0]
    tot = M.sum(axis=0)
    shifts = np.arange(k, dtype=np.uint64)
    best = [(-np.inf, 0), (-np.inf, 0), (-np.inf, 0)]
    nsub = 1 << k
    for lo in range(0, nsub, _SUBSET_BLOCK):
        g = np.arange(lo, min(nsub, lo + _SUBSET_BLOCK), dtype=np.uint64)
        gray = g ^ (g >> np.uint64(1))
        bits = ((gray[:, None] >> shifts) & np.uint64(1)).astype(np.float64)
        V = bits @ M
        pos = np.where(V > 0.0, V, 0.0).sum(axis=1)
        neg = np.where(V > 0.0, 0.0, -V).sum(axis=1)
        scores = (np.maximum(pos, neg), np.abs(2.0 * V - tot).sum(axis=1), pos + neg)
        for t, sc in enumerate(scores):
            i = int(np.argmax(sc))
            if sc[i] > best[t][0]:
                best[t] = (sc[i], int(gray[i]))
    return best[0][1], best[1][1], best[2][1]


def mf_sweep(K, J, h, theta, damping):
    worst = 0.0
    for i in range(K.shape[0]):
        e = h + J @ (K[i] @ theta)
        e = np.exp(e - e.max())
        new = (1.0 - damping) * (e / e.sum()) + damping * theta[i]
        worst = max(worst, float(np.max(np.abs(new - theta[i]))))
        theta[i] = new
    return worst
