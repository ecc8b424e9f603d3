"""Naive mean-field objective over product measures and its maximisation.

A product measure is an ``n x q`` row-stochastic array ``theta``.  The
objective is

    M(theta) = 1/2 sum_ij A_ij theta_i^T J theta_j + sum_i h . theta_i
               - sum_i sum_r theta_ir log theta_ir,

a lower bound on the exact log partition function whenever ``A`` has zero
diagonal.  It is maximised by Gauss-Seidel coordinate ascent: with the other
rows fixed, the best row ``i`` is ``softmax(J (A theta)_i + h)``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _backend
from .exact import DEFAULT_CAP, PottsModel, log_partition
from .rng import Stream

ENTROPY_FLOOR = 1e-300
CLUSTER_RADIUS = 1e-6


def check_product_measure(theta, n: int | None = None, q: int | None = None, tol: float = 1e-12) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim != 2 or (n is not None and theta.shape != (n, q)):
        raise ValueError(f"theta must have shape ({n}, {q}), got {theta.shape}")
    if np.any(theta < 0) or np.any(np.abs(theta.sum(axis=1) - 1.0) > tol):
        raise ValueError("theta rows must be probability vectors")
    return theta


def entropy_rows(theta: np.ndarray) -> np.ndarray:
    """``-sum_r theta_r log theta_r`` per row, with ``0 log 0 = 0``."""
    safe = np.where(theta > ENTROPY_FLOOR, theta, 1.0)
    return -(theta * np.log(safe)).sum(axis=-1)


def mf_objective(model: PottsModel, theta) -> float:
    theta = check_product_measure(theta, model.n, model.q)
    pair = 0.5 * np.sum(theta * (model.A.entries @ theta @ model.J))
    return float(pair + np.sum(theta @ model.h) + entropy_rows(theta).sum())


def _require_zero_diagonal(model: PottsModel):
    if not model.A.has_zero_diagonal:
        raise ValueError("mean-field updates require A with zero diagonal; use A.zero_diagonal()")


def mf_update_site(model: PottsModel, theta, i: int) -> np.ndarray:
    """Copy of ``theta`` with row ``i`` replaced by its exact coordinate maximiser."""
    _require_zero_diagonal(model)
    theta = check_product_measure(theta, model.n, model.q).copy()
    e = model.J @ (model.A.entries[i] @ theta) + model.h
    e = np.exp(e - e.max())
    theta[i] = e / e.sum()
    return theta


@dataclass(frozen=True)
class Schedule:
    max_sweeps: int = 500
    tol: float = 1e-10
    restarts: int | None = None  # default q + 3
    damping: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if self.restarts is not None and self.restarts < 1:
            raise ValueError("restarts must be positive")

    def n_starts(self, q: int) -> int:
        return q + 3 if self.restarts is None else self.restarts


@dataclass
class VariationalResult:
    value: float
    theta_star: np.ndarray
    converged: bool
    sweeps_used: int
    restarts_tried: int
    best_start: int = 0
    optima: list[tuple[float, np.ndarray]] = field(default_factory=list, repr=False)

    @property
    def n_optima(self) -> int:
        return len(self.optima)


def initial_points(n: int, q: int, n_starts: int, seed: int) -> list[np.ndarray]:
    """Uniform, then the q pure colors, then seeded random rows."""
    starts = [np.full((n, q), 1.0 / q)]
    for r in range(q):
        pure = np.zeros((n, q))
        pure[:, r] = 1.0
        starts.append(pure)
    starts = starts[:n_starts]
    stream = Stream(seed)
    while len(starts) < n_starts:
        e = -np.log(1.0 - stream.uniform(n * q)).reshape(n, q)
        starts.append(e / e.sum(axis=1, keepdims=True))
    return starts


def multistart_ascent(K: np.ndarray, J: np.ndarray, h: np.ndarray,
                      objective: Callable[[np.ndarray], float],
                      schedule: Schedule, backend: str | None = None,
                      workers: int = 1) -> VariationalResult:
    """Coordinate ascent ``theta_i <- softmax(J (K theta)_i + h)`` from every start.

    Shared by the matrix solver and the step-graphon solver (where ``K``
    carries the block masses).
    """
    kern = _backend.kernels if backend is None else _backend.get(backend)
    n, q = K.shape[0], J.shape[0]
    K = np.ascontiguousarray(K, dtype=np.float64)
    J = np.ascontiguousarray(J, dtype=np.float64)
    h = np.ascontiguousarray(h, dtype=np.float64)
    starts = initial_points(n, q, schedule.n_starts(q), schedule.seed)

    def run(theta0):
        theta = np.ascontiguousarray(theta0.copy())
        sweeps, ok = 0, False
        while sweeps < schedule.max_sweeps:
            change = kern.mf_sweep(K, J, h, theta, schedule.damping)
            sweeps += 1
            if change <= schedule.tol:
                ok = True
                break
        return objective(theta), theta, ok, sweeps

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(run, starts))
    else:
        runs = [run(s) for s in starts]

    best = 0
    for idx, r in enumerate(runs):
        if r[0] > runs[best][0]:
            best = idx
    optima: list[tuple[float, np.ndarray]] = []
    for idx in sorted(range(len(runs)), key=lambda t: (-runs[t][0], t)):
        val, th = runs[idx][0], runs[idx][1]
        if all(np.max(np.abs(th - o)) > CLUSTER_RADIUS for _, o in optima):
            optima.append((val, th))
    value, theta, ok, sweeps = runs[best]
    return VariationalResult(
        value=value,
        theta_star=theta,
        converged=ok,
        sweeps_used=sweeps,
        restarts_tried=len(runs),
        best_start=best,
        optima=optima,
    )


def mf_solve(model: PottsModel, schedule: Schedule | None = None, backend: str | None = None,
             workers: int = 1) -> VariationalResult:
    """Best product measure found by multistart coordinate ascent.

    ``value`` is a certified lower bound on the exact log partition
    function, not a certified supremum.
    """
    _require_zero_diagonal(model)
    schedule = schedule or Schedule()
    return multistart_ascent(model.A.entries, model.J, model.h,
                             lambda th: mf_objective(model, th), schedule, backend, workers)


@dataclass(frozen=True)
class Gap:
    phi: float
    sup_m: float
    gap_per_site: float


def mf_gap(model: PottsModel, schedule: Schedule | None = None, cap: int = DEFAULT_CAP,
           backend: str | None = None) -> Gap:
    phi = log_partition(model, cap=cap, backend=backend)
    sup_m = mf_solve(model, schedule, backend=backend).value
    return Gap(phi, sup_m, (phi - sup_m) / model.n)
