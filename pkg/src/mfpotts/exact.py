"""Brute-force Potts oracle for small systems.

Colors are 0-based throughout (``0 .. q-1``).  Configurations are indexed in
mixed radix with site 0 the fastest digit, enumerated in contiguous blocks,
and reduced with max-shifted log-sum-exp so that large couplings do not
overflow.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from ._pykernels import config_digits
from .errors import EnumerationCapError
from .matrix import CouplingMatrix

DEFAULT_CAP = 2 ** 24
BLOCK = 1 << 16


@dataclass(frozen=True, eq=False)
class PottsModel:
    """Couplings ``A`` (n x n), color interaction ``J`` (q x q) and fields ``h`` (q)."""

    A: CouplingMatrix
    q: int
    J: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q must be at least 2")
        J = np.array(self.J, dtype=np.float64)
        h = np.array(self.h, dtype=np.float64).reshape(-1)
        if J.shape != (self.q, self.q):
            raise ValueError(f"J must be {self.q} x {self.q}")
        if not np.array_equal(J, J.T):
            raise ValueError("J must be symmetric")
        if h.shape != (self.q,):
            raise ValueError(f"h must have length {self.q}")
        J.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "h", h)

    @classmethod
    def standard(cls, A: CouplingMatrix, q: int, beta: float, B: float = 0.0) -> "PottsModel":
        """``J = beta I_q`` and ``h = B e_0``."""
        h = np.zeros(q)
        h[0] = B
        return cls(A, q, beta * np.eye(q), h)

    @property
    def n(self) -> int:
        return self.A.n

    def with_fields(self, h) -> "PottsModel":
        return PottsModel(self.A, self.q, self.J, h)

    def permute_colors(self, perm) -> "PottsModel":
        """Model with color ``r`` renamed ``perm[r]``."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        return PottsModel(self.A, self.q, self.J[np.ix_(inv, inv)], self.h[inv])


def hamiltonian(model: PottsModel, y) -> float:
    """``(1/2) sum_{i,j} A_ij J[y_i, y_j] + sum_i h[y_i]``."""
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (model.n,) or y.min() < 0 or y.max() >= model.q:
        raise ValueError("y must be a length-n vector of colors in 0..q-1")
    pair = model.A.entries * model.J[np.ix_(y, y)]
    return float(0.5 * pair.sum() + model.h[y].sum())


def _check_cap(model: PottsModel, cap: int) -> int:
    total = model.q ** model.n
    if total > cap:
        raise EnumerationCapError(f"q^n = {model.q}^{model.n} = {total} exceeds the enumeration cap {cap}")
    return total


def _blocks(total: int) -> list[tuple[int, int]]:
    return [(lo, min(BLOCK, total - lo)) for lo in range(0, total, BLOCK)]


def _run_blocks(fn, blocks, workers: int):
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, blocks))
    return [fn(b) for b in blocks]


def _energy_fn(model: PottsModel, backend: str | None):
    k = _backend.kernels if backend is None else _backend.get(backend)
    A = np.ascontiguousarray(model.A.entries)
    J = np.ascontiguousarray(model.J)
    h = np.ascontiguousarray(model.h)
    return lambda start, count: k.energies(A, J, h, start, count)


def energies(model: PottsModel, cap: int = DEFAULT_CAP, backend: str | None = None) -> np.ndarray:
    """Hamiltonian of every configuration, in enumeration order."""
    total = _check_cap(model, cap)
    return _energy_fn(model, backend)(0, total)


def _lse_pair(a: tuple[float, float], b: tuple[float, float]) -> tuple[float, float]:
    # (max, sum of exp(x - max)) pairs
    if a[0] < b[0]:
        a, b = b, a
    if b[0] == -math.inf:
        return a
    return a[0], a[1] + b[1] * math.exp(b[0] - a[0])


def _tree_reduce(items, op):
    items = list(items)
    while len(items) > 1:
        nxt = [op(items[i], items[i + 1]) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def log_partition(model: PottsModel, cap: int = DEFAULT_CAP, workers: int = 1,
                  backend: str | None = None) -> float:
    """``log sum_y exp(H(y))`` by exhaustive enumeration."""
    total = _check_cap(model, cap)
    energy = _energy_fn(model, backend)

    def block(b):
        H = energy(*b)
        mx = float(H.max())
        return mx, float(np.exp(H - mx).sum())

    mx, s = _tree_reduce(_run_blocks(block, _blocks(total), workers), _lse_pair)
    return mx + math.log(s)


def conditional_distribution(model: PottsModel, y, i: int) -> np.ndarray:
    """Law of ``Y_i`` given the other sites: ``softmax_r(gamma_ir + h_r)``.

    ``gamma_ir = sum_s J_rs sum_j A_ij [y_j = s]``.  Requires a zero diagonal
    so that ``gamma_i`` does not depend on ``y_i``.
    """
    if not model.A.has_zero_diagonal:
        raise ValueError("conditional_distribution requires A with zero diagonal")
    y = np.asarray(y, dtype=np.int64)
    if not 0 <= i < model.n:
        raise IndexError(f"site {i} out of range")
    onehot = np.eye(model.q)[y]
    e = model.J @ (model.A.entries[i] @ onehot) + model.h
    e = np.exp(e - e.max())
    return e / e.sum()


@dataclass(frozen=True)
class EmpiricalLaw:
    """Exact law of the color-count vector ``(k_0, ..., k_{q-1})``."""

    n: int
    q: int
    counts: np.ndarray  # (K, q) int, lexicographically sorted rows
    probs: np.ndarray   # (K,)

    def prob(self, counts) -> float:
        hit = np.all(self.counts == np.asarray(counts), axis=1)
        return float(self.probs[hit].sum())

    def magnetization_law(self) -> tuple[np.ndarray, np.ndarray]:
        """For q = 2: support of ``(k_0 - k_1)/n`` (ascending) and its probabilities."""
        if self.q != 2:
            raise ValueError("magnetization law is defined for q = 2")
        m = (self.counts[:, 0] - self.counts[:, 1]) / self.n
        order = np.argsort(m)
        return m[order], self.probs[order]

    def mass_near(self, locations, delta: float) -> float:
        """``P(min_loc |m - loc| <= delta)`` for the q = 2 magnetization."""
        m, p = self.magnetization_law()
        locs = np.atleast_1d(np.asarray(locations, dtype=np.float64))
        near = np.min(np.abs(m[:, None] - locs[None, :]), axis=1) <= delta + 1e-12
        return float(p[near].sum())

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(x) for x in c): float(p) for c, p in zip(self.counts, self.probs)}


def empirical_law(model: PottsModel, cap: int = DEFAULT_CAP, workers: int = 1,
                  backend: str | None = None) -> EmpiricalLaw:
    total = _check_cap(model, cap)
    n, q = model.n, model.q
    energy = _energy_fn(model, backend)

    def block(b):
        H = energy(*b)
        y = config_digits(b[0], b[1], n, q)
        counts = np.stack([(y == r).sum(axis=1) for r in range(q)], axis=1)
        keys, inv = np.unique(counts, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        mx = np.full(len(keys), -np.inf)
        np.maximum.at(mx, inv, H)
        s = np.zeros(len(keys))
        np.add.at(s, inv, np.exp(H - mx[inv]))
        return {tuple(int(v) for v in key): (mx[g], s[g]) for g, key in enumerate(keys)}

    def merge(d1, d2):
        out = dict(d1)
        for key, val in d2.items():
            out[key] = _lse_pair(out[key], val) if key in out else val
        return out

    groups = _tree_reduce(_run_blocks(block, _blocks(total), workers), merge)
    keys = sorted(groups)
    logw = np.array([groups[k][0] + math.log(groups[k][1]) for k in keys])
    top = logw.max()
    w = np.exp(logw - top)
    return EmpiricalLaw(n, q, np.array(keys, dtype=np.int64), w / w.sum())
