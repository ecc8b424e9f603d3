"""Step graphons: block-constant symmetric kernels on the unit square.

A step graphon with ``k`` blocks of masses ``m_1..m_k`` and values ``W_ij``
stands for the kernel equal to ``W_ij`` on ``P_i x P_j``.  A coupling matrix
becomes one with ``k = n`` and equal masses ``1/n``; scaled by ``n`` its
mean-field functional per site coincides with the graphon functional ``F``.

Cut norms are computed exactly by scanning block subsets: for a fixed side
``S`` the best ``T`` collects the columns of one sign, so only ``2^k`` sets
need visiting.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend
from .errors import EnumerationCapError, MatrixFormatError
from .matrix import CouplingMatrix, _parse_float, symmetrize
from .meanfield import Schedule, VariationalResult, entropy_rows, multistart_ascent

CUT_CAP = 20
DIST_CAP = 8
MASS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class StepGraphon:
    values: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        m = np.array(self.masses, dtype=np.float64, copy=True).reshape(-1)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValueError(f"values must be a non-empty square array, got {v.shape}")
        if m.shape != (v.shape[0],):
            raise ValueError("need one mass per block")
        if not np.array_equal(v, v.T):
            raise ValueError("graphon values must be symmetric")
        if np.any(m <= 0) or abs(m.sum() - 1.0) > MASS_TOL:
            raise ValueError("masses must be positive and sum to 1")
        v.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "masses", m)

    @property
    def k(self) -> int:
        return self.values.shape[0]

    def weighted(self) -> np.ndarray:
        """``m_i m_j W_ij``: the integral of the kernel over each block pair."""
        return self.masses[:, None] * self.values * self.masses[None, :]

    def permuted(self, perm) -> "StepGraphon":
        perm = np.asarray(perm)
        return StepGraphon(self.values[np.ix_(perm, perm)], self.masses[perm])

    def scaled(self, c: float) -> "StepGraphon":
        return StepGraphon(c * self.values, self.masses)


def check_partition(rho, k: int, q: int | None = None, tol: float = 1e-12) -> np.ndarray:
    """Validate a block-constant fractional partition (``k x q``, rows on the simplex)."""
    rho = np.asarray(rho, dtype=np.float64)
    if rho.ndim != 2 or rho.shape[0] != k or (q is not None and rho.shape[1] != q):
        raise ValueError(f"rho must have {k} rows" + (f" and {q} columns" if q else ""))
    if np.any(rho < 0) or np.any(np.abs(rho.sum(axis=1) - 1.0) > tol):
        raise ValueError("rho rows must be probability vectors")
    return rho


def step_from_matrix(A: CouplingMatrix | np.ndarray, multiply_by_n: bool = False) -> StepGraphon:
    a = A.entries if isinstance(A, CouplingMatrix) else np.asarray(A, dtype=np.float64)
    n = a.shape[0]
    return StepGraphon(a * n if multiply_by_n else a, np.full(n, 1.0 / n))


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CutNorms:
    cut: float
    inf_to_1: float
    cut_sets: tuple[tuple[int, ...], tuple[int, ...]]
    sign_vector: tuple[int, ...]


def _bits(mask: int, k: int) -> np.ndarray:
    return np.array([(mask >> i) & 1 for i in range(k)], dtype=bool)


def cut_norm_exact(W: StepGraphon, backend: str | None = None) -> CutNorms:
    """``sup_{S,T} |int_{SxT} W|`` and ``sup_{f,g in {-1,1}} |int W f g|``, exactly.

    The scan returns the optimal masks; the reported values are re-evaluated
    from those masks so that both backends print the same digits.
    """
    k = W.k
    if k > CUT_CAP:
        raise EnumerationCapError(f"exact cut norm needs k <= {CUT_CAP}, got {k}")
    M = np.ascontiguousarray(W.weighted())
    kern = _backend.kernels if backend is None else _backend.get(backend)
    cut_mask, inf_mask, _ = kern.subset_scan(M)

    S = _bits(cut_mask, k)
    v = M[S].sum(axis=0)
    pos = float(np.where(v > 0.0, v, 0.0).sum())
    neg = float(np.where(v > 0.0, 0.0, -v).sum())
    T = v > 0.0 if pos >= neg else v < 0.0
    cut = max(pos, neg)

    # f and -f give the same value; report the representative with f_{k-1} = -1
    if (inf_mask >> (k - 1)) & 1:
        inf_mask ^= (1 << k) - 1
    F = _bits(inf_mask, k)
    u = M[F].sum(axis=0) - M[~F].sum(axis=0)
    inf_to_1 = float(np.abs(u).sum())
    return CutNorms(
        cut=cut,
        inf_to_1=inf_to_1,
        cut_sets=(tuple(int(i) for i in np.flatnonzero(S)), tuple(int(j) for j in np.flatnonzero(T))),
        sign_vector=tuple(1 if f else -1 for f in F),
    )


def cut_distance_blocks(W1: StepGraphon, W2: StepGraphon, backend: str | None = None) -> tuple[float, tuple[int, ...]]:
    """``min_pi ||W1 - W2^pi||_cut`` over block permutations preserving the masses.

    An upper bound on the cut distance (which allows arbitrary measure
    preserving rearrangements).  Returns the distance and the best ``pi``.
    """
    if W1.k != W2.k:
        raise ValueError("graphons must have the same block count")
    if not np.allclose(W1.masses, W2.masses, rtol=0.0, atol=MASS_TOL):
        raise ValueError("graphons must have the same block masses")
    k = W1.k
    if k > DIST_CAP:
        raise EnumerationCapError(f"cut distance needs k <= {DIST_CAP}, got {k}")
    best, arg = math.inf, tuple(range(k))
    for perm in itertools.permutations(range(k)):
        p = np.array(perm)
        # only relabelings that keep every block's mass are admissible
        if not np.array_equal(W1.masses[p], W1.masses):
            continue
        diff = StepGraphon(W1.values - W2.values[np.ix_(p, p)], W1.masses)
        d = cut_norm_exact(diff, backend).cut
        if d < best:
            best, arg = d, perm
    return best, arg


# ---------------------------------------------------------------------------
# the functional F(W, rho)
# ---------------------------------------------------------------------------

def f_functional(W: StepGraphon, rho, J, h) -> float:
    """``1/2 sum_rs J_rs int W rho_r rho_s + sum_r h_r int rho_r - int sum_r rho_r log rho_r``."""
    J = np.asarray(J, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    rho = check_partition(rho, W.k, J.shape[0])
    m = W.masses
    pair = 0.5 * np.sum(rho * (W.weighted() @ rho @ J))
    return float(pair + np.dot(m, rho @ h) + np.dot(m, entropy_rows(rho)))


def f_sup(W: StepGraphon, J, h, schedule: Schedule | None = None, backend: str | None = None,
          workers: int = 1) -> VariationalResult:
    """Maximise ``F(W, .)`` over block-constant fractional partitions.

    Block ``i`` is updated to ``softmax(J sum_j W_ij m_j rho_j + h)``.  For
    off-diagonal dependence this is the exact block maximiser; a nonzero
    ``W_ii`` makes it a fixed-point step instead, so ascent is no longer
    guaranteed to be monotone there.
    """
    J = np.asarray(J, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    if J.shape != (h.size, h.size) or not np.array_equal(J, J.T):
        raise ValueError("J must be a symmetric q x q array matching h")
    K = W.values * W.masses[None, :]
    return multistart_ascent(K, J, h, lambda r: f_functional(W, r, J, h),
                             schedule or Schedule(), backend, workers)


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def parse_graphon(text: str) -> StepGraphon:
    """``k``, then ``k`` masses, then ``k`` rows of ``k`` values."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise MatrixFormatError("empty graphon file")
    try:
        k = int(lines[0])
    except ValueError:
        raise MatrixFormatError(f"bad header line {lines[0]!r}") from None
    if k < 1:
        raise MatrixFormatError("block count must be positive")
    if len(lines) != k + 2:
        raise MatrixFormatError(f"expected {k + 1} lines after the header, found {len(lines) - 1}")
    masses = [_parse_float(t, "masses") for t in lines[1].split()]
    if len(masses) != k:
        raise MatrixFormatError(f"expected {k} masses, found {len(masses)}")
    vals = np.zeros((k, k))
    for r, ln in enumerate(lines[2:]):
        tok = ln.split()
        if len(tok) != k:
            raise MatrixFormatError(f"row {r + 1}: expected {k} values, found {len(tok)}")
        vals[r] = [_parse_float(t, f"row {r + 1}") for t in tok]
    m = np.array(masses)
    if np.any(m <= 0) or abs(m.sum() - 1.0) > MASS_TOL:
        raise MatrixFormatError("masses must be positive and sum to 1 within 1e-12")
    return StepGraphon(symmetrize(vals), m)


def load_graphon(path) -> StepGraphon:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MatrixFormatError(f"cannot read {path}: {exc}") from exc
    return parse_graphon(text)


def format_graphon(W: StepGraphon) -> str:
    rows = [str(W.k), " ".join(repr(float(x)) for x in W.masses)]
    rows += [" ".join(repr(float(x)) for x in row) for row in W.values]
    return "\n".join(rows) + "\n"


def save_graphon(W: StepGraphon, path) -> None:
    Path(path).write_text(format_graphon(W))
