"""Coupling matrices: ensembles, file I/O and mean-field diagnostics.

Graph ensembles are scaled so that the average row sum is (close to) one:
simple graphs by ``n / (2|E|)``, ``d``-regular graphs by ``1/d``,
Erdos-Renyi graphs by ``1/(n p)``, bi-regular bipartite graphs by
``1/(c + d)``.  SK couplings are ``Z_ij / sqrt(n)`` and Hopfield couplings
``(1/n) sum_k eta_ik eta_jk``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import _backend
from .errors import ConvergenceError, MatrixFormatError
from .rng import Stream

SYMMETRY_TOL = 1e-12
EIG_REL_TOL = 1e-12
EIG_MAX_SWEEPS = 100


class Scaling(str, enum.Enum):
    RAW = "raw"
    PER_EDGE = "per_edge"
    PER_DEGREE = "per_degree"
    BIPARTITE = "bipartite"
    SK = "sk"
    HOPFIELD = "hopfield"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Symmetric real interaction matrix with a record of how it was scaled."""

    entries: np.ndarray
    scaling_tag: Scaling = Scaling.RAW
    label: str = ""

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.float64, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"coupling matrix must be square and non-empty, got shape {a.shape}")
        if not np.array_equal(a, a.T):
            raise ValueError("coupling matrix is not exactly symmetric; use symmetrize() first")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "scaling_tag", Scaling(self.scaling_tag))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def has_zero_diagonal(self) -> bool:
        return not np.any(np.diag(self.entries))

    def zero_diagonal(self) -> tuple["CouplingMatrix", float]:
        """Copy with the diagonal removed, and the removed mass ``sum |A_ii|``."""
        a = self.entries.copy()
        dropped = float(np.abs(np.diag(a)).sum())
        np.fill_diagonal(a, 0.0)
        return CouplingMatrix(a, self.scaling_tag, self.label), dropped


def symmetrize(entries, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Average ``A`` with its transpose after checking asymmetry is within ``tol``."""
    a = np.asarray(entries, dtype=np.float64)
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    if a.size and float(np.max(np.abs(a - a.T))) > tol * scale:
        raise MatrixFormatError("matrix is not symmetric within tolerance")
    return 0.5 * (a + a.T)


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

def _from_adjacency(adj: np.ndarray, label: str) -> CouplingMatrix:
    edges = adj.sum() / 2.0
    if edges == 0:
        raise ValueError(f"{label}: graph has no edges, per-edge scaling undefined")
    n = adj.shape[0]
    return CouplingMatrix(adj * (n / (2.0 * edges)), Scaling.PER_EDGE, label)


def complete(n: int) -> CouplingMatrix:
    if n < 2:
        raise ValueError("complete graph needs n >= 2")
    adj = np.ones((n, n)) - np.eye(n)
    return _from_adjacency(adj, f"complete({n})")


def regular_circulant(n: int, d: int) -> CouplingMatrix:
    """Circulant ``d``-regular graph: ``i ~ i +- 1..d//2`` (plus ``i + n/2`` for odd ``d``)."""
    if not (0 < d < n):
        raise ValueError("regular_circulant needs 0 < d < n")
    if d % 2 and n % 2:
        raise ValueError("odd degree requires even n")
    adj = np.zeros((n, n))
    idx = np.arange(n)
    for t in range(1, d // 2 + 1):
        adj[idx, (idx + t) % n] = 1.0
        adj[idx, (idx - t) % n] = 1.0
    if d % 2:
        adj[idx, (idx + n // 2) % n] = 1.0
    if not np.all(adj.sum(axis=1) == d):
        raise ValueError(f"circulant construction is not {d}-regular for n={n}")
    return CouplingMatrix(adj / d, Scaling.PER_DEGREE, f"regular_circulant({n},{d})")


def hypercube(d: int) -> CouplingMatrix:
    if d < 1:
        raise ValueError("hypercube needs d >= 1")
    n = 1 << d
    adj = np.zeros((n, n))
    idx = np.arange(n)
    for b in range(d):
        adj[idx, idx ^ (1 << b)] = 1.0
    return CouplingMatrix(adj / d, Scaling.PER_DEGREE, f"hypercube({d})")


def erdos_renyi(n: int, p: float, seed: int) -> CouplingMatrix:
    if not 0.0 <= p <= 1.0:
        raise ValueError("erdos_renyi needs p in [0, 1]")
    if p == 0.0 or n < 2:
        raise ValueError("erdos_renyi: scaling 1/(n p) undefined")
    iu = np.triu_indices(n, 1)
    keep = Stream(seed).uniform(len(iu[0])) < p
    adj = np.zeros((n, n))
    adj[iu[0][keep], iu[1][keep]] = 1.0
    adj = adj + adj.T
    return CouplingMatrix(adj / (n * p), Scaling.CUSTOM, f"erdos_renyi({n},{p},{seed})")


def _bipartite(a: int, b: int, left_nbrs, c: int, label: str) -> CouplingMatrix:
    n = a + b
    adj = np.zeros((n, n))
    for i in range(a):
        for j in left_nbrs(i):
            adj[i, a + j] = adj[a + j, i] = 1.0
    d = a * c // b
    return CouplingMatrix(adj / (c + d), Scaling.BIPARTITE, label)


def complete_bipartite(a: int, b: int) -> CouplingMatrix:
    if a < 1 or b < 1:
        raise ValueError("complete_bipartite needs a, b >= 1")
    return _bipartite(a, b, lambda i: range(b), b, f"complete_bipartite({a},{b})")


def bipartite_circulant(a: int, b: int, c: int) -> CouplingMatrix:
    """Bi-regular bipartite graph: left ``i`` joins right ``(i c + t) mod b``, ``t < c``.

    Left degree is ``c`` and right degree ``d = a c / b``.
    """
    if a < 1 or b < 1 or not 1 <= c <= b:
        raise ValueError("bipartite_circulant needs a, b >= 1 and 1 <= c <= b")
    if (a * c) % b:
        raise ValueError(f"bipartite_circulant: a*c = {a * c} is not divisible by b = {b}")
    return _bipartite(a, b, lambda i: [(i * c + t) % b for t in range(c)], c,
                      f"bipartite_circulant({a},{b},{c})")


def star(n: int, scaled: bool = True) -> CouplingMatrix:
    """Star ``K_{1,n-1}``; ``scaled=False`` keeps the raw 0/1 adjacency."""
    if n < 2:
        raise ValueError("star needs n >= 2")
    adj = np.zeros((n, n))
    adj[0, 1:] = adj[1:, 0] = 1.0
    if scaled:
        return _from_adjacency(adj, f"star({n})")
    return CouplingMatrix(adj, Scaling.RAW, f"star({n},raw)")


def sk(n: int, seed: int) -> CouplingMatrix:
    iu = np.triu_indices(n, 1)
    z = np.zeros((n, n))
    z[iu] = Stream(seed).normal(len(iu[0]))
    return CouplingMatrix((z + z.T) / math.sqrt(n), Scaling.SK, f"sk({n},{seed})")


def hopfield(n: int, m: int, seed: int) -> CouplingMatrix:
    """``A = eta eta^T / n`` with i.i.d. fair signs; the diagonal (``m/n``) is kept."""
    eta = Stream(seed).coins(n * m).reshape(n, m)
    a = eta @ eta.T / n
    return CouplingMatrix(0.5 * (a + a.T), Scaling.HOPFIELD, f"hopfield({n},{m},{seed})")


ENSEMBLES = {
    "complete": complete,
    "regular_circulant": regular_circulant,
    "hypercube": hypercube,
    "erdos_renyi": erdos_renyi,
    "complete_bipartite": complete_bipartite,
    "bipartite_circulant": bipartite_circulant,
    "star": star,
    "sk": sk,
    "hopfield": hopfield,
}


def generate(kind: str | Mapping[str, Any], **params) -> CouplingMatrix:
    """Build an ensemble by name, e.g. ``generate("hypercube", d=3)``.

    ``kind`` may also be a mapping ``{"kind": ..., **params}``; ``"from_file"``
    takes ``path``.
    """
    if isinstance(kind, Mapping):
        params = {**{k: v for k, v in kind.items() if k != "kind"}, **params}
        kind = kind["kind"]
    if kind == "from_file":
        return load_matrix(params["path"])
    try:
        fn = ENSEMBLES[kind]
    except KeyError:
        raise ValueError(f"unknown ensemble {kind!r}; choose from {sorted(ENSEMBLES)} or from_file") from None
    for key, val in params.items():
        if isinstance(val, (int, np.integer)) and not isinstance(val, bool) and key != "seed" and val <= 0:
            raise ValueError(f"{kind}: parameter {key} must be positive")
    return fn(**params)


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def _parse_float(tok: str, where: str) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise MatrixFormatError(f"{where}: cannot parse {tok!r} as a real number") from None
    if not math.isfinite(x):
        raise MatrixFormatError(f"{where}: non-finite value {tok!r}")
    return x


def parse_matrix(text: str, label: str = "") -> CouplingMatrix:
    """Parse the dense (``n`` then ``n`` rows) or sparse (``sparse n`` then ``i j v``) format."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise MatrixFormatError("empty matrix file")
    head = lines[0].split()
    try:
        if head[0] == "sparse":
            if len(head) != 2:
                raise ValueError
            n = int(head[1])
            sparse = True
        else:
            if len(head) != 1:
                raise ValueError
            n = int(head[0])
            sparse = False
    except ValueError:
        raise MatrixFormatError(f"bad header line {lines[0]!r}") from None
    if n < 1:
        raise MatrixFormatError("matrix size must be positive")
    a = np.zeros((n, n))
    if sparse:
        seen = set()
        for ln_no, ln in enumerate(lines[1:], start=2):
            tok = ln.split()
            if len(tok) != 3:
                raise MatrixFormatError(f"line {ln_no}: expected 'i j value'")
            try:
                i, j = int(tok[0]), int(tok[1])
            except ValueError:
                raise MatrixFormatError(f"line {ln_no}: bad index") from None
            if not (0 <= i < n and 0 <= j < n):
                raise MatrixFormatError(f"line {ln_no}: index out of range")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise MatrixFormatError(f"line {ln_no}: duplicate entry ({i}, {j})")
            seen.add(key)
            a[i, j] = a[j, i] = _parse_float(tok[2], f"line {ln_no}")
        return CouplingMatrix(a, Scaling.CUSTOM, label)
    if len(lines) != n + 1:
        raise MatrixFormatError(f"expected {n} rows after the header, found {len(lines) - 1}")
    for r, ln in enumerate(lines[1:]):
        tok = ln.split()
        if len(tok) != n:
            raise MatrixFormatError(f"row {r + 1}: expected {n} values, found {len(tok)}")
        a[r] = [_parse_float(t, f"row {r + 1}") for t in tok]
    return CouplingMatrix(symmetrize(a), Scaling.CUSTOM, label)


def load_matrix(path) -> CouplingMatrix:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MatrixFormatError(f"cannot read {path}: {exc}") from exc
    return parse_matrix(text, label=str(path))


def format_matrix(A: CouplingMatrix, sparse: bool = False) -> str:
    a = A.entries
    if sparse:
        rows = [f"sparse {A.n}"]
        for i, j in zip(*np.nonzero(np.triu(a))):
            rows.append(f"{i} {j} {float(a[i, j])!r}")
        return "\n".join(rows) + "\n"
    rows = [str(A.n)] + [" ".join(repr(float(x)) for x in row) for row in a]
    return "\n".join(rows) + "\n"


def save_matrix(A: CouplingMatrix, path, sparse: bool = False) -> None:
    Path(path).write_text(format_matrix(A, sparse=sparse))


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def row_sums(A: CouplingMatrix) -> np.ndarray:
    """``R(i) = sum_j A(i, j)``."""
    return A.entries.sum(axis=1)


def row_sum_deviation_fraction(A: CouplingMatrix, delta: float) -> float:
    """Fraction of rows with ``|R(i) - 1| > delta``."""
    return float(np.mean(np.abs(row_sums(A) - 1.0) > delta))


def symmetric_eigh(entries, rel_tol: float = EIG_REL_TOL, max_sweeps: int = EIG_MAX_SWEEPS,
                   backend: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of a dense symmetric matrix.

    Jacobi rotations until the off-diagonal Frobenius norm is at most
    ``rel_tol * ||A||_F``; raises :class:`ConvergenceError` after
    ``max_sweeps`` sweeps.
    """
    k = _backend.kernels if backend is None else _backend.get(backend)
    a = np.ascontiguousarray(entries, dtype=np.float64)
    w, v, sweeps, ok = k.jacobi_eigh(a, rel_tol, max_sweeps)
    if not ok:
        raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


EDGE_TOL = 1e-9


def level_sets(eigenvalues: np.ndarray, eps: float) -> tuple[dict[int, int], int]:
    """Sizes of ``I_0 = {eps/2 < |l| <= 1}`` and ``I_k = {2^(k-1) < |l| <= 2^k}``, ``1 <= k <= L``.

    ``L = ceil(log2 sqrt(n))``.  Also returns the number of eigenvalues above
    ``2^L`` that fall in no level set.  Magnitudes within a relative
    ``EDGE_TOL`` of an interval end are snapped onto it, so solver round-off
    cannot move an exact ``|l| = 2^k`` across a boundary.
    """
    lam = np.abs(np.asarray(eigenvalues, dtype=np.float64))
    n = lam.size
    top = max(0, math.ceil(math.log2(math.sqrt(n)))) if n > 1 else 0
    for edge in [eps / 2] + [2.0 ** k for k in range(top + 1)]:
        lam = np.where(np.abs(lam - edge) <= EDGE_TOL * edge, edge, lam)
    sizes = {0: int(np.sum((lam > eps / 2) & (lam <= 1.0)))}
    for k in range(1, top + 1):
        sizes[k] = int(np.sum((lam > 2.0 ** (k - 1)) & (lam <= 2.0 ** k)))
    uncovered = int(np.sum(lam > 2.0 ** top)) if top else int(np.sum(lam > 1.0))
    return sizes, uncovered


def net_log_size_bound(sizes: Mapping[int, int], n: int, eps: float) -> float:
    """Upper bound on ``log |D_n(eps)| / n`` from the level-set counting argument.

    Each nonempty level ``k`` with radius index ``j`` contributes
    ``|I_k| * max(0, log(6 * 2^(k+j) / (eps sqrt|I_k|)))``; the bound is the
    log of the number of admissible tuples ``(j_0..j_L)`` (``0 <= j_k <= L``,
    ``sum 4^(j_k) <= 5n``) plus the largest such sum over those tuples.
    Empty levels need no radius and contribute only ``j = 0``.
    """
    top = max(sizes) if sizes else 0
    budget = 5 * n
    neg = -np.inf
    best = np.full(budget + 1, neg)
    count = np.zeros(budget + 1)
    best[0] = 0.0
    count[0] = 1.0
    for k in range(top + 1):
        m = sizes.get(k, 0)
        nb = np.full(budget + 1, neg)
        nc = np.zeros(budget + 1)
        for j in range(top + 1 if m else 1):
            cost = 4 ** j
            if cost > budget:
                break
            if m:
                gain = m * max(0.0, math.log(6.0 * 2.0 ** (k + j) / (eps * math.sqrt(m))))
            else:
                gain = 0.0
            cand = np.full(budget + 1, neg)
            cand[cost:] = best[:budget + 1 - cost] + gain
            nb = np.maximum(nb, cand)
            nc[cost:] += count[:budget + 1 - cost]
        best, count = nb, nc
    total = float(count.sum())
    if total == 0:
        return 0.0
    return (math.log(total) + float(np.max(best))) / n


@dataclass
class SpectralDiagnostics:
    eigenvalues: np.ndarray
    eps: float
    trace_sq_over_n: float
    trace_sq_over_n_spectral: float
    n_big: int
    level_set_sizes: dict[int, int]
    uncovered: int
    net_log_size_bound: float
    lambda_max_abs: float
    row_sums: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def row_sum_mean(self) -> float:
        return float(self.row_sums.mean())

    def n_big_at(self, eps: float) -> int:
        """Number of eigenvalues with ``|l| > eps / 2``."""
        return int(np.sum(np.abs(self.eigenvalues) > eps / 2))

    def row_sum_deviation_fraction(self, delta: float) -> float:
        return float(np.mean(np.abs(self.row_sums - 1.0) > delta))

    def outside_mass(self, delta: float) -> float:
        """Fraction of the spectrum outside ``[-delta, delta]`` (no pass/fail attached)."""
        return float(np.mean(np.abs(self.eigenvalues) > delta))

    def to_dict(self, delta: float = 0.1) -> dict:
        return {
            "n": self.n,
            "eps": self.eps,
            "trace_sq_over_n": self.trace_sq_over_n,
            "trace_sq_over_n_spectral": self.trace_sq_over_n_spectral,
            "n_big": self.n_big,
            "level_set_sizes": {str(k): v for k, v in self.level_set_sizes.items()},
            "uncovered_eigenvalues": self.uncovered,
            "net_log_size_bound": self.net_log_size_bound,
            "lambda_max_abs": self.lambda_max_abs,
            "row_sum_mean": self.row_sum_mean,
            "row_sum_deviation_fraction": self.row_sum_deviation_fraction(delta),
            "spectral_mass_outside_delta": self.outside_mass(delta),
            "eigenvalues": [float(x) for x in self.eigenvalues],
        }


def spectral_diagnostics(A: CouplingMatrix, eps: float, backend: str | None = None) -> SpectralDiagnostics:
    if eps <= 0:
        raise ValueError("eps must be positive")
    w, _ = symmetric_eigh(A.entries, backend=backend)
    n = A.n
    sizes, uncovered = level_sets(w, eps)
    return SpectralDiagnostics(
        eigenvalues=w,
        eps=float(eps),
        trace_sq_over_n=float(np.sum(A.entries ** 2) / n),
        trace_sq_over_n_spectral=float(np.sum(w ** 2) / n),
        n_big=int(np.sum(np.abs(w) > eps / 2)),
        level_set_sizes=sizes,
        uncovered=uncovered,
        net_log_size_bound=net_log_size_bound(sizes, n, eps),
        lambda_max_abs=float(np.max(np.abs(w))),
        row_sums=row_sums(A),
    )


@dataclass(frozen=True)
class L1Condition:
    bound: float
    exact: float | None


def l1_condition(A: CouplingMatrix, exact_cap: int = 20, backend: str | None = None) -> L1Condition:
    """``sum |A_ij|`` and, for ``n <= exact_cap``, ``max_{x in {0,1}^n} sum_i |(A x)_i|``.

    The objective is convex in ``x`` so the maximum over the cube sits at a
    vertex; vertices are scanned exhaustively.
    """
    a = A.entries
    bound = float(np.abs(a).sum())
    if A.n > exact_cap:
        return L1Condition(bound, None)
    k = _backend.kernels if backend is None else _backend.get(backend)
    _, _, mask = k.subset_scan(np.ascontiguousarray(a))
    sel = np.array([(mask >> i) & 1 for i in range(A.n)], dtype=bool)
    exact = float(np.abs(a[sel].sum(axis=0)).sum())
    return L1Condition(bound, exact)
