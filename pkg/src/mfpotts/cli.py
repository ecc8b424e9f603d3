"""Command-line interface: ``mfpotts <command> [options]``.

Every command prints a JSON report ``{command, inputs, results, version}`` on
stdout.  Exit codes: 0 success, 2 bad arguments, 3 enumeration cap exceeded,
4 file or parse error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from . import __version__
from . import graphon as gmod
from . import limits, matrix
from .errors import EnumerationCapError, MatrixFormatError
from .exact import DEFAULT_CAP, PottsModel, empirical_law, log_partition
from .meanfield import Schedule, mf_gap, mf_solve

EXIT_ARGS, EXIT_CAP, EXIT_IO = 2, 3, 4

GLOBAL_DEFAULTS = {
    "json": True,
    "csv": None,
    "seed": 0,
    "tol": 1e-10,
    "max_sweeps": 500,
    "restarts": None,
    "cap": DEFAULT_CAP,
    "backend": None,
}


class UsageError(ValueError):
    """Invalid combination of otherwise well-formed arguments (exit 2)."""


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _grid(text: str) -> list[float]:
    """``start:stop:num`` (inclusive, like linspace) or a comma list."""
    if ":" in text:
        try:
            a, b, k = text.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(k))]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected start:stop:num, got {text!r}") from None
    return _float_list(text)


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _global_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("global options")
    g.add_argument("--json", action="store_true", help="emit a JSON report (default)")
    g.add_argument("--csv", metavar="PATH", help="also write tabular results as CSV")
    g.add_argument("--seed", type=_u64, help="seed for random ensembles and random restarts (default 0)")
    g.add_argument("--tol", type=float, help="mean-field convergence tolerance (default 1e-10)")
    g.add_argument("--max-sweeps", type=int, help="mean-field sweep cap per start (default 500)")
    g.add_argument("--restarts", type=int, help="mean-field starts (default q + 3)")
    g.add_argument("--cap", type=int, help="enumeration cap on q^n (default 2^24)")
    g.add_argument("--backend", choices=["python", "cython"], help="kernel backend override")
    return p


def _model_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("coupling matrix")
    g.add_argument("--ensemble", choices=sorted(matrix.ENSEMBLES), help="generated ensemble")
    g.add_argument("--matrix", metavar="PATH", help="matrix file (dense or sparse format)")
    g.add_argument("--n", type=_int_list, help="vertex count, or a comma list for sweeps")
    g.add_argument("--d", type=int, help="degree (regular_circulant) or dimension (hypercube)")
    g.add_argument("--p", type=float, help="edge probability (erdos_renyi)")
    g.add_argument("--a", type=int, help="left side size (bipartite ensembles)")
    g.add_argument("--b", type=int, help="right side size (bipartite ensembles)")
    g.add_argument("--c", type=int, help="left degree (bipartite_circulant)")
    g.add_argument("--m", type=int, help="pattern count (hopfield)")
    g.add_argument("--raw", action="store_true", help="unscaled adjacency (star)")
    return p


def _potts_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("interaction")
    g.add_argument("--q", type=int, default=2, help="number of colors (default 2)")
    g.add_argument("--beta", type=float, help="J = beta * I_q")
    g.add_argument("--J", dest="J", metavar="PATH", help="q x q interaction matrix file")
    g.add_argument("--B", dest="B", type=float, help="field on color 0: h = (B, 0, ..., 0)")
    g.add_argument("--h", dest="h", type=_float_list, help="comma-separated field vector")
    return p


def _fields(args, q: int) -> np.ndarray:
    if args.h is not None and args.B is not None:
        raise UsageError("give either --B or --h, not both")
    if args.h is not None:
        if len(args.h) != q:
            raise UsageError(f"--h needs {q} values")
        return np.array(args.h, dtype=np.float64)
    h = np.zeros(q)
    h[0] = args.B or 0.0
    return h


def _interaction(args, q: int) -> np.ndarray:
    if args.J is not None and args.beta is not None:
        raise UsageError("give either --beta or --J, not both")
    if args.J is not None:
        J = matrix.load_matrix(args.J).entries
        if J.shape != (q, q):
            raise UsageError(f"--J file must be {q} x {q}")
        return J
    if args.beta is None:
        raise UsageError("one of --beta or --J is required")
    return args.beta * np.eye(q)


def _ensemble_matrix(args, n: int | None) -> matrix.CouplingMatrix:
    kind = args.ensemble
    need = lambda name: _require(args, name, kind)
    if kind == "complete":
        return matrix.complete(_need_n(n, kind))
    if kind == "regular_circulant":
        return matrix.regular_circulant(_need_n(n, kind), need("d"))
    if kind == "hypercube":
        if args.d is not None:
            return matrix.hypercube(args.d)
        n = _need_n(n, kind)
        d = n.bit_length() - 1
        if n != 1 << d:
            raise UsageError("hypercube needs n to be a power of two (or give --d)")
        return matrix.hypercube(d)
    if kind == "erdos_renyi":
        return matrix.erdos_renyi(_need_n(n, kind), need("p"), args.seed)
    if kind in ("complete_bipartite", "bipartite_circulant"):
        a, b = args.a, args.b
        if a is None or b is None:
            n = _need_n(n, kind)
            a = n // 2 if a is None else a
            b = n - a if b is None else b
        if kind == "complete_bipartite":
            return matrix.complete_bipartite(a, b)
        return matrix.bipartite_circulant(a, b, need("c"))
    if kind == "star":
        return matrix.star(_need_n(n, kind), scaled=not args.raw)
    if kind == "sk":
        return matrix.sk(_need_n(n, kind), args.seed)
    if kind == "hopfield":
        return matrix.hopfield(_need_n(n, kind), need("m"), args.seed)
    raise UsageError(f"unknown ensemble {kind!r}")


def _require(args, name: str, kind: str):
    val = getattr(args, name)
    if val is None:
        raise UsageError(f"--{name} is required for ensemble {kind}")
    return val


def _need_n(n, kind):
    if n is None:
        raise UsageError(f"--n is required for ensemble {kind}")
    return n


def _matrices(args) -> list[matrix.CouplingMatrix]:
    """One matrix per requested size (a single one for files)."""
    if (args.ensemble is None) == (args.matrix is None):
        raise UsageError("give exactly one of --ensemble or --matrix")
    if args.matrix is not None:
        return [matrix.load_matrix(args.matrix)]
    sizes = args.n if args.n else [None]
    return [_ensemble_matrix(args, n) for n in sizes]


def _zero_diagonal(A: matrix.CouplingMatrix) -> tuple[matrix.CouplingMatrix, float]:
    if A.has_zero_diagonal:
        return A, 0.0
    A0, dropped = A.zero_diagonal()
    print(f"warning: zeroed the diagonal of {A.label or 'the coupling matrix'} "
          f"(dropped mass {dropped!r})", file=sys.stderr)
    return A0, dropped


def _schedule(args) -> Schedule:
    return Schedule(max_sweeps=args.max_sweeps, tol=args.tol, restarts=args.restarts, seed=args.seed)


def _plain(x: Any) -> Any:
    """JSON-ready copy: numpy scalars and arrays become Python floats/ints/lists."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v) for v in row])


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_gen(args) -> dict:
    (A,) = _matrices(args) if not args.n or len(args.n) == 1 else (None,)
    if A is None:
        raise UsageError("gen takes a single --n")
    text = matrix.format_matrix(A, sparse=args.sparse)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise MatrixFormatError(f"cannot write {args.out}: {exc}") from exc
    return {
        "label": A.label,
        "n": A.n,
        "scaling": A.scaling_tag.value,
        "out": args.out,
        "entries": None if args.out else A.entries,
    }


def cmd_diagnose(args) -> dict:
    (A,) = _matrices(args) if not args.n or len(args.n) == 1 else (None,)
    if A is None:
        raise UsageError("diagnose takes a single --n")
    diag = matrix.spectral_diagnostics(A, args.eps, backend=args.backend)
    l1 = matrix.l1_condition(A, exact_cap=args.exact_cap, backend=args.backend)
    out = {"label": A.label, "scaling": A.scaling_tag.value}
    out.update(diag.to_dict(delta=args.delta))
    out["l1_condition"] = {"bound": l1.bound, "exact": l1.exact}
    out["meets_mean_field_heuristic"] = diag.trace_sq_over_n <= args.threshold
    out["heuristic_note"] = (f"finite-n heuristic: tr(A^2)/n <= {args.threshold!r}; "
                             "the asymptotic condition is tr(A^2) = o(n)")
    return out


def _model(args, A) -> tuple[PottsModel, float]:
    A0, dropped = _zero_diagonal(A)
    q = args.q
    if q < 2:
        raise UsageError("--q must be at least 2")
    return PottsModel(A0, q, _interaction(args, q), _fields(args, q)), dropped


def cmd_exact(args) -> dict:
    rows = []
    for A in _matrices(args):
        model, dropped = _model(args, A)
        phi = log_partition(model, cap=args.cap, backend=args.backend)
        rows.append({"n": model.n, "label": A.label, "phi": phi, "phi_per_site": phi / model.n,
                     "dropped_diagonal_mass": dropped})
    return {"rows": rows}


def cmd_mf(args) -> dict:
    rows = []
    for A in _matrices(args):
        model, dropped = _model(args, A)
        res = mf_solve(model, _schedule(args), backend=args.backend)
        rows.append({
            "n": model.n, "label": A.label, "value": res.value, "value_per_site": res.value / model.n,
            "converged": res.converged, "sweeps_used": res.sweeps_used,
            "restarts_tried": res.restarts_tried, "best_start": res.best_start,
            "n_optima": res.n_optima, "theta_star": res.theta_star,
            "dropped_diagonal_mass": dropped,
        })
    return {"rows": rows}


COMPARE_COLUMNS = ("n", "phi_per_site", "supm_per_site", "gap_per_site")


def cmd_compare(args) -> dict:
    rows = []
    for A in _matrices(args):
        model, dropped = _model(args, A)
        try:
            g = mf_gap(model, _schedule(args), cap=args.cap, backend=args.backend)
        except EnumerationCapError as exc:
            rows.append({"n": model.n, "skipped": True, "reason": str(exc)})
            continue
        rows.append({"n": model.n, "phi_per_site": g.phi / model.n, "supm_per_site": g.sup_m / model.n,
                     "gap_per_site": g.gap_per_site, "dropped_diagonal_mass": dropped})
    if args.csv:
        _write_csv(args.csv, COMPARE_COLUMNS, [[r.get(c) for c in COMPARE_COLUMNS] for r in rows])
    return {"rows": rows}


def _point_dict(theta: np.ndarray) -> dict:
    d = {"probs": theta}
    if theta.size == 2:
        d["m"] = theta[0] - theta[1]
    return d


def cmd_limit(args) -> dict:
    kind = args.kind
    if kind == "bipartite":
        betas = args.beta_grid if args.beta_grid else [_require(args, "beta", kind)]
        p = _require(args, "p", kind)
        table = []
        for beta in betas:
            b = abs(beta) / 2.0 if args.corrected else abs(beta)
            table.append({
                "beta": beta, "p": p, "value": limits.bipartite_limit(beta, p, corrected=args.corrected),
                "sigma_p": limits.bipartite_sigma(b, p), "sigma_1mp": limits.bipartite_sigma(b, 1.0 - p),
                "supercritical": b * b * p * (1.0 - p) > 1.0,
            })
    else:
        q = args.q
        h = _fields(args, q)
        if args.beta is None and not args.beta_grid:
            raise UsageError("--beta or --beta-grid is required")
        betas = args.beta_grid if args.beta_grid else [args.beta]
        table = []
        for beta in betas:
            if kind == "cw":
                res = limits.cw_limit(q, beta, h)
                table.append({"beta": beta, "value": res.value,
                              "argmax": [_point_dict(t) for t in res.argmax.points]})
            else:
                ms = limits.ldp_minimizers(q, beta, h)
                row = {"beta": beta, "rate_min": ms.rate_min,
                       "minimizers": [_point_dict(t) for t in ms.points]}
                if q == 2:
                    B = float(h[0] - h[1])
                    m = limits.cw_magnetization(beta / 2.0, B / 2.0)
                    row["predicted_m"] = sorted({m, -m}) if B == 0.0 and m != 0.0 else [m]
                if args.mu is not None:
                    rate, tilde = limits.ldp_rate(q, beta, h, args.mu, ms.rate_min)
                    row["rate_at_mu"] = {"mu": args.mu, "rate": rate, "rate_tilde": tilde}
                table.append(row)
    if args.csv:
        col = "rate_min" if kind == "ldp" else "value"
        _write_csv(args.csv, ("beta", col), [[r["beta"], r[col]] for r in table])
    return {"kind": kind, "rows": table}


def cmd_concentration(args) -> dict:
    if args.q != 2:
        raise UsageError("concentration is defined for q = 2")
    if args.J is not None:
        raise UsageError("concentration uses --beta (J = beta I_2)")
    (A,) = _matrices(args) if not args.n or len(args.n) == 1 else (None,)
    if A is None:
        raise UsageError("concentration takes a single --n")
    model, dropped = _model(args, A)
    beta = _require(args, "beta", "concentration")
    B = float(model.h[0] - model.h[1])
    if B != 0.0:
        locs = [limits.cw_magnetization(beta / 2.0, B / 2.0)]
    elif beta <= 2.0:
        locs = [0.0]
    else:
        m = limits.cw_magnetization(beta / 2.0, 0.0)
        locs = [-m, m]
    law = empirical_law(model, cap=args.cap, backend=args.backend)
    m_vals, probs = law.magnetization_law()
    return {
        "n": model.n,
        "predicted_locations": locs,
        "delta": args.delta,
        "mass_near_prediction": law.mass_near(locs, args.delta),
        "p_positive": float(probs[m_vals > 0].sum()),
        "p_negative": float(probs[m_vals < 0].sum()),
        "magnetization": m_vals,
        "probabilities": probs,
        "dropped_diagonal_mass": dropped,
    }


def _load_graphon(args, path_attr: str = "graphon") -> gmod.StepGraphon:
    path = getattr(args, path_attr)
    if path is not None:
        return gmod.load_graphon(path)
    if args.matrix is None and args.ensemble is None:
        raise UsageError("give --graphon, --matrix or --ensemble")
    (A,) = _matrices(args) if not args.n or len(args.n) == 1 else (None,)
    if A is None:
        raise UsageError("graphon commands take a single --n")
    return gmod.step_from_matrix(A, multiply_by_n=args.multiply_by_n)


def cmd_graphon(args) -> dict:
    if args.kind == "dist":
        if args.graphon is None or args.graphon2 is None:
            raise UsageError("graphon dist needs --graphon and --graphon2")
        W1, W2 = gmod.load_graphon(args.graphon), gmod.load_graphon(args.graphon2)
        d, perm = gmod.cut_distance_blocks(W1, W2, backend=args.backend)
        return {"kind": "dist", "k": W1.k, "cut_distance_upper_bound": d, "permutation": perm}
    W = _load_graphon(args)
    if args.kind == "cutnorm":
        r = gmod.cut_norm_exact(W, backend=args.backend)
        return {"kind": "cutnorm", "k": W.k, "cut": r.cut, "inf_to_1": r.inf_to_1,
                "cut_sets": r.cut_sets, "sign_vector": r.sign_vector}
    q = args.q
    res = gmod.f_sup(W, _interaction(args, q), _fields(args, q), _schedule(args), backend=args.backend)
    return {"kind": "fsup", "k": W.k, "value": res.value, "converged": res.converged,
            "sweeps_used": res.sweeps_used, "restarts_tried": res.restarts_tried,
            "n_optima": res.n_optima, "rho_star": res.theta_star}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    glob = _global_parser()
    model = _model_parser()
    potts = _potts_parser()
    parser = argparse.ArgumentParser(
        prog="mfpotts", parents=[glob],
        description="Exact and naive mean-field log partition functions for Potts models on weighted graphs.")
    parser.add_argument("--version", action="version", version=f"mfpotts {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("gen", parents=[glob, model], help="generate an ensemble matrix")
    p.add_argument("--out", metavar="PATH", help="write the matrix file here")
    p.add_argument("--sparse", action="store_true", help="use the sparse file format")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("diagnose", parents=[glob, model], help="spectral and row-sum diagnostics")
    p.add_argument("--eps", type=float, default=1.0, help="eigenvalue threshold scale (default 1)")
    p.add_argument("--delta", type=float, default=0.1, help="row-sum and spectral-mass window (default 0.1)")
    p.add_argument("--threshold", type=float, default=0.1, help="heuristic cut-off on tr(A^2)/n (default 0.1)")
    p.add_argument("--exact-cap", type=int, default=20, help="largest n for the exact l1 condition (default 20)")
    p.set_defaults(func=cmd_diagnose)

    for name, fn, text in (("exact", cmd_exact, "exact log partition function by enumeration"),
                           ("mf", cmd_mf, "mean-field maximisation"),
                           ("compare", cmd_compare, "exact vs mean-field gap over a sweep of n")):
        p = sub.add_parser(name, parents=[glob, model, potts], help=text)
        p.set_defaults(func=fn)

    p = sub.add_parser("limit", help="limiting variational formulas")
    lsub = p.add_subparsers(dest="kind", required=True, metavar="kind")
    for kind, text in (("cw", "Curie-Weiss Potts limit"), ("bipartite", "bipartite Ising limit"),
                       ("ldp", "LDP rate minimisers")):
        lp = lsub.add_parser(kind, parents=[glob], help=text)
        lp.add_argument("--beta", type=float)
        lp.add_argument("--beta-grid", type=_grid, metavar="START:STOP:NUM", help="sweep over beta")
        if kind == "bipartite":
            lp.add_argument("--p", type=float, help="side fraction in (0, 1)")
            lp.add_argument("--corrected", action="store_true",
                            help="fixed points at |beta|/2, matching the finite-n mean-field optimum")
        else:
            lp.add_argument("--q", type=int, default=2)
            lp.add_argument("--B", dest="B", type=float)
            lp.add_argument("--h", dest="h", type=_float_list)
            if kind == "ldp":
                lp.add_argument("--mu", type=_float_list, help="also evaluate the rate at this point")
        lp.set_defaults(func=cmd_limit)

    p = sub.add_parser("concentration", parents=[glob, model, potts],
                       help="exact magnetization law vs predicted locations (q = 2)")
    p.add_argument("--delta", type=float, default=0.15, help="window half-width (default 0.15)")
    p.set_defaults(func=cmd_concentration, ensemble_default="complete")

    p = sub.add_parser("graphon", help="step-graphon cut norms and variational values")
    gsub = p.add_subparsers(dest="kind", required=True, metavar="kind")
    for kind, text in (("cutnorm", "exact cut and inf->1 norms"), ("fsup", "maximise F(W, rho)"),
                       ("dist", "block-permutation cut distance (upper bound)")):
        parents = [glob, model, potts] if kind == "fsup" else [glob, model]
        gp = gsub.add_parser(kind, parents=parents, help=text)
        gp.add_argument("--graphon", metavar="PATH", help="step-graphon file")
        if kind == "dist":
            gp.add_argument("--graphon2", metavar="PATH", help="second step-graphon file")
        gp.add_argument("--multiply-by-n", action="store_true", help="use n A for matrix inputs")
        gp.set_defaults(func=cmd_graphon)
    return parser


def _inputs(args) -> dict:
    skip = {"func", "json", "ensemble_default"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, val in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, val)
    if getattr(args, "ensemble_default", None) and args.ensemble is None and args.matrix is None:
        args.ensemble = args.ensemble_default
    try:
        results = args.func(args)
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (MatrixFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    report = {
        "command": args.command if args.command not in ("limit", "graphon") else f"{args.command} {args.kind}",
        "inputs": _plain(_inputs(args)),
        "results": _plain(results),
        "version": __version__,
    }
    sys.stdout.write(json.dumps(report, indent=2) + "\n")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
