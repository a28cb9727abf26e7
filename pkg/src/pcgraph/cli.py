"""Command line interface.

Exit codes: 0 success, 1 checks failed, 2 input or parse error, 3 invalid model
or parameters.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import builder, estimate, graphs, mcar, partialcorr
from .errors import InvalidModelError, PCGraphError
from .mcar import MCARModel
from .partialcorr import DEFAULT_GRID_POINTS, DEFAULT_ZERO_TOL
from .simulate import read_csv, simulate, write_csv

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_MODEL = 0, 1, 2, 3


class InputError(Exception):
    """Unreadable or malformed input (exit code 2)."""


class ParameterError(Exception):
    """Well-formed input that violates a precondition (exit code 3)."""


# ------------------------------------------------------------------- input

def _load_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON: {exc}") from exc


def model_from_spec(obj, snap: bool | None = None) -> MCARModel:
    """Build a model from ``{"k", "p", "A", "Sigma_L", "snap_zeros"}``."""
    if not isinstance(obj, dict):
        raise InputError("model spec must be a JSON object")
    missing = [key for key in ("A", "Sigma_L") if key not in obj]
    if missing:
        raise InputError(f"model spec is missing {', '.join(missing)}")
    A, S = obj["A"], obj["Sigma_L"]
    if not isinstance(A, list) or not A:
        raise InputError("'A' must be a non-empty list of k x k matrices")
    try:
        A = [np.array(a, dtype=float) for a in A]
        S = np.array(S, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"model matrices must be numeric arrays: {exc}") from exc
    snap_zeros = obj.get("snap_zeros", True) if snap is None else snap
    model = MCARModel(tuple(A), S, snap_zeros=bool(snap_zeros))
    if "k" in obj and obj["k"] != model.k:
        raise InvalidModelError(f"spec declares k={obj['k']} but matrices are {model.k} x {model.k}")
    if "p" in obj and obj["p"] != model.p:
        raise InvalidModelError(f"spec declares p={obj['p']} but lists {model.p} AR matrices")
    return model


def _load_model(args) -> MCARModel:
    return model_from_spec(_load_json(args.spec), snap=False if args.no_snap else None)


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror or exc}") from exc


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _grid(args, model: MCARModel) -> partialcorr.SpectralGrid:
    return partialcorr.default_grid(model, n_points=args.grid_points, zero_tol=args.tol,
                                    lambda_max=args.lambda_max)


def _settings(args, model: MCARModel | None = None, **extra) -> dict:
    out = {"zero_tol": args.tol, "grid_points": args.grid_points}
    if model is not None:
        g = _grid(args, model)
        out["lambda_max"] = float(g.frequencies[-1])
        out["grid"] = "chebyshev-lobatto"
        out["snap_zeros"] = model.snap_zeros
    out.update(extra)
    return out


# ---------------------------------------------------------------- commands

def cmd_graph(args) -> int:
    model = _load_model(args)
    grid = _grid(args, model) if args.method == "grid" else None
    G = builder.pc_graph(model, args.method, args.tol, grid)
    mixed = {}
    if "local" in args.include or "augmented" in args.include:
        mixed["local_causality"] = builder.local_causality_graph(model, args.tol)
    if "ou" in args.include:
        if model.p != 1:
            raise ParameterError("the OU causality graph needs p = 1")
        mixed["ou_causality"] = builder.ou_causality_graph(model.A[0], args.tol)
    augmented = {}
    if "augmented" in args.include:
        augmented = {f"{name}_augmented": graphs.augment(M) for name, M in mixed.items()}
        if "local" not in args.include:
            mixed.pop("local_causality")
    if args.format == "dot":
        parts = [G.to_dot("pc_graph")]
        parts += [M.to_dot(name) for name, M in mixed.items()]
        parts += [U.to_dot(name) for name, U in augmented.items()]
        text = "".join(parts)
    else:
        body = {"pc_graph": G.to_json(), "method": args.method,
                "settings": _settings(args, model)}
        body.update({name: M.to_json() for name, M in {**mixed, **augmented}.items()})
        text = _dumps(body)
    _emit(text, args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    model = _load_model(args)
    mcar.require_causal(model)
    suites = ["graphoid", "markov", "subsets"] if args.suite == "all" else [args.suite]
    grid = _grid(args, model)
    report = {"settings": _settings(args, model, seed=args.seed, trials=args.trials)}
    ok = True
    for suite in suites:
        if suite == "graphoid":
            rng = np.random.default_rng(args.seed)
            rep = partialcorr.graphoid_sweep(model, grid, max_partitions=args.trials, rng=rng)
            report["graphoid"] = rep.to_json()
        elif suite == "markov":
            G = builder.pc_graph(model, "coeff", args.tol)
            oracle = partialcorr.PartialCorrelationOracle(model, grid)
            rep = graphs.markov_check(G, oracle)
            report["markov"] = rep.to_json()
        else:
            rep = builder.subset_checks(model, args.tol)
            report["subsets"] = rep.to_json()
        ok = ok and rep.ok
    report["ok"] = ok
    _emit(_dumps(report), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_simulate(args) -> int:
    model = _load_model(args)
    if args.n < 2:
        raise ParameterError(f"--n must be at least 2, got {args.n}")
    if not args.delta > 0:
        raise ParameterError(f"--delta must be positive, got {args.delta}")
    series = simulate(model, args.delta, args.n, args.seed)
    meta = {"delta": args.delta, "n": args.n, "k": model.k, "seed": args.seed,
            "rng": "numpy default_rng (PCG64)", "discretization": "exact"}
    if args.out is None or args.out == "-":
        write_csv(series, sys.stdout)
        sys.stderr.write(_dumps(meta))
    else:
        try:
            write_csv(series, args.out)
        except OSError as exc:
            raise InputError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
        meta["out"] = args.out
        sys.stdout.write(_dumps(meta))
    return EXIT_OK


def cmd_estimate(args) -> int:
    try:
        series = read_csv(args.csv, delta=args.delta)
    except OSError as exc:
        raise InputError(f"cannot read {args.csv}: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.tau is not None and not 0 <= args.tau < 1:
        raise ParameterError("--tau must lie in [0, 1)")
    if args.lambda_max * series.delta > np.pi:
        raise ParameterError(f"--lambda-max {args.lambda_max} exceeds the Nyquist frequency "
                             f"pi/delta = {np.pi / series.delta:.6g}")
    freqs = np.linspace(0.0, args.lambda_max, args.frequencies)
    try:
        res = estimate.estimate_pc_graph(series, freqs, args.bandwidth, args.tau,
                                         args.estimator, args.truncation)
    except ValueError as exc:
        raise ParameterError(str(exc)) from exc
    body = res.to_json()
    body["settings"] = {"lambda_max": args.lambda_max, "frequencies": args.frequencies,
                        "bandwidth_rule": "ceil(n**0.6 / 2)" if args.bandwidth is None else "user"}
    _emit(_dumps(body), args.out)
    return EXIT_OK


def cmd_synthesize(args) -> int:
    obj = _load_json(args.graph)
    try:
        G = graphs.graph_from_json(obj)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{args.graph}: {exc}") from exc
    if not isinstance(G, graphs.UndirectedGraph):
        raise InputError("synthesize needs an undirected graph (no directed or dashed edges)")
    if args.p < 1:
        raise ParameterError("--p must be at least 1")
    model = builder.synthesize_model(G, args.p)
    _emit(_dumps(model.to_dict()), args.out)
    return EXIT_OK


def cmd_sampled(args) -> int:
    model = _load_model(args)
    if model.p != 1:
        raise ParameterError("the sampled VAR(1) graph needs an OU model (p = 1)")
    if not args.delta > 0:
        raise ParameterError(f"--delta must be positive, got {args.delta}")
    Gd = builder.sampled_var1_pc_graph(model.A[0], model.Sigma_L, args.delta, args.tol)
    G = builder.pc_graph(model, "coeff", args.tol)
    if args.format == "dot":
        text = G.to_dot("pc_graph") + Gd.to_dot("sampled_pc_graph")
    else:
        text = _dumps({
            "pc_graph": G.to_json(), "sampled_pc_graph": Gd.to_json(),
            "only_continuous": [list(e) for e in sorted(G.edges - Gd.edges)],
            "only_sampled": [list(e) for e in sorted(Gd.edges - G.edges)],
            "settings": {"zero_tol": args.tol, "delta": args.delta},
        })
    _emit(text, args.out)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _add_model_opts(p, grid: bool = True):
    p.add_argument("spec", help="model spec JSON file ('-' for stdin)")
    p.add_argument("--tol", type=float, default=DEFAULT_ZERO_TOL, help="relative zero tolerance")
    p.add_argument("--no-snap", action="store_true", help="do not snap |x| <= 1e-12 to zero")
    if grid:
        p.add_argument("--lambda-max", type=float, default=None,
                       help="upper grid frequency (default 10 (1 + |spectral abscissa|))")
        p.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS)
    p.add_argument("--out", default=None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pcgraph",
                                 description="Partial correlation graphs of MCAR processes.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", help="partial correlation graph of a model")
    _add_model_opts(p)
    p.add_argument("--method", choices=["coeff", "grid"], default="coeff")
    p.add_argument("--format", choices=["dot", "json"], default="dot")
    p.add_argument("--include", default="", type=lambda s: [x for x in s.split(",") if x],
                   help="comma list of extra graphs: local, ou, augmented")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("check", help="run property-check suites")
    _add_model_opts(p)
    p.add_argument("--suite", choices=["graphoid", "markov", "subsets", "all"], default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None,
                   help="number of random partitions for the graphoid suite (default all)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="simulate a sampled path to CSV")
    _add_model_opts(p, grid=False)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate the graph from a sampled CSV")
    p.add_argument("csv")
    p.add_argument("--delta", type=float, default=None, help="spacing (default: from the t column)")
    p.add_argument("--bandwidth", type=int, default=None, help="Daniell half-width m")
    p.add_argument("--tau", type=float, default=estimate.DEFAULT_TAU)
    p.add_argument("--lambda-max", type=float, default=estimate.DEFAULT_LAMBDA_MAX)
    p.add_argument("--frequencies", type=int, default=estimate.DEFAULT_GRID_POINTS,
                   help="number of equispaced frequencies on [0, lambda-max]")
    p.add_argument("--estimator", choices=["daniell", "bartlett", "parzen"], default="daniell")
    p.add_argument("--truncation", type=int, default=None, help="lag-window truncation B")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("synthesize", help="model spec realising a given graph")
    p.add_argument("graph", help="graph JSON file")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("sampled", help="compare with the sampled VAR(1) graph")
    _add_model_opts(p, grid=False)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--format", choices=["dot", "json"], default="json")
    p.set_defaults(func=cmd_sampled)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"pcgraph: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvalidModelError, ParameterError) as exc:
        print(f"pcgraph: invalid model or parameters: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except PCGraphError as exc:
        print(f"pcgraph: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
