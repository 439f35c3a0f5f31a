"""Command-line interface: generate, estimate, eval, sweep, stocks.

Exit codes: 0 success, 2 invalid input, 3 solver hit the iteration cap,
4 I/O failure, 5 line search stalled.
"""

import argparse
import csv
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .datagen import (
    GenerationError,
    default_edge_prob,
    erdos_renyi_weighted,
    sample_covariance,
    sample_lggm,
)
from .ingest import IngestError, covariance_from_returns, load_prices, load_sectors, log_returns
from .io import (
    FormatError,
    read_edge_list,
    read_matrix,
    write_edge_list,
    write_matrix,
    write_run_record,
)
from .laplacian_ops import vertex_pairs
from .metrics import DEFAULT_THRESHOLD, edge_set_from_weights, f_score, modularity
from .objective import SampleCovariance
from .solver import (
    CONVERGED,
    DEFAULT_STARTS,
    LINE_SEARCH_STALLED,
    MAX_ITERATIONS,
    SolverConfig,
    check_budget,
    solve,
)

logger = logging.getLogger("sparselap")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_MAX_ITER = 3
EXIT_IO = 4
EXIT_STALLED = 5

_STATUS_EXIT = {CONVERGED: EXIT_OK, MAX_ITERATIONS: EXIT_MAX_ITER, LINE_SEARCH_STALLED: EXIT_STALLED}


class InvalidInput(Exception):
    pass


def _solver_summary(result):
    return {
        "status": result.status,
        "iterations": result.iterations,
        "objective": result.objective,
        "final_gradient_mapping_norm": result.final_gradient_mapping_norm,
        "start": result.start,
        "num_edges": int(np.count_nonzero(result.x)),
    }


def _config_echo(cfg, starts):
    return {
        "s": cfg.s, "sigma": cfg.sigma, "beta": cfg.beta, "alpha": cfg.alpha,
        "tol": cfg.tol, "max_iter": cfg.max_iter, "m_max": cfg.m_max,
        "starts": list(starts),
    }


def cmd_generate(p, n, seed, out_dir, edge_prob=None, weight_low=2.0, weight_high=5.0):
    """Write ``truth.tsv``, ``samples.txt`` and ``covariance.txt`` to ``out_dir``."""
    graph_seed, sample_seed = np.random.SeedSequence(seed).spawn(2)
    graph = erdos_renyi_weighted(p, edge_prob, weight_low, weight_high, seed=graph_seed)
    samples = sample_lggm(graph, n, seed=sample_seed)
    S = sample_covariance(samples)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "truth": out / "truth.tsv",
        "samples": out / "samples.txt",
        "covariance": out / "covariance.txt",
    }
    write_edge_list(paths["truth"], graph.weights, s=graph.num_edges, threshold=0.0)
    write_matrix(paths["samples"], samples.samples, n=samples.n)
    write_matrix(paths["covariance"], S.matrix, n=S.n)
    return graph, paths


def load_covariance(covariance_path=None, samples_path=None):
    if (covariance_path is None) == (samples_path is None):
        raise InvalidInput("give exactly one of a covariance file or a samples file")
    if covariance_path is not None:
        M, n = read_matrix(covariance_path)
        if M.shape[0] != M.shape[1]:
            raise FormatError(f"{covariance_path}: covariance must be square, got {M.shape}")
        return SampleCovariance(M, n=n)
    Y, _ = read_matrix(samples_path)
    return sample_covariance(Y)


def cmd_estimate(S, cfg, out_path, starts=DEFAULT_STARTS, threshold=DEFAULT_THRESHOLD,
                 record_path=None, extra=None):
    """Solve, write the edge list and a run record; return ``(result, record)``."""
    t0 = time.perf_counter()
    result = solve(S, cfg, starts=starts)
    elapsed = time.perf_counter() - t0
    write_edge_list(out_path, result.x, s=cfg.s, threshold=threshold)
    record = {
        "command": "estimate",
        "config": {**_config_echo(cfg, starts), "threshold": threshold, "p": S.p, "n": S.n},
        "solver": _solver_summary(result),
        "metrics": {},
        "duration_seconds": elapsed,
        "version": __version__,
        **(extra or {}),
    }
    if record_path is None:
        record_path = Path(str(out_path) + ".json")
    write_run_record(record_path, record)
    return result, record


def cmd_eval(estimate_path, truth_path=None, sectors_path=None):
    """F-score against a ground truth, or modularity under a sector labeling."""
    if (truth_path is None) == (sectors_path is None):
        raise InvalidInput("give exactly one of --truth or --sectors")
    est = read_edge_list(estimate_path)
    report = {"estimate": str(estimate_path), "p": est.p}
    if truth_path is not None:
        truth = read_edge_list(truth_path)
        if truth.p != est.p:
            raise InvalidInput(f"vertex counts differ: truth p={truth.p}, estimate p={est.p}")
        report.update(truth=str(truth_path), f_score=f_score(truth.edge_set, est.edge_set))
    else:
        labels = load_sectors(sectors_path)
        if len(labels) != est.p:
            raise InvalidInput(f"{len(labels)} sector rows for p={est.p} vertices")
        report.update(sectors=str(sectors_path),
                      modularity=modularity(est.weights, [sector for _, sector in labels]))
    return report


def _sweep_trial(args):
    trial, n_values, p, edge_prob, weight_low, weight_high, seed, solver_kwargs, starts = args
    trial_seq = np.random.SeedSequence(seed, spawn_key=(trial,))
    graph_seed, *sample_seeds = trial_seq.spawn(1 + len(n_values))
    graph = erdos_renyi_weighted(p, edge_prob, weight_low, weight_high, seed=graph_seed)
    truth = edge_set_from_weights(graph.weights, threshold=0.0)
    cfg = SolverConfig(s=graph.num_edges, **solver_kwargs)
    scores = []
    for n, sample_seed in zip(n_values, sample_seeds):
        S = sample_covariance(sample_lggm(graph, n, seed=sample_seed))
        result = solve(S, cfg, starts=starts)
        scores.append(f_score(truth, edge_set_from_weights(result.x)))
    return trial, scores


def cmd_sweep(p, sample_sizes, trials, seed, out_csv=None, edge_prob=None, weight_low=2.0,
              weight_high=5.0, workers=None, solver_kwargs=None, starts=DEFAULT_STARTS):
    """F-score against sample size, averaged over Monte-Carlo trials.

    Each trial draws one graph and, for every sample size, an independent
    sample set from it; the budget is the true edge count.

    Returns
    -------
    list of dict
        One row per sample size with ``fs_mean``, ``fs_std`` (ddof=1 when
        ``trials > 1``), ``fs_min`` and ``fs_max``.
    """
    if trials < 1:
        raise InvalidInput(f"trials must be >= 1, got {trials}")
    n_values = [int(n) for n in sample_sizes]
    if not n_values or min(n_values) < 1:
        raise InvalidInput("sample sizes must be positive")
    if edge_prob is None:
        edge_prob = default_edge_prob(p)
    jobs = [(t, n_values, p, edge_prob, weight_low, weight_high, seed, solver_kwargs or {}, tuple(starts))
            for t in range(trials)]
    workers = workers or os.cpu_count() or 1
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=min(workers, trials)) as pool:
            outputs = list(pool.map(_sweep_trial, jobs))
    else:
        outputs = [_sweep_trial(job) for job in jobs]
    scores = np.array([s for _, s in sorted(outputs)])

    rows = []
    for col, n in enumerate(n_values):
        fs = scores[:, col]
        rows.append({
            "p": p, "n": n, "trials": trials, "edge_prob": edge_prob,
            "fs_mean": float(fs.mean()),
            "fs_std": float(fs.std(ddof=1)) if trials > 1 else 0.0,
            "fs_min": float(fs.min()), "fs_max": float(fs.max()),
        })
    if out_csv is not None:
        with open(out_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return rows


def cmd_stocks(prices_path, sectors_path, s, out_dir, solver_kwargs=None, starts=DEFAULT_STARTS,
               demean=True, standardize=True, drop_bad_rows=False, threshold=DEFAULT_THRESHOLD):
    """Prices and sectors in; edge lists, covariance, sector table and run record out."""
    prices = load_prices(prices_path, drop_bad_rows=drop_bad_rows)
    sectors = load_sectors(sectors_path, tickers=prices.tickers)
    X = log_returns(prices)
    S = covariance_from_returns(X, demean=demean, standardize=standardize)
    cfg = SolverConfig(s=s, **(solver_kwargs or {}))
    check_budget(cfg.s, S.p)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "covariance.txt", S.matrix, n=S.n)
    with open(out / "sectors.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ticker", "sector"])
        writer.writerows(sectors)

    labels = [sector for _, sector in sectors]
    result, record = cmd_estimate(
        S, cfg, out / "edges.tsv", starts=starts, threshold=threshold,
        record_path=out / "record.json",
        extra={"command": "stocks", "inputs": {
            "prices": str(prices_path), "sectors": str(sectors_path),
            "demean": demean, "standardize": standardize, "drop_bad_rows": drop_bad_rows,
            "observations": int(S.n), "tickers": len(prices.tickers),
        }},
    )
    q = modularity(result.x, labels)

    rows, cols = vertex_pairs(S.p)
    intra = inter = 0
    with open(out / "edges_annotated.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("i\tj\tweight\tticker_i\tticker_j\tsector_i\tsector_j\tkind\n")
        for k in np.flatnonzero(result.x > threshold):
            i, j = rows[k], cols[k]
            same = labels[i] == labels[j]
            intra += same
            inter += not same
            fh.write(f"{i + 1}\t{j + 1}\t{result.x[k]:.17g}\t{prices.tickers[i]}\t{prices.tickers[j]}"
                     f"\t{labels[i]}\t{labels[j]}\t{'intra' if same else 'inter'}\n")

    record["metrics"] = {"modularity": q, "intra_sector_edges": intra, "inter_sector_edges": inter}
    write_run_record(out / "record.json", record)
    return result, record


# -- argument parsing ---------------------------------------------------------


def _add_solver_flags(parser):
    g = parser.add_argument_group("solver")
    g.add_argument("--s", type=int, required=True, help="edge budget")
    g.add_argument("--sigma", type=float, default=1.0, help="initial step size")
    g.add_argument("--beta", type=float, default=0.5, help="backtracking factor in (0, 1)")
    g.add_argument("--alpha", type=float, default=1e-4, help="sufficient-decrease constant in (0, 1)")
    g.add_argument("--tol", type=float, default=1e-6, help="gradient-mapping tolerance")
    g.add_argument("--max-iter", type=int, default=10000)
    g.add_argument("--m-max", type=int, default=60, help="backtracking steps per iteration")
    _add_starts_flag(g)
    g.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="weights at or below this are not reported as edges")


def _add_starts_flag(parser):
    parser.add_argument("--starts", default=",".join(DEFAULT_STARTS),
                        help="comma-separated starting points: dense, greedy (default: %(default)s)")


def _solver_kwargs(args):
    return {"sigma": args.sigma, "beta": args.beta, "alpha": args.alpha, "tol": args.tol,
            "max_iter": args.max_iter, "m_max": args.m_max}


def _starts(args):
    return tuple(name.strip() for name in args.starts.split(",") if name.strip())


def _add_graph_flags(parser):
    parser.add_argument("--p", type=int, required=True, help="number of vertices")
    parser.add_argument("--edge-prob", type=float, default=None,
                        help="Erdos-Renyi edge probability (default: 2 ln(p)/p)")
    parser.add_argument("--weight-low", type=float, default=2.0)
    parser.add_argument("--weight-high", type=float, default=5.0)
    parser.add_argument("--seed", type=int, required=True)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sparselap", description="Sparse graph Laplacian estimation under an edge budget.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="draw an Erdos-Renyi graph and samples")
    _add_graph_flags(p)
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("estimate", help="estimate a sparse graph from a covariance or samples")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--covariance")
    src.add_argument("--samples")
    _add_solver_flags(p)
    p.add_argument("--out", required=True, help="edge-list output path")
    p.add_argument("--record", default=None, help="run-record path (default: <out>.json)")

    p = sub.add_parser("eval", help="F-score against a truth, or modularity under sectors")
    p.add_argument("--estimate", required=True)
    ref = p.add_mutually_exclusive_group(required=True)
    ref.add_argument("--truth")
    ref.add_argument("--sectors", help="ticker,sector file whose rows are vertices 1..p in order")
    p.add_argument("--out", default=None, help="also write the report as JSON")

    p = sub.add_parser("sweep", help="mean F-score against sample size")
    _add_graph_flags(p)
    p.add_argument("--sample-sizes", required=True, help="comma-separated, e.g. 30,300,3000")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--workers", type=int, default=None, help="parallel trials (default: CPU count)")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=1e-4)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--m-max", type=int, default=60)
    _add_starts_flag(p)
    p.add_argument("--out", required=True, help="CSV output path")

    p = sub.add_parser("stocks", help="closing prices to a sector-annotated stock graph")
    p.add_argument("--prices", required=True)
    p.add_argument("--sectors", required=True)
    _add_solver_flags(p)
    p.add_argument("--demean", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True,
                   help="scale returns to unit variance (correlation matrix)")
    p.add_argument("--drop-bad-rows", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _run(args):
    if args.command == "generate":
        graph, paths = cmd_generate(args.p, args.n, args.seed, args.out, args.edge_prob,
                                    args.weight_low, args.weight_high)
        print(f"p={graph.p} edges={graph.num_edges} n={args.n}")
        for path in paths.values():
            print(path)
        return EXIT_OK

    if args.command == "estimate":
        S = load_covariance(args.covariance, args.samples)
        cfg = SolverConfig(s=args.s, **_solver_kwargs(args))
        check_budget(cfg.s, S.p)
        result, _ = cmd_estimate(S, cfg, args.out, starts=_starts(args), threshold=args.threshold,
                                 record_path=args.record)
        print(f"status={result.status} iterations={result.iterations} "
              f"objective={result.objective:.12g} edges={np.count_nonzero(result.x > args.threshold)}")
        return _STATUS_EXIT[result.status]

    if args.command == "eval":
        report = cmd_eval(args.estimate, truth_path=args.truth, sectors_path=args.sectors)
        for key, value in report.items():
            print(f"{key}: {value}")
        if args.out:
            write_run_record(args.out, {"command": "eval", **report})
        return EXIT_OK

    if args.command == "sweep":
        sizes = [int(v) for v in args.sample_sizes.split(",") if v.strip()]
        rows = cmd_sweep(args.p, sizes, args.trials, args.seed, args.out, args.edge_prob,
                         args.weight_low, args.weight_high, args.workers,
                         _solver_kwargs(args), _starts(args))
        for row in rows:
            print(f"n={row['n']} fs_mean={row['fs_mean']:.4f} fs_std={row['fs_std']:.4f}")
        return EXIT_OK

    if args.command == "stocks":
        result, record = cmd_stocks(args.prices, args.sectors, args.s, args.out, _solver_kwargs(args),
                                    _starts(args), args.demean, args.standardize, args.drop_bad_rows,
                                    args.threshold)
        m = record["metrics"]
        print(f"status={result.status} modularity={m['modularity']:.4f} "
              f"intra={m['intra_sector_edges']} inter={m['inter_sector_edges']}")
        return _STATUS_EXIT[result.status]

    raise AssertionError(args.command)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InvalidInput, FormatError, IngestError, GenerationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
