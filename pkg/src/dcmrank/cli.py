"""Command-line entry point.

    dcmrank generate   --n 1000 --seed 7 --out runs/g
    dcmrank pagerank   --edges runs/g/edges.csv --eps0 1e-10 --out runs/g/rank.csv
    dcmrank couple     --bidegree runs/g/bidegree.csv --k 5 --seed 3 --out runs/c
    dcmrank experiment table1 --replications 100 --seed 1 --out results

Exit codes: 0 success, 2 usage/config error, 3 model error. Settings resolve
as preset < --config file < explicit flags; the resolved values are written
to the JSON sidecar of every output.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .degree_model import Algorithm1Config, BiDegreeSequence, DegreeParams, calibrate_lambda2, run_algorithm1
from .errors import ConfigError, ModelError
from .experiments import (
    PRESETS,
    ExperimentConfig,
    default_threads,
    preset,
    run_cdf_experiment,
    run_coupling_experiment,
    run_table_experiment,
    write_json,
    write_rows,
)
from .graph import MultiDigraph, build_dcm, explore_and_couple
from .pagerank import PageRankConfig, power_iterate_converged, power_iterate_k, solve_exact
from .rng import derive, fresh_seed

log = logging.getLogger("dcmrank")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; keys mirror flag names, ``#`` starts a comment."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _coerce(value, kind):
    if value is None or not isinstance(value, str):
        return value
    if kind is list:
        return [_number(v) for v in value.replace(" ", "").split(",") if v]
    return kind(value)


def _number(s):
    try:
        return int(s)
    except ValueError:
        return float(s)


def _resolve(args, base: dict, keys: dict) -> dict:
    """Merge preset < config file < flags for the names in ``keys`` (name -> type)."""
    resolved = dict(base)
    if getattr(args, "config", None):
        for key, value in read_config_file(args.config).items():
            if key == "seed" and "seed" not in keys:
                key = "master_seed"
            if key not in keys:
                raise ConfigError(f"unknown config key {key!r}")
            resolved[key] = _coerce(value, keys[key])
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


# ---------------------------------------------------------------------------


GENERATE_KEYS = {
    "n": int,
    "alpha": float,
    "beta": float,
    "lambda1": float,
    "lambda2": float,
    "delta0": float,
    "max_resamples": int,
    "seed": int,
}


def cmd_generate(args) -> int:
    cfg = _resolve(args, dict(alpha=2.0, beta=2.5, lambda1=1.0, lambda2=None, delta0=0.1, max_resamples=1000), GENERATE_KEYS)
    n = cfg.get("n")
    if n is None or n < 1:
        raise ConfigError(f"n must be a positive integer, got {n}")
    seed = cfg.get("seed")
    if seed is None:
        seed = cfg["seed"] = fresh_seed()
    params = DegreeParams(cfg["alpha"], cfg["beta"], cfg["lambda1"], cfg["lambda2"])
    if params.lambda2 is None:
        calibrate_lambda2(params)
    cfg["lambda2"] = params.lambda2
    alg1 = Algorithm1Config.for_params(params, cfg["delta0"], cfg["max_resamples"])
    bideg = run_algorithm1(n, params, alg1, derive(seed, "degrees"))
    graph = build_dcm(bideg, derive(seed, "graph"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bideg.meta = {"seed": seed, "params": params.to_dict(), "config": cfg, "attempts": bideg.meta.get("attempts")}
    bideg.to_csv(out / "bidegree.csv")
    graph.to_csv(out / "edges.csv", sidecar={"seed": seed, "root": None, "config": cfg})
    log.info("wrote %s (n=%d, L_n=%d)", out, n, bideg.total_stubs)
    return 0


PAGERANK_KEYS = {"c": float, "r0": float, "eps0": float, "max_iters": int, "k": int}


def cmd_pagerank(args) -> int:
    cfg = _resolve(args, dict(c=0.5, r0=1.0, eps0=1e-6, max_iters=10_000, k=None), PAGERANK_KEYS)
    path = Path(args.edges)
    if not path.exists():
        raise ConfigError(f"edge list not found: {path}")
    graph = MultiDigraph.from_csv(path)
    prc = PageRankConfig(cfg["c"], cfg["r0"], cfg["eps0"], cfg["max_iters"])
    if args.exact:
        rv, mode = solve_exact(graph, prc), "exact"
    elif cfg["k"] is not None:
        rv, mode = power_iterate_k(graph, prc, cfg["k"]), cfg["k"]
    else:
        rv, mode = power_iterate_converged(graph, prc), "converged"
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    rv.to_csv(out, sidecar={"c": prc.c, "r0": prc.r0, "eps0": prc.eps0, "k_or_converged": mode})
    return 0


COUPLE_KEYS = {"k": int, "seed": int}


def cmd_couple(args) -> int:
    cfg = _resolve(args, dict(k=5), COUPLE_KEYS)
    path = Path(args.bidegree)
    if not path.exists():
        raise ConfigError(f"bi-degree file not found: {path}")
    if cfg["k"] < 0:
        raise ConfigError("k must be nonnegative")
    seed = cfg.get("seed")
    if seed is None:
        seed = cfg["seed"] = fresh_seed()
    bideg = BiDegreeSequence.from_csv(path)
    graph, tree, stats = explore_and_couple(bideg, cfg["k"], derive(seed, "graph"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    graph.to_csv(out / "edges.csv", sidecar={"seed": seed, "config": cfg})
    tree.to_json(out / "tree.json")
    stats.to_json(out / "stats.json")
    return 0


EXPERIMENT_KEYS = {
    "alpha": float,
    "beta": float,
    "lambda1": float,
    "lambda2": float,
    "delta0": float,
    "max_resamples": int,
    "c": float,
    "r0": float,
    "eps0": float,
    "sizes": list,
    "k": int,
    "h": float,
    "k_values": list,
    "c_values": list,
    "replications": int,
    "master_seed": int,
    "tbt_root_samples": int,
    "threads": int,
}


def cmd_experiment(args) -> int:
    base = preset(args.preset).to_dict()
    base.update(threads=default_threads(), master_seed=None)
    args.master_seed = args.seed
    cfg_dict = _resolve(args, base, EXPERIMENT_KEYS)
    if cfg_dict["master_seed"] is None:
        cfg_dict["master_seed"] = fresh_seed()
    cfg = ExperimentConfig(**cfg_dict)
    if cfg.replications == 1 and args.preset != "cdf":
        log.warning("replications=1: standard errors and confidence intervals are undefined (NaN)")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.preset in ("table1", "table2", "table3"):
        rows = run_table_experiment(cfg)
        write_rows(rows, out / f"{args.preset}.csv", sidecar={"preset": args.preset, "config": cfg.to_dict()})
    elif args.preset == "coupling":
        rows = run_coupling_experiment(cfg, h_factor=args.h_factor)
        if rows[0].h * math.log(rows[0].mu_hat) >= 0.5:
            log.warning("h log(mu) >= 1/2: outside the regime where the break probability is guaranteed to vanish")
        write_rows(rows, out / "coupling.csv", sidecar={"preset": args.preset, "config": cfg.to_dict(), "h_factor": args.h_factor})
    else:
        results = [run_cdf_experiment(cfg, r) for r in range(args.repetitions)]
        bundle = results[0].to_dict()
        bundle["config"] = cfg.to_dict()
        bundle["repetitions"] = [{"ks_true_vs_k": r.ks_k, "ks_true_vs_tbt": r.ks_tbt} for r in results]
        write_json(bundle, out / "cdf.json")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dcmrank", description="PageRank on directed configuration models vs. coupled branching trees")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample a bi-degree sequence and a DCM graph")
    g.add_argument("--n", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--lambda1", type=float)
    g.add_argument("--lambda2", type=float, help="default: calibrated to match the in-degree mean")
    g.add_argument("--delta0", type=float)
    g.add_argument("--max-resamples", dest="max_resamples", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--config")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("pagerank", help="PageRank of a stored edge list")
    r.add_argument("--edges", required=True)
    r.add_argument("--c", type=float)
    r.add_argument("--r0", type=float)
    r.add_argument("--eps0", type=float)
    r.add_argument("--max-iters", dest="max_iters", type=int)
    mode = r.add_mutually_exclusive_group()
    mode.add_argument("--k", type=int, help="exactly k power iterations")
    mode.add_argument("--exact", action="store_true", help="dense direct solve")
    r.add_argument("--config")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_pagerank)

    c = sub.add_parser("couple", help="coupled graph exploration and thorny branching tree")
    c.add_argument("--bidegree", required=True)
    c.add_argument("--k", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--config")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_couple)

    e = sub.add_parser("experiment", help="run a numerical experiment preset")
    e.add_argument("preset", choices=sorted(PRESETS))
    for key, kind in EXPERIMENT_KEYS.items():
        if key == "master_seed":
            continue
        flag = "--" + key.replace("_", "-")
        if kind is list:
            e.add_argument(flag, dest=key, type=lambda s: _coerce(s, list))
        else:
            e.add_argument(flag, dest=key, type=kind)
    e.add_argument("--seed", type=int)
    e.add_argument("--h-factor", dest="h_factor", type=float, default=0.4, help="coupling: h = h_factor / log(mu_hat)")
    e.add_argument("--repetitions", type=int, default=1, help="cdf: independent graphs")
    e.add_argument("--config")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: UsageError: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ModelError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
