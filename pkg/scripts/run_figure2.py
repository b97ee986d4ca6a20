"""Empirical PageRank distributions on one n = 100 graph: converged, k-step, and TBT roots.

Writes the three sorted samples and both KS distances per repetition to
cdf.json; plotting is left to whatever tool reads that file.

    python scripts/run_figure2.py --seed 0 --repetitions 20
"""
import argparse
import logging
from pathlib import Path

from dcmrank.experiments import preset, run_cdf_experiment, write_json


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repetitions", type=int, default=20)
    ap.add_argument("--roots", type=int, default=1000)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    cfg = preset("cdf", master_seed=args.seed, tbt_root_samples=args.roots)
    results = [run_cdf_experiment(cfg, r) for r in range(args.repetitions)]
    good = 0
    for i, r in enumerate(results):
        ok = r.ks_k <= 0.05 and r.ks_tbt <= 0.15
        good += ok
        logging.info("rep %2d  KS(true, k-iter)=%.3f  KS(true, TBT)=%.3f  %s", i, r.ks_k, r.ks_tbt, "ok" if ok else "outside")
    logging.info("%d/%d repetitions within both bounds", good, len(results))
    write_json({"config": cfg.to_dict(), "repetitions": [r.to_dict() for r in results]}, Path(args.out) / "cdf.json")


if __name__ == "__main__":
    main()
