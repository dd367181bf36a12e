"""Run every experiment with its default configuration.

    python scripts/run_all.py --out results --replicas 200

Writes one CSV, one manifest and (with ``--plot``) one SVG per experiment.
"""
import argparse
import time

from gfperc.experiments import EXPERIMENTS, default_config
from gfperc.experiments.cli import execute


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--replicas", type=int, help="override every experiment's replica count")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--plot", action="store_true")
    ap.add_argument("--only", nargs="*", choices=EXPERIMENTS)
    args = ap.parse_args()
    for name in args.only or EXPERIMENTS:
        over = {"out": args.out, "threads": args.threads, "seed": args.seed, "plot": args.plot}
        if args.replicas is not None and name not in ("sample", "validate-kernel", "qi-vectors"):
            over["replicas"] = args.replicas
        t = time.perf_counter()
        files = execute(default_config(name, **over))
        print(f"{name:16s} {time.perf_counter() - t:8.1f}s  {files[0]}")


if __name__ == "__main__":
    main()
