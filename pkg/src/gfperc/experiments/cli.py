"""Command line entry point: ``gfperc <experiment> [flags]``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import DEFAULTS, EXPERIMENTS, ConfigError, ExperimentConfig
from .plots import plot_records
from .records import manifest, now_iso, to_csv, to_json
from .runners import run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gfperc",
                                     description="Monte Carlo experiments for Gaussian field percolation.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig keys")
        p.add_argument("--seed", type=int)
        p.add_argument("--replicas", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--out", type=str)
        p.add_argument("--plot", action="store_true", help="also write an SVG figure")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--timing", action="store_true",
                       help="write wall-clock times into the data file (breaks byte reproducibility)")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    data = {"experiment": args.experiment, **DEFAULTS.get(args.experiment, {})}
    if args.config is not None:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if loaded.get("experiment", args.experiment) != args.experiment:
            raise ConfigError(f"config is for {loaded['experiment']!r}, not {args.experiment!r}")
        data.update(loaded)
    for key in ("seed", "replicas", "threads", "out", "format"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    if args.plot:
        data["plot"] = True
    if args.timing:
        data["timing"] = True
    return ExperimentConfig.from_dict(data)


def execute(cfg: ExperimentConfig) -> list[Path]:
    """Run, then write the data file, the manifest and optionally a figure."""
    started = now_iso()
    records, timings = run(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg.experiment.replace("-", "_")
    data = out / f"{stem}.{cfg.format}"
    data.write_text(to_csv(records) if cfg.format == "csv" else to_json(records))
    files = [data]
    if cfg.plot:
        fig = plot_records(records, out / f"{stem}.svg")
        if fig is not None:
            files.append(fig)
    man = out / f"{stem}.manifest.json"
    man.write_text(json.dumps(manifest(cfg, started, now_iso(), [f.name for f in files], timings),
                              indent=1))
    return files + [man]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, TypeError, ValueError, OSError) as exc:
        print(f"gfperc: error: {exc}", file=sys.stderr)
        return 2
    for path in execute(cfg):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
