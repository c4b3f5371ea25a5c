"""Command-line front end.

One subcommand per pipeline stage; every run resolves a configuration
(bundled preset unless --config points elsewhere), echoes the effective
configuration into the output directory and prints a one-line summary.

Exit codes: 0 success, 2 missing/invalid config section, 3 numeric domain
error, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig
from .errors import ConfigError, DomainError
from . import pipeline

SUBCOMMANDS = (
    "pmf",
    "jsa",
    "schmidt",
    "optimize-pump",
    "hom",
    "rsweep",
    "g2",
    "simulate",
    "pspdc",
    "tofmap",
)

# subcommands whose default pump preset is the purity-optimized one
_DESIGN_PUMP_DEFAULT = {"jsa"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairkit",
        description="Design and analysis toolkit for quasi-phase-matched photon-pair sources",
    )
    parser.add_argument("--version", action="version", version=f"pairkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", type=Path, default=None, help="TOML run configuration")
        p.add_argument("--output-dir", type=Path, default=None)
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--seed", type=int, default=None)
        if name in ("pmf", "jsa", "schmidt", "optimize-pump", "g2", "tofmap"):
            p.add_argument("--source", choices=("top", "bot"), default="top")
            p.add_argument("--pump", default=None, help="pump preset name")
        if name == "rsweep":
            p.add_argument(
                "--sources",
                choices=("ideal", "preset"),
                default="ideal",
                help="pure identical reference sources or the modeled presets",
            )
    return parser


def _dispatch(args, cfg: RunConfig, outdir: Path, fmt: str, header) -> tuple[str, list]:
    name = args.command
    if name in ("pmf", "jsa", "schmidt", "optimize-pump", "g2", "tofmap"):
        pump = args.pump
        if pump is None:
            pump = "design" if name in _DESIGN_PUMP_DEFAULT else args.source
        runner = {
            "pmf": pipeline.run_pmf,
            "jsa": pipeline.run_jsa,
            "schmidt": pipeline.run_schmidt,
            "optimize-pump": pipeline.run_optimize_pump,
            "g2": pipeline.run_g2,
            "tofmap": pipeline.run_tofmap,
        }[name]
        if name == "pmf":
            return runner(cfg, args.source, outdir, fmt, header)
        return runner(cfg, args.source, pump, outdir, fmt, header)
    if name == "hom":
        return pipeline.run_hom(cfg, outdir, fmt, header)
    if name == "rsweep":
        return pipeline.run_rsweep(cfg, outdir, fmt, header, ideal=args.sources == "ideal")
    if name == "simulate":
        return pipeline.run_simulate(cfg, outdir, fmt, header)
    if name == "pspdc":
        return pipeline.run_pspdc(cfg, outdir, fmt, header)
    raise ConfigError(name, "unknown subcommand")


def main(argv=None) -> int:
    if "PAIRKIT_THREADS" in os.environ:
        try:
            import numba

            numba.set_num_threads(max(1, int(os.environ["PAIRKIT_THREADS"])))
        except (ImportError, ValueError):
            pass

    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        if args.output_dir is not None:
            cfg.override("output", "directory", str(args.output_dir))
        if args.format is not None:
            cfg.override("output", "format", args.format)
        if args.seed is not None:
            cfg.override("counting", "seed", args.seed)
        outdir, fmt = cfg.output()
        outdir.mkdir(parents=True, exist_ok=True)
        header = [f"pairkit {__version__} config={cfg.config_hash()}"]
        (outdir / "effective.toml").write_text(cfg.effective_toml(), encoding="utf-8")
        summary, _ = _dispatch(args, cfg, outdir, fmt, header)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ValueError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    print(summary)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
