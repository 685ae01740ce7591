"""Command line entry point: ``gflattice {run,scan,compare,geometry}``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from typing import List, Optional

from .config import RunEngine, load_config, with_seed
from .errors import IntegrationError, ValidationError
from .io import compare
from .lattice import GeometrySpec, coupling_from_spacing, spacing_profile
from .runner import OUT_ENV, resolve_output_dir, run

log = logging.getLogger("gflattice")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gflattice", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    for name, help_ in (("run", "run the engine named in the config"),
                        ("scan", "run the config's [scan] section")):
        r = sub.add_parser(name, help=help_)
        r.add_argument("--config", required=True)
        r.add_argument("--seed", type=_seed, help="overrides run.seed")
        r.add_argument("--threads", type=int, default=1, help="worker threads, 0 = all CPUs")
        r.add_argument("--out", help=f"output directory (default: output.directory, ${OUT_ENV}, ./gflattice-out)")

    c = sub.add_parser("compare", help="per-column differences of two CSV files")
    c.add_argument("file_a")
    c.add_argument("file_b")
    c.add_argument("--tol", type=float, default=0.0)

    g = sub.add_parser("geometry", help="print the spacing and coupling table")
    g.add_argument("--config", help="config with [lattice] and [geometry] sections")
    g.add_argument("--d1", type=float)
    g.add_argument("--s", type=float)
    g.add_argument("--c1", type=float, default=1.0)
    g.add_argument("--sites", type=int, default=10)
    return p


def _geometry(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        if cfg.geometry is None:
            raise ValidationError("missing section [geometry]")
        geom, c1, sites = cfg.geometry, cfg.lattice.coupling_c1, cfg.lattice.num_sites
    else:
        if args.d1 is None or args.s is None:
            raise ValidationError("geometry needs --config or both --d1 and --s")
        geom, c1, sites = GeometrySpec(args.d1, args.s), args.c1, args.sites
    print("m,d_m,C_m")
    for m in range(1, sites):
        d = spacing_profile(geom, m)
        print(f"{m},{d:.17g},{coupling_from_spacing(geom, c1, d):.17g}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "compare":
            report = compare(args.file_a, args.file_b, args.tol)
            print(report.format())
            return EXIT_OK if report.passed else EXIT_FAIL
        if args.command == "geometry":
            return _geometry(args)

        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = with_seed(cfg, args.seed)
        if args.command == "scan":
            if cfg.scan is None:
                raise ValidationError("missing section [scan]")
            cfg = replace(cfg, run=replace(cfg.run, engine=RunEngine.SCAN))
        result = run(cfg, resolve_output_dir(cfg, args.out), args.threads)
        for path in result.files + [result.manifest]:
            print(path)
        return EXIT_OK
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegrationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
