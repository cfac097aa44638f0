"""``bench`` command line: run, scan and oracle subcommands."""

from __future__ import annotations

import argparse
import sys
import warnings

from .bench import (
    ConfigError,
    PipelineError,
    dissociation_scan,
    emit_report,
    load_manifest,
    parse_ini,
    prepare_hamiltonian,
    run_benchmark,
    table_text,
)

EXIT_OK, EXIT_CONFIG, EXIT_PIPELINE = 0, 2, 3


def _formats(s: str) -> list[str]:
    out = [f.strip() for f in s.split(",") if f.strip()]
    bad = set(out) - {"json", "csv", "txt"}
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s): {', '.join(sorted(bad))}")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description="VQE chemistry benchmark on a noisy simulator")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one benchmark configuration")
    run.add_argument("config")
    run.add_argument("--out", default="bench-out")
    run.add_argument("--seed", type=int)
    run.add_argument("--format", type=_formats, default=["json", "csv", "txt"])
    run.add_argument("--include-runtime", action="store_true",
                     help="add wall time to report.json (outputs stop being byte-reproducible)")

    scan = sub.add_parser("scan", help="dissociation scan over a manifest of integral files")
    scan.add_argument("config")
    scan.add_argument("--points", required=True, help="JSON manifest of R points")
    scan.add_argument("--out", default="bench-out")
    scan.add_argument("--seed", type=int)
    scan.add_argument("--repeats", type=int)
    scan.add_argument("--workers", type=int, default=1)
    scan.add_argument("--format", type=_formats, default=["json", "csv", "txt"])

    orc = sub.add_parser("oracle", help="print the FCI energy of the configured active space")
    orc.add_argument("config")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cfg = parse_ini(args.config, seed=getattr(args, "seed", None))
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        if args.command == "oracle":
            prep = prepare_hamiltonian(cfg)
            print(f"{prep.fci:.10f}")
            if cfg.reference_energy is not None:
                print(f"reference {cfg.reference_energy:.10f} difference {cfg.reference_energy - prep.fci:+.3e}")
            return EXIT_OK
        if args.command == "run":
            report = run_benchmark(cfg)
            files = emit_report(report, args.out, args.format, args.include_runtime)
        else:
            points = load_manifest(args.points)
            report = dissociation_scan(cfg, points, args.repeats, args.workers)
            files = emit_report(report, args.out, args.format)
            for f in report.failures:
                print(f"warning: R={f['label']} repeat {f['repeat']} failed: {f['error']}", file=sys.stderr)
        sys.stdout.write(table_text(report))
        print(f"wrote {len(files)} files to {args.out} in {report.runtime:.2f} s", file=sys.stderr)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PipelineError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
