"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 configuration/validation error,
3 runtime failure (I/O and everything else).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from importlib import resources

from .antenna import build_codebook, codebook_records, make_calibrated_pattern
from .channel import generate_channel, save_channel
from .harness import (
    ExperimentConfig,
    emit_csv,
    emit_summary_json,
    load_records_csv,
    parse_config_text,
    run_experiment,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

BUNDLED_CONFIGS = ("default", "fast")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on its own; route through UsageError so
    # usage problems map to exit code 1 instead.
    def error(self, message):
        raise UsageError(message)


def _read_config_text(name: str) -> str:
    """Either a bundled profile name ("default", "fast") or a file path."""
    if name in BUNDLED_CONFIGS and not os.path.exists(name):
        ref = resources.files("beamtrain").joinpath(f"configs/{name}.cfg")
        return ref.read_text()
    if not os.path.isfile(name):
        raise UsageError(f"config not found: {name}")
    with open(name) as f:
        return f.read()


def _load_cfg(args) -> ExperimentConfig:
    cfg = parse_config_text(_read_config_text(args.config))
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "k", None) is not None:
        cfg = replace(cfg, k_values=args.k)
    cfg.validate()
    return cfg


def _parse_k_list(raw: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in raw.split(","))
    except ValueError as exc:
        raise ValueError(f"--k: {exc}") from exc
    if len(values) == 0:
        raise ValueError("--k: expected at least one value")
    for v in values:
        if v < 1:
            raise ValueError(f"--k: values must be >= 1, got {v}")
    return values


def _run_and_emit(cfg, out_dir: str, plots: bool) -> None:
    os.makedirs(out_dir, exist_ok=True)
    records, summary = run_experiment(cfg)
    csv_path = os.path.join(out_dir, "results.csv")
    json_path = os.path.join(out_dir, "summary.json")
    emit_csv(records, csv_path)
    emit_summary_json(summary, json_path)
    written = [csv_path, json_path]
    if plots:
        from .report import render_figures  # defer the matplotlib import

        written += render_figures(records, out_dir)
    for path in written:
        print(f"wrote {path}")


def _cmd_run(args) -> int:
    cfg = _load_cfg(args)
    _run_and_emit(cfg, args.out_dir, plots=not args.no_plots)
    return EXIT_OK


def _cmd_sweep_k(args) -> int:
    args.k = _parse_k_list(args.k_raw)
    cfg = _load_cfg(args)
    _run_and_emit(cfg, args.out_dir, plots=not args.no_plots)
    return EXIT_OK


def _cmd_gen_channel(args) -> int:
    cfg = _load_cfg(args)
    ch = generate_channel(cfg.channel_params, seed=args.seed)
    save_channel(ch, args.out)
    print(f"wrote {args.out} ({len(ch.clusters)} clusters, {ch.ray_count} rays)")
    return EXIT_OK


def _cmd_codebook(args) -> int:
    import json

    cfg = _load_cfg(args)
    cb = build_codebook(math.radians(cfg.sector_width_deg), cfg.ring_sizes)
    pattern = make_calibrated_pattern(math.radians(cfg.hpbw_deg))
    doc = {
        "sector_width_deg": cfg.sector_width_deg,
        "ring_sizes": list(cfg.ring_sizes),
        "hpbw_deg": cfg.hpbw_deg,
        "peak_gain": pattern.peak_gain,
        "beams": codebook_records(cb),
    }
    with open(args.out, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")
    print(f"wrote {args.out} ({len(cb)} beams)")
    return EXIT_OK


def _cmd_report(args) -> int:
    from .report import render_figures

    records = load_records_csv(args.csv)
    out_dir = args.out_dir if args.out_dir is not None else os.path.dirname(args.csv) or "."
    os.makedirs(out_dir, exist_ok=True)
    written = render_figures(records, out_dir)
    if not written:
        raise ValueError(f"{args.csv}: no renderable records (need kbest rows)")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="beamtrain", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add_common(p):
        p.add_argument("--config", default="default",
                       help="config file path, or a bundled profile: default, fast")
        p.add_argument("--out-dir", default=".", help="directory for results (default: .)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--no-plots", action="store_true", help="skip figure rendering")

    p_run = sub.add_parser("run", help="run the configured experiment")
    add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep-k", help="run with an explicit K list")
    add_common(p_sweep)
    p_sweep.add_argument("--k", dest="k_raw", required=True,
                         help="comma-separated K values, e.g. 1,2,5,10,20,50,100")
    p_sweep.set_defaults(func=_cmd_sweep_k)

    p_gen = sub.add_parser("gen-channel", help="generate and save one channel realization")
    p_gen.add_argument("--config", default="default",
                       help="config supplying the generator parameters")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--out", required=True, help="output JSON path")
    p_gen.set_defaults(func=_cmd_gen_channel)

    p_cb = sub.add_parser("codebook", help="dump the beam codebook as JSON")
    p_cb.add_argument("--config", default="default",
                      help="config supplying sector width and ring sizes")
    p_cb.add_argument("--out", required=True, help="output JSON path")
    p_cb.set_defaults(func=_cmd_codebook)

    p_rep = sub.add_parser("report", help="re-render figures from a results.csv")
    p_rep.add_argument("--csv", required=True, help="path to a results.csv")
    p_rep.add_argument("--out-dir", default=None,
                       help="figure directory (default: alongside the CSV)")
    p_rep.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_usage(sys.stderr)
            print("error: a subcommand is required", file=sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # anything unexpected is a runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
