"""eglab command line.

Exit codes: 0 = ran (divergence included), 1 = config error, 2 = internal numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..egsolve import NumericOverflowError
from ..linop import DecompositionError
from ..stepan import SWEEP_COLUMNS, RoucheUndefinedError, fmt_float
from .commands import dumps, cmd_analyze, cmd_classify, cmd_solve, cmd_sweep
from .config import ConfigError, load_config
from .reproduce import CASES, reproduce

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _print_json(obj) -> None:
    print(dumps(obj))


def _out(args, cfg=None) -> Path | None:
    if args.out:
        return Path(args.out)
    if cfg is not None and cfg.out_dir:
        return Path(cfg.out_dir)
    return None


def _load(args):
    if not args.config:
        raise ConfigError("--config", "required for this subcommand")
    cfg = load_config(args.config, args.seed)
    if args.format:
        from dataclasses import replace

        cfg = replace(cfg, formats=(args.format,))
    return cfg


def _analysis_params(args):
    mu, L, gmax, grid = args.mu, args.L, args.gamma_max, args.grid_size
    formats = (args.format,) if args.format else ("csv", "json")
    if args.config:
        cfg = _load(args)
        a = cfg.analysis
        if a.mode != "override":
            raise ConfigError("analysis", "analyze/sweep from a config needs explicit mu and L")
        mu = a.mu if mu is None else mu
        L = a.L if L is None else L
        gmax = a.gamma_max if gmax is None else gmax
        grid = a.grid_size if grid is None else grid
        formats = cfg.formats
    if mu is None or L is None:
        raise ConfigError("--mu/--L", "both constants are required")
    if mu < 0 or L < 0:
        raise ConfigError("--mu/--L", "must be non-negative")
    gmax = 1.0 if gmax is None else gmax
    grid = 1000 if grid is None else grid
    if gmax <= 0 or grid < 1:
        raise ConfigError("--gamma-max/--grid-size", "gamma_max must be > 0 and grid_size >= 1")
    return mu, L, gmax, grid, formats


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eglab", description="Extragradient on hypomonotone operators.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="experiment config (JSON)")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--format", choices=("csv", "json"), help="restrict emitted formats")

    common(sub.add_parser("classify", help="certify monotonicity class and constants"))
    common(sub.add_parser("solve", help="run the extragradient iteration"))
    for name, hlp in (("analyze", "step-size polynomial analysis"), ("sweep", "q(gamma) table over a grid")):
        sp = sub.add_parser(name, help=hlp)
        common(sp)
        sp.add_argument("--mu", type=float)
        sp.add_argument("--L", type=float)
        sp.add_argument("--gamma-max", type=float)
        sp.add_argument("--grid-size", type=int)
    sp = sub.add_parser("reproduce", help="canned reproduction cases")
    sp.add_argument("case", help=f"one of: {', '.join(CASES)}")
    common(sp, config=False)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "classify":
            cfg = _load(args)
            _print_json(cmd_classify(cfg, _out(args, cfg)))
        elif args.command == "solve":
            cfg = _load(args)
            _print_json(cmd_solve(cfg, _out(args, cfg)))
        elif args.command == "analyze":
            mu, L, gmax, grid, formats = _analysis_params(args)
            _print_json(cmd_analyze(mu, L, gmax, grid, _out(args), formats))
        elif args.command == "sweep":
            mu, L, gmax, grid, _ = _analysis_params(args)
            rows = cmd_sweep(mu, L, gmax, grid, _out(args))
            if _out(args) is None:
                print(",".join(SWEEP_COLUMNS))
                for r in rows:
                    print(f"{fmt_float(r.gamma)},{fmt_float(r.q)},{fmt_float(r.P)},{str(r.contractive).lower()},{fmt_float(r.amp_witness)}")
        elif args.command == "reproduce":
            if args.case not in CASES:
                print(f"unknown case {args.case!r}; valid cases: {', '.join(CASES)}", file=sys.stderr)
                return EXIT_CONFIG
            out = Path(args.out) if args.out else Path("reproduce_out") / args.case
            checks = reproduce(args.case, out)
            for c in checks:
                print(c.line())
            print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed; outputs in {out}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericOverflowError, DecompositionError, RoucheUndefinedError, FloatingPointError, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
