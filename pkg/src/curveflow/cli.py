"""``curveflow`` command line interface."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import load_config, parse_dt_list
from .errors import NumericalError, ValidationError
from .experiment import cmd_converge, cmd_plot, cmd_run, cmd_sweep, output_root, parse_grid, point_label
from .geometry import format_float
from .presets import PRESETS

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _overrides(pairs: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ValidationError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _run(args) -> int:
    cfg = load_config(args.config, _overrides(args.set))
    outcome = cmd_run(cfg, args.out)
    s = outcome.summary
    print(
        f"{cfg.name}: {s['n_steps']} steps, W = {s['W_final']:.10g}, R = {s['R_final']:.10g}, "
        f"area change {s['area_loss_relative']:.3e}, max mesh ratio {s['mesh_ratio_max']:.4g} "
        f"-> {output_root(cfg, args.out)}"
    )
    return EXIT_OK


def _converge(args) -> int:
    cfg = load_config(args.config, _overrides(args.set))
    dts = parse_dt_list(args.dt_list) if args.dt_list else None
    table = cmd_converge(cfg, dts, args.out)
    for row in table.rows:
        print(f"dt = {format_float(row.dt):>22}  error = {row.error:.6e}  order = {row.order:.4f}")
    return EXIT_OK


def _sweep(args) -> int:
    cfg = load_config(args.config, _overrides(args.set))
    if args.grid:
        grid = parse_grid(args.grid)
    elif args.config in PRESETS and PRESETS[args.config].grid:
        grid = parse_grid([f"{k}={','.join(str(v) for v in vals)}" for k, vals in PRESETS[args.config].grid.items()])
    else:
        raise ValidationError("no --grid given and the config has no default grid")
    if args.config in PRESETS:
        text, origin = PRESETS[args.config].text, f"preset:{args.config}"
    else:
        text, origin = Path(args.config).read_text(), args.config
    results, failures = cmd_sweep(
        text, origin, cfg.name, grid, output_root(cfg, args.out), args.workers, _overrides(args.set)
    )
    for point, summary, err in results:
        status = "ok" if err is None else f"FAILED ({err})"
        print(f"{point_label(point)}: {status}")
    return EXIT_NUMERICAL if failures else EXIT_OK


def _plot(args) -> int:
    for path in cmd_plot(args.run_dir):
        print(path)
    return EXIT_OK


def _presets(args) -> int:
    width = max(len(k) for k in PRESETS)
    for name in sorted(PRESETS):
        print(f"{name:<{width}}  {PRESETS[name].description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curveflow", description="Energy-stable parametric FEM for surface diffusion and dewetting.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="config file or preset name")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        sp.add_argument("--out", help="output directory")

    sp = sub.add_parser("run", help="run one simulation")
    common(sp)
    sp.set_defaults(func=_run)

    sp = sub.add_parser("converge", help="temporal convergence study")
    common(sp)
    sp.add_argument("--dt-list", help="comma separated halving time steps")
    sp.set_defaults(func=_converge)

    sp = sub.add_parser("sweep", help="run a parameter grid")
    common(sp)
    sp.add_argument("--grid", action="append", metavar="KEY=V1,V2", help="grid axis (scheme, r, beta, dt)")
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=_sweep)

    sp = sub.add_parser("plot", help="render SVG plots for a run directory")
    sp.add_argument("run_dir")
    sp.set_defaults(func=_plot)

    sp = sub.add_parser("presets", help="list the figure presets")
    sp.set_defaults(func=_presets)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
