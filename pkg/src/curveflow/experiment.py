"""Run configured experiments and write their artifacts."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import RunConfig
from .errors import ConfigError, CurveFlowError, MissingSnapshots, ValidationError
from .geometry import CurveState, format_float, read_curve, write_curve
from .metrics import ErrorTable, area_loss_series, convergence_table, energy_gap_series
from .plotting import evolution_svg, line_plot_svg
from .ssd import contact_angles
from .stepper import StepDiagnostics, initial_diagnostics, step

GRID_KEYS = {"scheme": "scheme", "r": "r", "beta": "gamma.beta", "gamma.beta": "gamma.beta", "dt": "dt"}


def output_root(cfg: RunConfig, out: Optional[str] = None) -> Path:
    """``--out`` wins, then ``$CURVEFLOW_OUT/<name>``, then ``output.dir``, then ``runs/<name>``."""
    if out:
        return Path(out)
    env = os.environ.get("CURVEFLOW_OUT")
    if env:
        return Path(env) / cfg.name
    if cfg.output_dir:
        return Path(cfg.output_dir)
    return Path("runs") / cfg.name


def snapshot_steps(M: int, count: int) -> list[int]:
    """``count`` snapshot indices spread evenly over ``0..M`` (first and last included)."""
    if count <= 1 or M == 0:
        return sorted({M})
    return sorted({round(k * M / (count - 1)) for k in range(count)})


def _json_value(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v) if math.isfinite(v) else "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        items = [f"{json.dumps(str(k))}: {_json_value(v[k])}" for k in sorted(v)]
        return "{" + ", ".join(items) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dump_json(path, obj) -> None:
    """Deterministic JSON with sorted keys and 17-significant-digit floats."""
    Path(path).write_text(_json_value(obj) + "\n")


def write_diagnostics(path, rows: Sequence[StepDiagnostics]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(StepDiagnostics.CSV_COLUMNS)
        for d in rows:
            w.writerow([str(v) if isinstance(v, int) else format_float(v) for v in d.csv_row()])


def read_diagnostics(path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body]) if body else np.zeros((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}


@dataclass
class RunOutcome:
    config: RunConfig
    trajectory: list[StepDiagnostics]
    final: CurveState
    summary: dict
    wall_time: float


def simulate(cfg: RunConfig, out_dir: Optional[Path] = None, dt: Optional[float] = None) -> RunOutcome:
    """Run one simulation; with ``out_dir`` also write snapshots and diagnostics."""
    start = time.perf_counter()
    state = cfg.initial_state(dt)
    M = round(cfg.T / state.dt)
    snaps = set(snapshot_steps(M, cfg.snapshots))
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        for old in out_dir.glob("curve_*.csv"):
            old.unlink()
    trajectory = [initial_diagnostics(state)]
    if out_dir is not None and 0 in snaps:
        write_curve(out_dir / "curve_0.csv", state.curve, 0.0)
    for _ in range(M):
        try:
            state, diag = step(state)
        except CurveFlowError as exc:
            raise type(exc)(f"step {state.m + 1}: {exc}") from exc
        trajectory.append(diag)
        if out_dir is not None and state.m in snaps:
            write_curve(out_dir / f"curve_{state.m}.csv", state.curve, state.t)
    summary = summarize(cfg, trajectory, state.curve, state.dt)
    wall = time.perf_counter() - start
    if out_dir is not None:
        write_diagnostics(out_dir / "diagnostics.csv", trajectory[1:])
        write_curve(out_dir / "final_curve.csv", state.curve, state.t)
        dump_json(out_dir / "summary.json", summary)
        dump_json(out_dir / "timing.json", {"wall_time_s": wall})
    return RunOutcome(cfg, trajectory, state.curve, summary, wall)


def summarize(cfg: RunConfig, trajectory: list[StepDiagnostics], final: CurveState, dt: float) -> dict:
    rel, absolute = area_loss_series(trajectory)
    gaps = energy_gap_series(trajectory)
    R = np.array([d.R for d in trajectory])
    W = np.array([d.W for d in trajectory])
    psi = np.array([d.psi for d in trajectory])
    steps = trajectory[1:]
    out = {
        "name": cfg.name,
        "config": {**cfg.as_dict(), "dt": dt},
        "n_steps": len(steps),
        "T": trajectory[-1].t,
        "R_initial": R[0],
        "R_final": R[-1],
        "W_final": W[-1],
        "W_max": float(W.max()),
        "energy_gap_max": float(gaps.max()),
        "area_initial": trajectory[0].A,
        "area_final": trajectory[-1].A,
        "area_loss_relative": float(rel[-1]),
        "area_loss_abs_max": float(absolute.max()),
        "mesh_ratio_final": psi[-1],
        "mesh_ratio_max": float(psi.max()),
        "xi_min": min((d.xi for d in steps), default=1.0),
        "xi_max": max((d.xi for d in steps), default=1.0),
        "R_increase_violations": int(np.sum(R[1:] > R[:-1] + 1e-12 * R[0])),
        "fp_iters_max": max((d.fp_iters for d in steps), default=0),
    }
    if not final.closed:
        tl, tr = contact_angles(final)
        out.update(x_l=float(final.x[0]), x_r=float(final.x[-1]), contact_angle_l=tl, contact_angle_r=tr)
    return out


def cmd_run(cfg: RunConfig, out: Optional[str] = None) -> RunOutcome:
    out_dir = output_root(cfg, out)
    outcome = simulate(cfg, out_dir)
    write_series_files(out_dir, outcome.trajectory)
    return outcome


def write_series_files(out_dir: Path, trajectory: list[StepDiagnostics]) -> None:
    t = [d.t for d in trajectory]
    rel, absolute = area_loss_series(trajectory)
    series = {
        "area_loss": rel,
        "area_loss_abs": absolute,
        "energy_gap": energy_gap_series(trajectory),
        "mesh_ratio": [d.psi for d in trajectory],
    }
    for name, values in series.items():
        lines = [f"t,{name}"] + [f"{format_float(a)},{format_float(b)}" for a, b in zip(t, values)]
        (out_dir / f"series_{name}.csv").write_text("\n".join(lines) + "\n")


# -- convergence --------------------------------------------------------------


def validate_dt_list(dt_list: Sequence[float]) -> list[float]:
    dts = [float(d) for d in dt_list]
    if len(dts) < 3:
        raise ValidationError("a convergence study needs at least 3 time steps")
    for a, b in zip(dts, dts[1:]):
        if abs(a / b - 2.0) > 1e-9:
            raise ValidationError(f"time steps must halve successively, got {a} then {b}")
    return dts


def cmd_converge(cfg: RunConfig, dt_list: Optional[Sequence[float]] = None, out: Optional[str] = None) -> ErrorTable:
    dts = validate_dt_list(dt_list if dt_list is not None else (cfg.dt_list or ()))
    for dt in dts + [dts[-1] / 2]:
        M = round(cfg.T / dt)
        if abs(M * dt - cfg.T) > 1e-9 * max(1.0, cfg.T):
            raise ConfigError(f"T = {cfg.T} is not an integer multiple of dt = {dt}")
    # every listed step is compared with a run at half that step
    runs = dts + [dts[-1] / 2]
    table = convergence_table(lambda dt: simulate(cfg, None, dt).final, runs, cfg.T, f"{cfg.scheme} r={cfg.effective_r}")
    out_dir = output_root(cfg, out)
    out_dir.mkdir(parents=True, exist_ok=True)
    table.write_csv(out_dir / "convergence.csv")
    xs = [r.dt for r in table.rows]
    line_plot_svg(
        out_dir / "convergence.svg",
        {"error": (xs, [r.error for r in table.rows])},
        title=f"temporal error, {table.label}, T={format_float(cfg.T)}",
        xlabel="dt",
        ylabel="manifold distance",
        logx=True,
        logy=True,
        markers=True,
    )
    return table


# -- sweeps -------------------------------------------------------------------


def parse_grid(items: Sequence[str]) -> dict[str, list[str]]:
    grid: dict[str, list[str]] = {}
    for item in items:
        if "=" not in item:
            raise ValidationError(f"grid entry {item!r} must look like key=v1,v2")
        key, values = item.split("=", 1)
        key = key.strip()
        if key not in GRID_KEYS:
            raise ValidationError(f"cannot sweep over {key!r}; choose from {sorted(set(GRID_KEYS))}")
        vals = [v.strip() for v in values.split(",") if v.strip()]
        if not vals:
            raise ValidationError(f"grid key {key!r} has no values")
        grid[GRID_KEYS[key]] = vals
    if not grid:
        raise ValidationError("empty parameter grid")
    return grid


def grid_points(grid: dict[str, list]) -> list[dict[str, str]]:
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in product(*(grid[k] for k in keys))]


def point_label(point: dict[str, str]) -> str:
    return "__".join(f"{k}={v}" for k, v in point.items())


def _sweep_worker(args):
    source_text, origin, name, base, point, out_dir = args
    from .config import parse_config

    try:
        overrides = {**base, **{k: str(v) for k, v in point.items()}}
        cfg = parse_config(source_text, origin, overrides, name)
        outcome = simulate(cfg, Path(out_dir))
        return point, outcome.summary, None
    except CurveFlowError as exc:
        return point, None, f"{type(exc).__name__}: {exc}"


AGGREGATE_FIELDS = (
    "n_steps", "R_final", "W_final", "energy_gap_max", "area_loss_relative",
    "area_loss_abs_max", "mesh_ratio_final", "mesh_ratio_max", "R_increase_violations",
)


def cmd_sweep(
    source_text: str,
    origin: str,
    name: str,
    grid: dict,
    out_root: Path,
    workers: Optional[int] = None,
    overrides: Optional[dict] = None,
):
    """Run every grid point in its own directory and write ``aggregate.csv``.

    Returns ``(summaries, failures)`` ordered like the grid.
    """
    points = grid_points(grid)
    if not points:
        raise ValidationError("empty parameter grid")
    out_root.mkdir(parents=True, exist_ok=True)
    jobs = [(source_text, origin, name, dict(overrides or {}), p, str(out_root / point_label(p))) for p in points]
    workers = workers or min(len(jobs), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]
    keys = list(grid)
    lines = [",".join(keys + ["status"] + list(AGGREGATE_FIELDS))]
    failures = []
    for point, summary, err in results:
        vals = [str(point[k]) for k in keys]
        if err is None:
            vals += ["ok"] + [_csv_value(summary[f]) for f in AGGREGATE_FIELDS]
        else:
            failures.append((point, err))
            vals += ["failed"] + [""] * len(AGGREGATE_FIELDS)
        lines.append(",".join(vals))
    (out_root / "aggregate.csv").write_text("\n".join(lines) + "\n")
    if failures:
        report = [f"{point_label(p)}: {e}" for p, e in failures]
        (out_root / "failures.txt").write_text("\n".join(report) + "\n")
    return results, failures


def _csv_value(v) -> str:
    return str(v) if isinstance(v, (int, np.integer)) else format_float(v)


# -- plotting -------------------------------------------------------------------


def cmd_plot(run_dir) -> list[Path]:
    run_dir = Path(run_dir)
    snaps = sorted(run_dir.glob("curve_*.csv"), key=lambda p: int(p.stem.split("_")[1]))
    if not snaps:
        raise MissingSnapshots(f"no curve_<m>.csv snapshots in {run_dir}")
    curves, labels, closed = [], [], True
    for p in snaps:
        c, t = read_curve(p)
        curves.append(c.nodes)
        labels.append(f"t = {t:.6g}")
        closed = c.closed
    written = [run_dir / "evolution.svg"]
    evolution_svg(written[0], curves, closed, labels)
    diag = run_dir / "diagnostics.csv"
    if diag.is_file():
        d = read_diagnostics(diag)
        if d["t"].size:
            t = d["t"]
            plots = {
                "energy.svg": ({"R (modified)": (t, d["R"]), "W (original)": (t, d["W_h"])}, "energy", False),
                "area.svg": ({"relative area change": (t, d["dA_rel"])}, "relative area change", False),
                "mesh_ratio.svg": ({"mesh ratio": (t, d["psi"])}, "max/min segment length", False),
                "energy_gap.svg": ({"|R - W|": (t, d["dW"])}, "|R - W|", True),
            }
            for fname, (series, ylabel, logy) in plots.items():
                line_plot_svg(run_dir / fname, series, ylabel=ylabel, logy=logy)
                written.append(run_dir / fname)
    return written
