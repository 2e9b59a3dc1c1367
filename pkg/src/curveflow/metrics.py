"""Curve distances, temporal error tables and per-step series."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import shapely
from shapely.geometry import Polygon

from .errors import ClippingFailure, SelfIntersecting, ValidationError, ZeroInitialArea
from .geometry import CurveState, format_float

RASTER_RESOLUTION = 4096


def region_polygon(curve: CurveState) -> np.ndarray:
    """Vertices of the enclosed region; open curves are closed along the substrate."""
    # the ring closes implicitly, so the substrate segment (x_N, 0) -> (x_0, 0) is included
    return np.asarray(curve.nodes, dtype=float)


def _shapely_polygon(curve: CurveState) -> Polygon:
    poly = Polygon(region_polygon(curve))
    if not poly.is_valid:
        raise SelfIntersecting(f"curve is not a simple polygon: {shapely.is_valid_reason(poly)}")
    return poly


@dataclass(frozen=True)
class DistanceReport:
    value: float
    fallback: bool = False
    resolution: int = 0


def _shoelace(p: np.ndarray) -> float:
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def manifold_distance_report(c1: CurveState, c2: CurveState) -> DistanceReport:
    """Symmetric-difference area ``|A1| + |A2| - 2 |A1 n A2|`` by polygon clipping.

    If clipping fails the area comes from the scanline estimate and the report is flagged.
    """
    p1, p2 = _shapely_polygon(c1), _shapely_polygon(c2)
    a1, a2 = _shoelace(region_polygon(c1)), _shoelace(region_polygon(c2))
    try:
        inter = p1.intersection(p2).area
        if not math.isfinite(inter):
            raise ClippingFailure("non-finite intersection area")
    except (shapely.errors.GEOSException, ClippingFailure) as exc:
        warnings.warn(f"polygon clipping failed ({exc}); using the scanline estimate", RuntimeWarning)
        return DistanceReport(scanline_distance(c1, c2), True, RASTER_RESOLUTION)
    return DistanceReport(max(a1 + a2 - 2.0 * inter, 0.0))


def manifold_distance(c1: CurveState, c2: CurveState) -> float:
    return manifold_distance_report(c1, c2).value


def _crossings(poly: np.ndarray, yc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(row index, x) of every boundary crossing with the scanlines ``yc``."""
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    rows, xs = [], []
    for a, b, c, d in zip(x0, y0, x1, y1):
        if b == d:
            continue
        lo, hi = min(b, d), max(b, d)
        # half-open rule so shared vertices are counted once
        i0, i1 = np.searchsorted(yc, lo, side="right"), np.searchsorted(yc, hi, side="right")
        if i0 == i1:
            continue
        y = yc[i0:i1]
        rows.append(np.arange(i0, i1))
        xs.append(a + (y - b) / (d - b) * (c - a))
    if not rows:
        return np.empty(0, dtype=int), np.empty(0)
    return np.concatenate(rows), np.concatenate(xs)


def _crossing_heights(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Heights of all pairwise edge intersections (brute force)."""
    a, b = p, np.roll(p, -1, axis=0)
    c, d = q, np.roll(q, -1, axis=0)
    r = (b - a)[:, None, :]
    s = (d - c)[None, :, :]
    w = c[None, :, :] - a[:, None, :]
    den = r[..., 0] * s[..., 1] - r[..., 1] * s[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w[..., 0] * s[..., 1] - w[..., 1] * s[..., 0]) / den
        u = (w[..., 0] * r[..., 1] - w[..., 1] * r[..., 0]) / den
        hit = (den != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
        y = a[:, None, 1] + t * r[..., 1]
    return y[hit]


def scanline_distance(c1: CurveState, c2: CurveState, resolution: int = RASTER_RESOLUTION) -> float:
    """Symmetric-difference area from ``resolution`` horizontal bands over the common bounding box.

    Bands are further split at every vertex height and at every height where
    edges of the two polygons cross, so the width function is linear inside
    each piece.  Each piece is integrated by the midpoint rule with exact covered length
    along its scanline: a point lies in the symmetric difference iff the total
    number of boundary crossings of both polygons to its left is odd.
    """
    p1, p2 = region_polygon(c1), region_polygon(c2)
    both = np.vstack([p1, p2])
    lo, hi = both.min(axis=0), both.max(axis=0)
    if hi[1] <= lo[1] or hi[0] <= lo[0]:
        return 0.0
    cuts = [np.linspace(lo[1], hi[1], resolution + 1), both[:, 1], _crossing_heights(p1, p2)]
    edges = np.unique(np.concatenate(cuts))
    yc = 0.5 * (edges[1:] + edges[:-1])
    dy = np.diff(edges)
    r1, x1 = _crossings(p1, yc)
    r2, x2 = _crossings(p2, yc)
    rows, xs = np.concatenate([r1, r2]), np.concatenate([x1, x2])
    order = np.lexsort((xs, rows))
    rows, xs = rows[order], xs[order]
    start = np.searchsorted(rows, rows, side="left")
    rank = np.arange(rows.size) - start
    sign = np.where(rank % 2 == 0, -1.0, 1.0)
    return float(np.sum(sign * xs * dy[rows]))


def resolution_bound(c1: CurveState, c2: CurveState, resolution: int = RASTER_RESOLUTION) -> float:
    both = np.vstack([region_polygon(c1), region_polygon(c2)])
    w, h = np.ptp(both, axis=0)
    return 4.0 * w * h / resolution**2


# -- temporal convergence -------------------------------------------------


@dataclass(frozen=True)
class ErrorRow:
    dt: float
    error: float
    order: float


@dataclass(frozen=True)
class ErrorTable:
    rows: tuple[ErrorRow, ...]
    T: float
    label: str = ""

    @property
    def orders(self) -> list[float]:
        return [row.order for row in self.rows[1:]]

    def write_csv(self, path) -> None:
        lines = ["dt,error,order"]
        lines += [f"{format_float(r.dt)},{format_float(r.error)},{format_float(r.order)}" for r in self.rows]
        Path(path).write_text("\n".join(lines) + "\n")


def observed_orders(dts: Sequence[float], errors: Sequence[float]) -> list[float]:
    out = [math.nan]
    for i in range(1, len(errors)):
        e0, e1 = errors[i - 1], errors[i]
        if e0 > 0 and e1 > 0 and dts[i - 1] != dts[i]:
            out.append(math.log(e0 / e1) / math.log(dts[i - 1] / dts[i]))
        else:
            out.append(math.nan)
    return out


def convergence_table(
    runner: Callable[[float], CurveState],
    dt_list: Sequence[float],
    T: float = math.nan,
    label: str = "",
    distance: Callable[[CurveState, CurveState], float] = manifold_distance,
) -> ErrorTable:
    """Errors ``e_i = M(X_{dt_i}, X_{dt_{i+1}})`` between final curves of successive runs.

    ``runner(dt)`` returns the final curve at time ``T``.  The table has one
    row per pair, labelled by the coarser step.
    """
    dt_list = [float(dt) for dt in dt_list]
    if len(dt_list) < 2:
        raise ValidationError("convergence needs at least two time steps")
    if any(b > a for a, b in zip(dt_list, dt_list[1:])):
        raise ValidationError("time steps must be nonincreasing")
    finals = [runner(dt) for dt in dt_list]
    errors = [distance(finals[i], finals[i + 1]) for i in range(len(finals) - 1)]
    dts = dt_list[:-1]
    orders = observed_orders(dts, errors)
    rows = tuple(ErrorRow(dt, e, p) for dt, e, p in zip(dts, errors, orders))
    return ErrorTable(rows, T, label)


# -- series -----------------------------------------------------------------


def area_loss_series(diags) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(relative, absolute)`` area change against the first record."""
    diags = list(diags)
    if not diags:
        raise ValidationError("empty trajectory")
    A = np.array([d.A for d in diags])
    if A[0] == 0:
        raise ZeroInitialArea("initial enclosed area is zero")
    return (A - A[0]) / A[0], np.abs(A - A[0])


def energy_gap_series(diags) -> np.ndarray:
    diags = list(diags)
    if not diags:
        raise ValidationError("empty trajectory")
    return np.array([abs(d.R - d.W) for d in diags])


def write_series(path, t: Sequence[float], values: Sequence[float], name: str) -> None:
    lines = [f"t,{name}"] + [f"{format_float(a)},{format_float(b)}" for a, b in zip(t, values)]
    Path(path).write_text("\n".join(lines) + "\n")
