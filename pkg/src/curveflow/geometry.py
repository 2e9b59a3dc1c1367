"""Polygonal curves and their discrete geometry.

Segment ``k`` joins node ``k`` to node ``k + 1``.  A closed curve stores ``N``
distinct nodes and its last segment wraps back to node 0; an open curve on the
substrate stores ``N + 1`` nodes whose two endpoints lie on ``y = 0``.

Normals follow ``n = -tau^perp`` with ``(a, b)^perp = (-b, a)``, so they point
outward for counterclockwise closed curves.  Angles are the inclination of the
tangent, ``atan2(tau_y, tau_x)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import BadShapeParams, DegenerateSegment, DimensionMismatch, ValidationError

DEGENERATE_RTOL = 1e-14


class Topology(str, enum.Enum):
    CLOSED = "closed"
    OPEN = "open"


@dataclass(frozen=True, eq=False)
class CurveState:
    """Node coordinates of one polygonal curve at one time level."""

    nodes: np.ndarray
    topology: Topology = Topology.CLOSED

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise DimensionMismatch(f"nodes must have shape (n, 2), got {nodes.shape}")
        if nodes.shape[0] < 3:
            raise ValidationError(f"a curve needs at least 3 nodes, got {nodes.shape[0]}")
        if not np.all(np.isfinite(nodes)):
            raise ValidationError("node coordinates must be finite")
        topology = Topology(self.topology)
        if topology is Topology.OPEN:
            if nodes[0, 1] != 0.0 or nodes[-1, 1] != 0.0:
                raise ValidationError("open curve endpoints must lie exactly on y = 0")
            if not nodes[0, 0] < nodes[-1, 0]:
                raise ValidationError("open curve needs x_0 < x_N")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "topology", topology)

    @property
    def closed(self) -> bool:
        return self.topology is Topology.CLOSED

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_segments(self) -> int:
        return self.n_nodes if self.closed else self.n_nodes - 1

    @property
    def x(self) -> np.ndarray:
        return self.nodes[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.nodes[:, 1]

    def with_nodes(self, nodes) -> "CurveState":
        return CurveState(nodes, self.topology)

    def __repr__(self):
        return f"CurveState({self.topology.value}, n_nodes={self.n_nodes})"


@dataclass(frozen=True, eq=False)
class SegmentFrame:
    lengths: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    angles: np.ndarray
    closed: bool = True

    @property
    def n_segments(self) -> int:
        return self.lengths.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.n_segments if self.closed else self.n_segments + 1


def segment_vectors(nodes: np.ndarray, closed: bool) -> np.ndarray:
    """Edge vectors ``h_k = X_{k+1} - X_k``."""
    if closed:
        return np.roll(nodes, -1, axis=0) - nodes
    return nodes[1:] - nodes[:-1]


def perp(v: np.ndarray) -> np.ndarray:
    """Rotate vectors by +90 degrees: (a, b) -> (-b, a)."""
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


def segment_frame(curve: CurveState) -> SegmentFrame:
    h = segment_vectors(curve.nodes, curve.closed)
    lengths = np.hypot(h[:, 0], h[:, 1])
    total = lengths.sum()
    if not total > 0 or lengths.min() < DEGENERATE_RTOL * total:
        k = int(np.argmin(lengths))
        raise DegenerateSegment(f"segment {k} has length {lengths[k]:.3e} (perimeter {total:.3e})")
    tangents = h / lengths[:, None]
    normals = -perp(tangents)
    angles = np.arctan2(tangents[:, 1], tangents[:, 0])
    return SegmentFrame(lengths, tangents, normals, angles, curve.closed)


def perimeter(curve: CurveState) -> float:
    h = segment_vectors(curve.nodes, curve.closed)
    return float(np.hypot(h[:, 0], h[:, 1]).sum())


def enclosed_area(curve: CurveState) -> float:
    """Signed enclosed area.

    Closed curves: positive when counterclockwise.  Open curves: area between
    the curve and the substrate, positive when the curve runs left to right
    above ``y = 0`` (the return path along the substrate contributes nothing).
    """
    x, y = curve.x, curve.y
    if curve.closed:
        x1, y1 = np.roll(x, -1), np.roll(y, -1)
        return float(-0.5 * np.sum((x1 - x) * (y + y1)))
    return float(0.5 * np.sum((x[1:] - x[:-1]) * (y[:-1] + y[1:])))


def mesh_ratio(curve: CurveState) -> float:
    lengths = segment_frame(curve).lengths
    return float(lengths.max() / lengths.min())


def _end_values(u: np.ndarray, kind: str, frame: SegmentFrame):
    """Return (value at left end, value at right end) of every segment."""
    u = np.asarray(u, dtype=float)
    n = frame.n_segments
    if kind == "segment":
        if u.shape[0] != n:
            raise DimensionMismatch(f"segment field needs {n} entries, got {u.shape[0]}")
        return u, u
    if kind != "node":
        raise ValueError(f"unknown field kind {kind!r}")
    if u.shape[0] != frame.n_nodes:
        raise DimensionMismatch(f"nodal field needs {frame.n_nodes} entries, got {u.shape[0]}")
    if frame.closed:
        return u, np.roll(u, -1, axis=0)
    return u[:-1], u[1:]


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim == 1 and b.ndim == 1:
        return a * b
    if a.ndim == 2 and b.ndim == 2:
        return np.einsum("ij,ij->i", a, b)
    raise DimensionMismatch("cannot pair a scalar field with a vector field")


def lumped_inner(u, v, frame: SegmentFrame, u_kind: str = "node", v_kind: str = "node") -> float:
    """Mass-lumped L2 pairing of two piecewise linear or piecewise constant fields."""
    ul, ur = _end_values(u, u_kind, frame)
    vl, vr = _end_values(v, v_kind, frame)
    return float(0.5 * np.sum(frame.lengths * (_dot(ur, vr) + _dot(ul, vl))))


def stiffness_pairing(u, v, frame: SegmentFrame) -> float:
    """Sum over segments of ``du * dv / |h|`` for nodal fields ``u`` and ``v``."""
    ul, ur = _end_values(u, "node", frame)
    vl, vr = _end_values(v, "node", frame)
    return float(np.sum(_dot(ur - ul, vr - vl) / frame.lengths))


# -- initial shapes -------------------------------------------------------


@dataclass(frozen=True)
class Ellipse:
    a: float = 2.0
    b: float = 1.0


@dataclass(frozen=True)
class SemiEllipse:
    a: float = 2.0
    b: float = 1.0


@dataclass(frozen=True)
class Rectangle:
    width: float
    height: float


@dataclass(frozen=True)
class OpenRectangle:
    """Three sides of a rectangle standing on the substrate."""

    width: float
    height: float


@dataclass(frozen=True)
class NodeList:
    points: Sequence[Sequence[float]] = field(default_factory=list)
    topology: Topology = Topology.CLOSED


ShapeSpec = Union[Ellipse, SemiEllipse, Rectangle, OpenRectangle, NodeList]


def _split_counts(lengths: Sequence[float], n: int) -> list[int]:
    """Split ``n`` segments over edges proportionally, at least one per edge."""
    if n < len(lengths):
        raise BadShapeParams(f"need at least {len(lengths)} segments, got {n}")
    total = float(sum(lengths))
    exact = [n * L / total for L in lengths]
    counts = [max(1, int(math.floor(e))) for e in exact]
    # largest remainder, ties broken by edge order
    while sum(counts) < n:
        k = max(range(len(counts)), key=lambda i: (exact[i] - counts[i], -i))
        counts[k] += 1
    while sum(counts) > n:
        k = max((i for i in range(len(counts)) if counts[i] > 1), key=lambda i: (counts[i] - exact[i], -i))
        counts[k] -= 1
    return counts


def _polyline(corners: np.ndarray, counts: Sequence[int]) -> list:
    pts = []
    for (p, q), m in zip(zip(corners[:-1], corners[1:]), counts):
        for i in range(m):
            pts.append(p + (q - p) * (i / m))
    return pts


def initial_shape(shape: ShapeSpec, n: int) -> CurveState:
    """Sample an initial curve with ``n`` segments."""
    if isinstance(shape, NodeList):
        return CurveState(np.asarray(shape.points, dtype=float), shape.topology)
    dims = [v for v in vars(shape).values()]
    if any(not (d > 0 and math.isfinite(d)) for d in dims):
        raise BadShapeParams(f"shape dimensions must be positive, got {shape}")
    if isinstance(shape, Ellipse):
        if n < 3:
            raise BadShapeParams("a closed curve needs N >= 3")
        t = 2 * np.pi * np.arange(n) / n
        return CurveState(np.column_stack([shape.a * np.cos(t), shape.b * np.sin(t)]))
    if isinstance(shape, SemiEllipse):
        if n < 2:
            raise BadShapeParams("an open curve needs N >= 2")
        t = np.pi - np.pi * np.arange(n + 1) / n
        nodes = np.column_stack([shape.a * np.cos(t), shape.b * np.sin(t)])
        nodes[0] = (-shape.a, 0.0)
        nodes[-1] = (shape.a, 0.0)
        return CurveState(nodes, Topology.OPEN)
    if isinstance(shape, Rectangle):
        w, h = shape.width / 2, shape.height / 2
        corners = np.array([(-w, -h), (w, -h), (w, h), (-w, h), (-w, -h)])
        counts = _split_counts([shape.width, shape.height, shape.width, shape.height], n)
        return CurveState(np.array(_polyline(corners, counts)))
    if isinstance(shape, OpenRectangle):
        w, h = shape.width / 2, shape.height
        corners = np.array([(-w, 0.0), (-w, h), (w, h), (w, 0.0)])
        counts = _split_counts([shape.height, shape.width, shape.height], n)
        pts = _polyline(corners, counts) + [corners[-1]]
        return CurveState(np.array(pts), Topology.OPEN)
    raise BadShapeParams(f"unknown shape {shape!r}")


# -- serialization --------------------------------------------------------


def format_float(v: float) -> str:
    return format(float(v), ".17g")


def write_curve(path, curve: CurveState, t: float = 0.0) -> None:
    lines = [f"# topology={curve.topology.value} N={curve.n_segments} t={format_float(t)}"]
    lines += [f"{format_float(x)},{format_float(y)}" for x, y in curve.nodes]
    Path(path).write_text("\n".join(lines) + "\n")


def read_curve(path) -> tuple[CurveState, float]:
    """Read a curve CSV; returns ``(curve, t)``."""
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise ValidationError(f"{path}: missing header line")
    meta = dict(item.split("=", 1) for item in text[0][1:].split())
    topology = Topology(meta.get("topology", "closed"))
    rows = [tuple(float(v) for v in line.split(",")) for line in text[1:] if line.strip()]
    curve = CurveState(np.array(rows), topology)
    if "N" in meta and int(meta["N"]) != curve.n_segments:
        raise ValidationError(f"{path}: header N={meta['N']} but {curve.n_segments} segments")
    return curve, float(meta.get("t", 0.0))
