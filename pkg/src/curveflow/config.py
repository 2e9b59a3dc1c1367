"""Run configuration: a flat ``key = value`` text format plus named presets.

Keys may be dotted (``gamma.beta = 0.05``) or grouped under ``[gamma]`` style
section headers.  ``#`` starts a comment.  Only ``substrate.sigma_expr``
accepts an expression, built from numbers, ``pi``, ``cos(...)``, ``*`` and
``/`` (a number directly followed by ``pi`` multiplies, as in ``3pi/4``).
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .energy import SurfaceEnergy
from .errors import ConfigError
from .geometry import CurveState, Ellipse, OpenRectangle, Rectangle, SemiEllipse, initial_shape
from .ssd import SubstrateConfig
from .stepper import SavState, Scheme

REQUIRED = ("flow", "scheme", "N", "dt", "T", "shape.kind")
KNOWN = {
    "flow", "scheme", "N", "dt", "T", "r",
    "gamma.kind", "gamma.beta", "gamma.fold", "gamma.stability_factor",
    "substrate.sigma_expr", "substrate.eta",
    "shape.kind", "shape.a", "shape.b", "shape.width", "shape.height",
    "output.dir", "output.snapshots",
    "solver.csav_tol", "solver.csav_max_iter",
    "converge.dt_list",
}
SHAPES = {
    "ellipse": (Ellipse, ("a", "b")),
    "semi_ellipse": (SemiEllipse, ("a", "b")),
    "rectangle": (Rectangle, ("width", "height")),
    "open_rectangle": (OpenRectangle, ("width", "height")),
}
OPEN_SHAPES = ("semi_ellipse", "open_rectangle")


# -- sigma expressions ------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|(pi|cos)|(.))")


def _tokens(text: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        num, name, sym = m.groups()
        if num is not None:
            out.append(("num", num))
        elif name is not None:
            out.append(("name", name))
        elif sym in "*/()-":
            out.append(("sym", sym))
        elif not sym.isspace():
            raise ConfigError(f"unexpected character {sym!r} in expression {text!r}")
        pos = m.end()
    return out


def eval_expr(text: str) -> float:
    """Evaluate ``number | pi | cos(e) | e * e | e / e`` (with unary minus)."""
    toks = _tokens(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    def take(kind=None, value=None):
        nonlocal pos
        tok = peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ConfigError(f"malformed expression {text!r}")
        pos += 1
        return tok

    def atom():
        kind, val = peek()
        if kind == "num":
            take()
            v = float(val)
            if peek() == ("name", "pi"):
                take()
                v *= math.pi
            return v
        if (kind, val) == ("name", "pi"):
            take()
            return math.pi
        if (kind, val) == ("name", "cos"):
            take()
            take("sym", "(")
            v = expr()
            take("sym", ")")
            return math.cos(v)
        if (kind, val) == ("sym", "("):
            take()
            v = expr()
            take("sym", ")")
            return v
        if (kind, val) == ("sym", "-"):
            take()
            return -atom()
        raise ConfigError(f"malformed expression {text!r}")

    def expr():
        v = atom()
        while peek() in (("sym", "*"), ("sym", "/")):
            op = take()[1]
            rhs = atom()
            v = v * rhs if op == "*" else v / rhs
        return v

    value = expr()
    if pos != len(toks):
        raise ConfigError(f"trailing input in expression {text!r}")
    return value


# -- parsing ----------------------------------------------------------------


def parse_text(text: str, origin: str = "<config>") -> dict[str, tuple[str, str]]:
    """Return ``{key: (raw value, location)}`` from config text."""
    out: dict[str, tuple[str, str]] = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{origin}:{lineno}"
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if section and "." not in key:
            key = f"{section}.{key}"
        if key not in KNOWN:
            raise ConfigError(f"{where}: unknown key {key!r}")
        out[key] = (value, where)
    return out


def _num(raw: dict, key: str, default=None, cast=float):
    if key not in raw:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    value, where = raw[key]
    try:
        if cast is int:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        return cast(value)
    except ValueError:
        raise ConfigError(f"{where}: {key} = {value!r} is not a valid {cast.__name__}") from None


@dataclass(frozen=True)
class GammaConfig:
    kind: str = "isotropic"
    beta: float = 0.0
    fold: int = 4
    stability_factor: float = 2.0

    def build(self) -> SurfaceEnergy:
        if self.kind == "isotropic":
            return SurfaceEnergy.isotropic(stability_factor=self.stability_factor)
        if self.kind == "cosine":
            return SurfaceEnergy.cosine(self.beta, self.fold, stability_factor=self.stability_factor)
        raise ConfigError(f"gamma.kind must be 'isotropic' or 'cosine', got {self.kind!r}")


@dataclass(frozen=True)
class RunConfig:
    flow: str
    scheme: str
    N: int
    dt: float
    T: float
    shape_kind: str
    shape_params: dict = field(default_factory=dict)
    r: Optional[int] = None
    gamma: GammaConfig = GammaConfig()
    sigma_expr: Optional[str] = None
    eta: float = 100.0
    output_dir: Optional[str] = None
    snapshots: int = 10
    csav_tol: float = 1e-12
    csav_max_iter: int = 50
    dt_list: Optional[tuple[float, ...]] = None
    name: str = "run"

    @property
    def sigma(self) -> Optional[float]:
        return None if self.sigma_expr is None else eval_expr(self.sigma_expr)

    @property
    def effective_r(self) -> int:
        return Scheme(self.scheme).default_r if self.r is None else self.r

    @property
    def n_steps(self) -> int:
        return round(self.T / self.dt)

    def substrate(self) -> Optional[SubstrateConfig]:
        if self.flow != "ssd":
            return None
        return SubstrateConfig(self.sigma, self.eta)

    def initial_curve(self) -> CurveState:
        cls, names = SHAPES[self.shape_kind]
        return initial_shape(cls(**{k: self.shape_params[k] for k in names if k in self.shape_params}), self.N)

    def initial_state(self, dt: Optional[float] = None) -> SavState:
        return SavState.initial(
            self.initial_curve(),
            self.gamma.build(),
            self.scheme,
            self.dt if dt is None else dt,
            self.effective_r,
            self.substrate(),
            csav_tol=self.csav_tol,
            csav_max_iter=self.csav_max_iter,
        )

    def as_dict(self) -> dict:
        d = asdict(self)
        d["r"] = self.effective_r
        d["sigma"] = self.sigma
        return d


def build_config(raw: dict[str, tuple[str, str]], name: str = "run") -> RunConfig:
    for key in REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    flow = raw["flow"][0]
    if flow not in ("sdf", "ssd"):
        raise ConfigError(f"{raw['flow'][1]}: flow must be 'sdf' or 'ssd', got {flow!r}")
    scheme = raw["scheme"][0]
    if scheme not in {s.value for s in Scheme}:
        raise ConfigError(f"{raw['scheme'][1]}: unknown scheme {scheme!r}")
    shape_kind = raw["shape.kind"][0]
    if shape_kind not in SHAPES:
        raise ConfigError(f"{raw['shape.kind'][1]}: unknown shape {shape_kind!r}")
    if (shape_kind in OPEN_SHAPES) != (flow == "ssd"):
        raise ConfigError(f"shape {shape_kind!r} does not match flow {flow!r}")
    params = {k: _num(raw, f"shape.{k}") for k in SHAPES[shape_kind][1] if f"shape.{k}" in raw}

    N = _num(raw, "N", cast=int)
    dt = _num(raw, "dt")
    T = _num(raw, "T")
    if N < 8:
        raise ConfigError(f"{raw['N'][1]}: N must be at least 8")
    if not dt > 0:
        raise ConfigError(f"{raw['dt'][1]}: dt must be positive")
    if not T >= 0:
        raise ConfigError(f"{raw['T'][1]}: T must be nonnegative")
    M = round(T / dt)
    if abs(M * dt - T) > 1e-9 * max(1.0, T):
        raise ConfigError(f"T = {T} is not an integer multiple of dt = {dt}")
    r = _num(raw, "r", cast=int) if "r" in raw else None
    if r is not None and r < 2:
        raise ConfigError(f"{raw['r'][1]}: r must be >= 2")

    gamma = GammaConfig(
        raw.get("gamma.kind", ("isotropic", ""))[0],
        _num(raw, "gamma.beta", 0.0),
        _num(raw, "gamma.fold", 4, int),
        _num(raw, "gamma.stability_factor", 2.0),
    )
    gamma.build()

    sigma_expr = raw["substrate.sigma_expr"][0] if "substrate.sigma_expr" in raw else None
    if flow == "ssd":
        if sigma_expr is None:
            raise ConfigError("missing required key 'substrate.sigma_expr'")
        eval_expr(sigma_expr)

    dt_list = None
    if "converge.dt_list" in raw:
        dt_list = parse_dt_list(raw["converge.dt_list"][0])

    snapshots = _num(raw, "output.snapshots", 10, int)
    if snapshots < 1:
        raise ConfigError("output.snapshots must be >= 1")
    return RunConfig(
        flow=flow,
        scheme=scheme,
        N=N,
        dt=dt,
        T=T,
        shape_kind=shape_kind,
        shape_params=params,
        r=r,
        gamma=gamma,
        sigma_expr=sigma_expr,
        eta=_num(raw, "substrate.eta", 100.0),
        output_dir=raw["output.dir"][0] if "output.dir" in raw else None,
        snapshots=snapshots,
        csav_tol=_num(raw, "solver.csav_tol", 1e-12),
        csav_max_iter=_num(raw, "solver.csav_max_iter", 50, int),
        dt_list=dt_list,
        name=name,
    )


def parse_dt_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(eval_expr(v)) for v in text.replace(",", " ").split())
    except ConfigError:
        raise ConfigError(f"bad dt list {text!r}") from None


def parse_config(text: str, origin: str = "<config>", overrides: Optional[dict] = None, name: str = "run") -> RunConfig:
    raw = parse_text(text, origin)
    for key, value in (overrides or {}).items():
        if key not in KNOWN:
            raise ConfigError(f"--set: unknown key {key!r}")
        raw[key] = (str(value), "--set")
    return build_config(raw, name)


def load_config(source: str, overrides: Optional[dict] = None) -> RunConfig:
    """Load a config file, or a preset when ``source`` names one."""
    from .presets import PRESETS

    if source in PRESETS:
        return parse_config(PRESETS[source].text, f"preset:{source}", overrides, source)
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"{source!r} is neither a config file nor a preset name")
    return parse_config(path.read_text(), str(path), overrides, path.stem)
