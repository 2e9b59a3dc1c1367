"""Named experiment presets, one family per figure of the numerical study."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

SIGMA = "cos(3pi/4)"
BETAS = {"iso": 0.0, "ani05": 0.05, "ani01": 0.1}
CONVERGE_DTS = "0.025, 0.0125, 0.00625, 0.003125, 0.0015625"


@dataclass(frozen=True)
class Preset:
    text: str
    description: str
    grid: Optional[dict] = field(default=None)


def _cfg(flow="sdf", scheme="bdf1_sav", N=80, dt="0.00625", T="1", r=None, beta=0.0, shape=None, extra="", kind=None):
    if shape is None:
        shape = "ellipse\na = 2\nb = 1" if flow == "sdf" else "semi_ellipse\na = 2\nb = 1"
    lines = [f"flow = {flow}", f"scheme = {scheme}", f"N = {N}", f"dt = {dt}", f"T = {T}"]
    if r is not None:
        lines.append(f"r = {r}")
    lines += ["", "[gamma]"]
    kind = kind or ("isotropic" if beta == 0 else "cosine")
    lines += ["kind = isotropic"] if kind == "isotropic" else ["kind = cosine", f"beta = {beta}", "fold = 4"]
    lines += ["", "[shape]", f"kind = {shape}"]
    if flow == "ssd":
        lines += ["", "[substrate]", f"sigma_expr = {SIGMA}", "eta = 100"]
    return "\n".join(lines) + "\n" + extra


def _build() -> dict[str, Preset]:
    P: dict[str, Preset] = {}
    schemes = ("bdf1_sav", "bdf1_csav", "bdf2_sav")
    for flow, tag in (("sdf", "5_1"), ("ssd", "5_8")):
        for g in ("iso", "ani05"):
            for scheme, r in (("bdf1_sav", 2), ("bdf2_sav", 3)):
                name = f"fig{tag}_{g}_{scheme.split('_')[0]}"
                P[name] = Preset(
                    _cfg(flow, scheme, 512, "0.0015625", "0.1", r, BETAS[g],
                         extra=f"\n[converge]\ndt_list = {CONVERGE_DTS}\n"),
                    f"temporal convergence, {flow.upper()}, {g}, {scheme}, N=512, T=0.1",
                )
    for g, beta in BETAS.items():
        for r in (3, 6):
            P[f"fig5_2_{g}_r{r}"] = Preset(
                _cfg("sdf", "bdf1_csav", 80, "0.00625", "1", r, beta),
                f"relative area loss, SDF, {g}, r={r}, N=80, dt=1/160",
                {"scheme": list(schemes)},
            )
            P[f"fig5_2_ssd_{g}_r{r}"] = Preset(
                _cfg("ssd", "bdf1_csav", 80, "0.00625", "1", r, beta),
                f"relative area loss, SSD, {g}, r={r}, N=80, dt=1/160",
                {"scheme": list(schemes)},
            )
        P[f"fig5_3_{g}"] = Preset(
            _cfg("sdf", "bdf1_sav", 640, "0.0015625", "1", 6, beta),
            f"original vs modified energy, SDF, {g}, N=640, dt=1/640, r=6",
            {"scheme": list(schemes)},
        )
        P[f"fig5_5_{g}"] = Preset(
            _cfg("sdf", "bdf1_csav", 80, "0.00625", "1", 2, beta),
            f"CSAV absolute area loss, SDF, {g}, N=80, dt=1/160",
            {"r": [2, 3, 4]},
        )
        P[f"fig5_9_{g}"] = Preset(
            _cfg("sdf", "bdf1_sav", 72, "0.001", "4", 3, beta, "rectangle\nwidth = 4\nheight = 1"),
            f"SDF morphology from a 4x1 rectangle, {g}, N=72, dt=1e-3, r=3",
            {"scheme": list(schemes)},
        )
        P[f"fig5_10_{g}"] = Preset(
            _cfg("ssd", "bdf1_sav", 72, "0.001", "4", 3, beta, "open_rectangle\nwidth = 4\nheight = 1"),
            f"SSD morphology from a 4x1 film, {g}, N=72, dt=1e-3, r=3",
            {"scheme": list(schemes)},
        )
    for g in ("iso", "ani05"):
        P[f"fig5_4_{g}"] = Preset(
            _cfg("sdf", "bdf1_sav", 128, "0.001", "2", 3, BETAS[g]),
            f"mesh ratio, SDF, {g}, N=128, dt=1e-3, r=3",
            {"scheme": list(schemes)},
        )
        P[f"fig5_6_{g}"] = Preset(
            _cfg("ssd", "bdf1_sav", 128, "0.001", "2", 3, BETAS[g]),
            f"mesh ratio, SSD, {g}, N=128, dt=1e-3, r=3",
            {"scheme": list(schemes)},
        )
    P["fig5_7"] = Preset(
        _cfg("sdf", "bdf1_sav", 640, "0.00625", "1", 3, 0.1),
        "energy gap |R - W|, SDF, beta=1/10, r=3 (sweep dt)",
        {"scheme": list(schemes), "dt": [0.00625, 0.003125, 0.0015625]},
    )
    P["fig5_2"] = Preset(
        _cfg("sdf", "bdf1_csav", 80, "0.00625", "1", 3, 0.0, kind="cosine"),
        "relative area loss sweep, SDF: 3 schemes x beta in {0, 1/20, 1/10} x r in {3, 6}",
        {"scheme": list(schemes), "gamma.beta": [0.0, 0.05, 0.1], "r": [3, 6]},
    )
    return P


PRESETS = _build()
