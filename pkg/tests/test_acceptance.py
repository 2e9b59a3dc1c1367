"""End-to-end acceptance checks.

Each test appends one PASS/FAIL line to ``REPORT``; ``conftest.py`` prints the
collected lines at the end of the session.  Tolerances are the target values;
a check that is not met fails.
"""

import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import polygon
from oracle import dense_system
from curveflow.assembly import Stencil, assemble_closed, assemble_ssd
from curveflow.config import parse_config
from curveflow.energy import SurfaceEnergy
from curveflow.experiment import simulate
from curveflow.geometry import CurveState, SemiEllipse, enclosed_area, initial_shape, segment_frame
from curveflow.metrics import convergence_table, manifold_distance, resolution_bound, scanline_distance
from curveflow.ssd import SubstrateConfig, contact_angles, equilibrium_angle

REPORT: list[str] = []
HERE = Path(__file__).parent

ELLIPSE = "[shape]\nkind = ellipse\na = 2\nb = 1\n"
SEMI = "[shape]\nkind = semi_ellipse\na = {a}\nb = {b}\n[substrate]\nsigma_expr = cos(3pi/4)\n"


def config(flow, scheme, beta, N, dt, T, r, shape=None):
    gamma = "[gamma]\nkind = isotropic\n" if beta == 0 else f"[gamma]\nkind = cosine\nbeta = {beta}\n"
    if shape is None:
        shape = ELLIPSE if flow == "sdf" else SEMI.format(a=2, b=1)
    return parse_config(f"flow = {flow}\nscheme = {scheme}\nN = {N}\ndt = {dt}\nT = {T}\nr = {r}\n" + gamma + shape)


def report(label, ok, detail):
    REPORT.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
    return ok


# -- 1: temporal convergence ------------------------------------------------------

C1_CASES = [
    pytest.param("bdf1_sav", 2, 0.0, (0.7, 1.3), id="bdf1-iso"),
    pytest.param("bdf2_sav", 3, 0.0, (1.7, 2.3), id="bdf2-iso"),
    pytest.param("bdf1_sav", 2, 0.05, (0.7, 1.3), id="bdf1-ani"),
    pytest.param("bdf2_sav", 3, 0.05, (1.7, 2.3), id="bdf2-ani"),
]


@pytest.mark.parametrize("scheme, r, beta, band", C1_CASES)
def test_c1_temporal_convergence(scheme, r, beta, band):
    cfg = config("sdf", scheme, beta, 512, 1 / 40, 0.1, r)
    dts = [1 / 40 / 2**k for k in range(5)]
    table = convergence_table(lambda dt: simulate(cfg, None, dt).final, dts + [dts[-1] / 2], 0.1)
    orders = table.orders
    ok = all(band[0] <= p <= band[1] for p in orders)
    report(
        f"1 convergence {scheme} r={r} beta={beta}",
        ok,
        "errors " + " ".join(f"{r.error:.2e}" for r in table.rows) + " orders " + " ".join(f"{p:.2f}" for p in orders)
        + f" (need all in [{band[0]}, {band[1]}])",
    )
    assert ok


# -- 2: modified energy never increases -------------------------------------------


@pytest.mark.parametrize("flow", ["sdf", "ssd"])
def test_c2_modified_energy_monotone(flow):
    lines = []
    total = 0
    for beta in (0.0, 0.05, 0.1):
        for scheme in ("bdf1_sav", "bdf1_csav", "bdf2_sav"):
            cfg = config(flow, scheme, beta, 80, 1 / 160, 500 / 160, 3)
            R0 = cfg.initial_state().aux
            R = np.array([R0] + [d.R for d in simulate(cfg).trajectory])
            v = int(np.sum(np.diff(R) > 1e-12 * R0))
            total += v
            lines.append(f"{scheme}/beta={beta}:{v}")
    ok = total == 0
    report(f"2 modified energy monotone ({flow}, 9 runs x 500 steps)", ok, "violations " + " ".join(lines))
    assert ok


# -- 3: area behaviour of the corrected scheme ------------------------------------


def test_c3_area_conservation():
    loss, defect = {}, 0.0
    for r in (2, 3, 4):
        cfg = config("sdf", "bdf1_csav", 0.0, 80, 1 / 160, 500 / 160, r)
        A0 = enclosed_area(cfg.initial_curve())
        tr = simulate(cfg).trajectory
        loss[r] = abs(tr[-1].A - A0)
        defect = max(defect, max(abs(d.area_bar_defect) for d in tr) / A0)
    rel6 = {s: abs(simulate(config("sdf", s, 0.0, 80, 1 / 160, 500 / 160, 6)).trajectory[-1].dA_rel) for s in ("bdf1_csav", "bdf1_sav", "bdf2_sav")}
    ok_defect = defect < 1e-9
    ok_mono = loss[2] > loss[3] > loss[4]
    ok_r6 = rel6["bdf1_csav"] < min(rel6["bdf1_sav"], rel6["bdf2_sav"])
    report("3a per-step intermediate area identity", ok_defect, f"max |A(Xbar)-A(X)|/A0 = {defect:.2e} (need < 1e-9)")
    report("3b area loss decreasing in r", ok_mono, "abs loss " + " ".join(f"r={r}:{v:.2e}" for r, v in loss.items()))
    report("3c r=6 CSAV loss smallest", ok_r6, " ".join(f"{s}:{v:.2e}" for s, v in rel6.items()))
    assert ok_defect and ok_mono and ok_r6


# -- 4: mesh quality ----------------------------------------------------------------

C4_CASES = [
    pytest.param("sdf", 0.0, 2.0, (1.0, 1.05), id="sdf-iso"),
    pytest.param("sdf", 0.05, 8.0, (1.77, 1.97), id="sdf-ani"),
    pytest.param("ssd", 0.05, 8.0, (1.88, 2.08), id="ssd-ani"),
]


@pytest.mark.parametrize("flow, beta, T, band", C4_CASES)
def test_c4_mesh_ratio(flow, beta, T, band):
    tr = simulate(config(flow, "bdf1_sav", beta, 128, 1e-3, T, 3)).trajectory
    psi = tr[-1].psi
    ok = band[0] <= psi <= band[1]
    report(f"4 mesh ratio {flow} beta={beta} T={T}", ok, f"psi = {psi:.4f} (need [{band[0]}, {band[1]}])")
    assert ok


# -- 5: energy gap shrinks with dt ---------------------------------------------------


@pytest.mark.parametrize("scheme", ["bdf1_sav", "bdf1_csav", "bdf2_sav"])
def test_c5_energy_gap_scaling(scheme):
    gaps = [max(d.dW for d in simulate(config("sdf", scheme, 0.1, 80, dt, 0.5, 3)).trajectory) for dt in (1 / 160, 1 / 320, 1 / 640)]
    ratios = [gaps[0] / gaps[1], gaps[1] / gaps[2]]
    ok = all(q >= 1.5 for q in ratios)
    report(
        f"5 energy gap scaling {scheme} beta=0.1",
        ok,
        "max gap " + " ".join(f"{g:.3e}" for g in gaps) + " ratios " + " ".join(f"{q:.2f}" for q in ratios) + " (need >= 1.5)",
    )
    assert ok


# -- 6: equilibria ---------------------------------------------------------------------


def test_c6a_rectangle_to_circle():
    shape = "[shape]\nkind = rectangle\nwidth = 4\nheight = 1\n"
    final = simulate(config("sdf", "bdf1_sav", 0.0, 72, 1e-3, 4.0, 3, shape)).final
    c = final.nodes
    rad = np.hypot(*(c - c.mean(axis=0)).T)
    cov = rad.std() / rad.mean()
    ok = cov < 1e-3
    report("6a isotropic rectangle -> circle", ok, f"radius CoV = {cov:.2e} (need < 1e-3)")
    assert ok


def test_c6b_contact_angle():
    sigma = math.cos(3 * math.pi / 4)
    target = equilibrium_angle(SurfaceEnergy.isotropic(), sigma)
    final = simulate(config("ssd", "bdf1_sav", 0.0, 256, 5e-4, 1.0, 3, SEMI.format(a=1, b=1))).final
    err = max(abs(a - target) for a in contact_angles(final))
    ok = err < 0.02
    report("6b isotropic contact angle", ok, f"max |angle - {target:.6f}| = {err:.4f} rad (need < 0.02)")
    assert ok


def test_c6c_anisotropic_stationary():
    shape = "[shape]\nkind = rectangle\nwidth = 4\nheight = 1\n"
    out = simulate(config("sdf", "bdf1_sav", 0.05, 72, 1e-3, 4.0, 3, shape))
    tr, final = out.trajectory, out.final
    W = np.array([d.W for d in tr[-100:]])
    drift = np.abs(np.diff(W)).max()
    rad = np.hypot(*(final.nodes - final.nodes.mean(axis=0)).T)
    cov = rad.std() / rad.mean()
    ok = drift < 1e-8 and cov > 1e-2
    report("6c anisotropic steady shape", ok, f"max |dW| per step over last 100 = {drift:.2e} (need < 1e-8), radius CoV = {cov:.3f}")
    assert ok


# -- 7: oracle equivalence ---------------------------------------------------------------


def test_c7_oracle_equivalence():
    rng = np.random.default_rng(7)
    worst = 0.0
    sub = SubstrateConfig(math.cos(3 * math.pi / 4), 100.0)
    for n in range(3, 9):
        c = CurveState(polygon(n) * [2, 1] + rng.normal(scale=0.05, size=(n, 2)))
        for beta in (0.0, 0.05):
            s = assemble_closed(segment_frame(c), Stencil.bdf1(c), SurfaceEnergy.cosine(beta), 1e-3)
            A, b = dense_system(c.nodes, True, 1.0, c.nodes, 1e-3, beta)
            worst = max(worst, np.abs(s.dense() - A).max() / max(1, np.abs(A).max()), np.abs(s.rhs - b).max() / max(1, np.abs(b).max()))
        o = initial_shape(SemiEllipse(2, 1), n)
        nodes = o.nodes.copy()
        nodes[1:-1] += rng.normal(scale=0.03, size=(n - 1, 2))
        o = CurveState(nodes, "open")
        s = assemble_ssd(segment_frame(o), Stencil.bdf1(o), SurfaceEnergy.cosine(0.05), 1e-3, sub)
        A, b = dense_system(o.nodes, False, 1.0, o.nodes, 1e-3, 0.05, sigma=sub.sigma, eta=sub.eta)
        worst = max(worst, np.abs(s.dense() - A).max() / max(1, np.abs(A).max()), np.abs(s.rhs - b).max() / max(1, np.abs(b).max()))
    ok_asm = worst <= 1e-13

    rng = np.random.default_rng(2024)
    slack = []
    for _ in range(50):
        pair = []
        for _ in range(2):
            k = int(rng.integers(3, 25))
            t = np.sort(rng.uniform(0, 2 * np.pi, k))
            while np.min(np.diff(np.append(t, t[0] + 2 * np.pi))) < 1e-2:
                t = np.sort(rng.uniform(0, 2 * np.pi, k))
            a, bb = rng.uniform(0.5, 2, 2)
            ctr = rng.uniform(-0.7, 0.7, 2)
            pair.append(CurveState(np.column_stack([ctr[0] + a * np.cos(t), ctr[1] + bb * np.sin(t)])))
        p, q = pair
        slack.append(abs(manifold_distance(p, q) - scanline_distance(p, q)) / resolution_bound(p, q))
    ok_dist = max(slack) <= 1.0
    report("7a assembly vs dense oracle (N<=8, 3 kinds)", ok_asm, f"max scaled entry difference {worst:.1e} (need <= 1e-13)")
    report("7b distance vs scanline oracle (50 convex pairs)", ok_dist, f"max |diff| / bound = {max(slack):.3f} (need <= 1)")
    assert ok_asm and ok_dist


# -- 8: property suites ---------------------------------------------------------------------

PROPERTY_FILES = ["test_geometry.py", "test_energy.py", "test_assembly.py", "test_kernels.py", "test_ssd.py", "test_stepper.py", "test_metrics.py"]


def test_c8_property_suites():
    res = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *[str(HERE / f) for f in PROPERTY_FILES]],
        capture_output=True,
        text=True,
        cwd=HERE.parent,
    )
    tail = res.stdout.strip().splitlines()[-1] if res.stdout.strip() else res.stderr.strip()[-200:]
    ok = res.returncode == 0
    report("8 module property suites", ok, tail)
    assert ok, res.stdout[-3000:]
