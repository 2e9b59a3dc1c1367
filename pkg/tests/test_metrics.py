import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import polygon
from curveflow import metrics
from curveflow.errors import SelfIntersecting, ValidationError, ZeroInitialArea
from curveflow.geometry import CurveState, SemiEllipse, initial_shape
from curveflow.metrics import (
    ErrorTable,
    area_loss_series,
    convergence_table,
    energy_gap_series,
    manifold_distance,
    manifold_distance_report,
    observed_orders,
    resolution_bound,
    scanline_distance,
)
from curveflow.stepper import StepDiagnostics


def square(dx=0.0, dy=0.0, s=1.0):
    return CurveState(np.array([(0, 0), (s, 0), (s, s), (0, s)], float) + [dx, dy])


def random_convex(rng, n=None):
    n = n or int(rng.integers(3, 25))
    t = np.sort(rng.uniform(0, 2 * np.pi, n))
    while np.min(np.diff(np.append(t, t[0] + 2 * np.pi))) < 1e-2:
        t = np.sort(rng.uniform(0, 2 * np.pi, n))
    a, b = rng.uniform(0.5, 2, 2)
    c = rng.uniform(-0.7, 0.7, 2)
    return CurveState(np.column_stack([c[0] + a * np.cos(t), c[1] + b * np.sin(t)]))


def test_distance_examples():
    assert manifold_distance(square(), square()) == 0
    assert manifold_distance(square(), square(0.5)) == pytest.approx(1.0, abs=1e-15)
    d = manifold_distance(CurveState(polygon(4000)), CurveState(polygon(4000, 2.0)))
    assert d == pytest.approx(3 * math.pi, abs=1e-3)


def test_open_curve_closed_along_substrate():
    a = initial_shape(SemiEllipse(1, 1), 400)
    b = CurveState(a.nodes * [1, 2], "open")
    assert manifold_distance(a, b) == pytest.approx(math.pi / 2, abs=1e-4)


def test_self_intersecting_rejected():
    bow = CurveState([(0, 0), (1, 1), (1, 0), (0, 1)])
    with pytest.raises(SelfIntersecting):
        manifold_distance(bow, square())


def test_clipping_failure_falls_back(monkeypatch):
    import shapely

    def boom(self, other):
        raise shapely.errors.GEOSException("forced")

    monkeypatch.setattr(metrics.Polygon, "intersection", boom)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        rep = manifold_distance_report(square(), square(0.5))
    assert rep.fallback and rep.resolution == 4096 and w
    assert rep.value == pytest.approx(1.0, abs=resolution_bound(square(), square(0.5)))


def test_clipping_matches_scanline_oracle_on_50_convex_pairs():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        a, b = random_convex(rng), random_convex(rng)
        assert abs(manifold_distance(a, b) - scanline_distance(a, b)) <= resolution_bound(a, b)


def test_triangle_inequality_100_triples():
    rng = np.random.default_rng(99)
    for _ in range(100):
        a, b, c = (random_convex(rng) for _ in range(3))
        assert manifold_distance(a, c) <= manifold_distance(a, b) + manifold_distance(b, c) + 1e-12


@given(st.integers(0, 10_000))
def test_distance_symmetric_nonnegative(seed):
    rng = np.random.default_rng(seed)
    a, b = random_convex(rng), random_convex(rng)
    d1, d2 = manifold_distance(a, b), manifold_distance(b, a)
    assert d1 >= 0
    assert d1 == pytest.approx(d2, abs=1e-13)


def test_observed_orders():
    o = observed_orders([0.4, 0.2, 0.1], [4.0, 1.0, 0.25])
    assert math.isnan(o[0]) and o[1:] == pytest.approx([2.0, 2.0])


def translation_runner(k, C=0.3, T=1.0):
    base = polygon(256)

    def runner(dt):
        return CurveState(base + [T + C * dt**k, 0.0])

    return runner


@pytest.mark.parametrize("k", [1, 2, 3])
def test_convergence_table_recovers_translation_order(k):
    dts = [0.1 / 2**i for i in range(5)]
    table = convergence_table(translation_runner(k), dts, 1.0, f"k={k}")
    assert isinstance(table, ErrorTable)
    assert len(table.rows) == 4
    for order in table.orders:
        assert order == pytest.approx(k, abs=0.05)


def test_convergence_table_duplicate_runs_zero():
    table = convergence_table(lambda dt: square(), [0.1, 0.1], 1.0)
    assert table.rows[0].error == 0


def test_convergence_table_validation():
    with pytest.raises(ValidationError):
        convergence_table(lambda dt: square(), [0.1])
    with pytest.raises(ValidationError):
        convergence_table(lambda dt: square(), [0.1, 0.2])


def test_error_table_csv(tmp_path):
    table = convergence_table(translation_runner(2), [0.1, 0.05, 0.025], 1.0)
    table.write_csv(tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "dt,error,order"
    assert float(lines[1].split(",")[1]) == table.rows[0].error


def diag(m, A, R=1.0, W=1.0):
    nan = math.nan
    return StepDiagnostics(m, m * 0.1, R, W, abs(R - W), A, nan, 1.0, 1.0, 1.0, 0.0, nan, nan, 0)


def test_area_loss_series():
    rel, ab = area_loss_series([diag(0, 2.0), diag(1, 2.0), diag(2, 2.0)])
    assert np.all(rel == 0) and np.all(ab == 0)
    rel, ab = area_loss_series([diag(0, 2.0), diag(1, 1.5)])
    assert rel[1] == -0.25 and ab[1] == 0.5
    with pytest.raises(ZeroInitialArea):
        area_loss_series([diag(0, 0.0)])


def test_energy_gap_series():
    gaps = energy_gap_series([diag(0, 1.0, 3.0, 3.0), diag(1, 1.0, 2.5, 2.4)])
    assert gaps[0] == 0 and gaps[1] == pytest.approx(0.1)


def test_single_csav_step_area_change_is_zeta_squared():
    from curveflow.energy import SurfaceEnergy
    from curveflow.geometry import Ellipse, enclosed_area
    from curveflow.stepper import SavState, advance

    s = SavState.initial(initial_shape(Ellipse(2, 1), 32), SurfaceEnergy.isotropic(), "bdf1_csav", 0.05, 2)
    out = advance(s)
    z = out.diagnostics.zeta
    A_bar = enclosed_area(out.candidate)
    assert out.diagnostics.A - A_bar == pytest.approx((z * z - 1) * A_bar, rel=1e-10, abs=1e-15)
    # the candidate keeps the old area, so the relative loss is zeta^2 - 1
    rel, _ = area_loss_series([diag(0, enclosed_area(s.curve)), out.diagnostics])
    assert rel[1] == pytest.approx(z * z - 1, abs=1e-10)
