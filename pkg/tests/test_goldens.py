import json

import numpy as np
import pytest

from make_goldens import GOLDEN_DIR, GOLDEN_PRESETS, golden_run


def assert_close(got, expected, path="summary"):
    if isinstance(expected, dict):
        assert set(got) == set(expected), path
        for k in expected:
            assert_close(got[k], expected[k], f"{path}.{k}")
    elif isinstance(expected, list):
        assert len(got) == len(expected), path
        for i, (a, b) in enumerate(zip(got, expected)):
            assert_close(a, b, f"{path}[{i}]")
    elif isinstance(expected, float) and not isinstance(got, bool):
        assert got == pytest.approx(expected, rel=1e-10, abs=1e-12), path
    else:
        assert got == expected, path


@pytest.mark.parametrize("name", GOLDEN_PRESETS)
def test_matches_golden(name):
    expected = json.loads((GOLDEN_DIR / f"{name}.json").read_text())
    got = golden_run(name)
    assert got["steps"] == expected["steps"] == 21  # initial record plus 20 steps
    np.testing.assert_allclose(got["nodes"], expected["nodes"], rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(got["R_series"], expected["R_series"], rtol=1e-10, atol=1e-12)
    for key, value in expected["last"].items():
        if value is None:
            assert got["last"][key] is None
        else:
            assert got["last"][key] == pytest.approx(value, rel=1e-10, abs=1e-12), key
    assert_close(json.loads(json.dumps(got["summary"])), expected["summary"])
