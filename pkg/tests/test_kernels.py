"""The JIT path and the plain numpy/Python path must agree exactly."""

import numpy as np
import pytest

from groupsense import kernels
from groupsense.chart import generate_random_chart, layout
from groupsense.diagnose import enumerate_candidates
from groupsense.geometry import group_masks


def random_batch(seed):
    chart = generate_random_chart(6, seed=seed)
    lay = layout(chart)
    masks = group_masks(chart, enumerate_candidates(chart))
    return lay.xs, lay.ys, masks


@pytest.mark.parametrize("seed", range(8))
def test_features_batch_jit_matches_python(seed):
    xs, ys, masks = random_batch(seed)
    jit = kernels.features_batch(xs, ys, masks, 400.0, 300.0)
    py = kernels.python_impl(kernels.features_batch)(xs, ys, masks, 400.0, 300.0)
    assert np.array_equal(jit, py)


def test_fit_line_jit_matches_python():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = rng.integers(2, 7)
        xs = np.sort(rng.uniform(0, 400, n))
        xs += np.arange(n)  # keep x strictly increasing
        ys = rng.uniform(0, 300, n)
        assert kernels.fit_line(xs, ys) == kernels.python_impl(kernels.fit_line)(xs, ys)


def test_hull_overlap_jit_matches_python():
    rng = np.random.default_rng(1)
    for _ in range(50):
        g = rng.uniform(0, 400, (rng.integers(1, 6), 2))
        r = rng.uniform(0, 400, (rng.integers(1, 6), 2))
        args = (g[:, 0].copy(), g[:, 1].copy(), r[:, 0].copy(), r[:, 1].copy())
        assert kernels.hull_overlap(*args) == kernels.python_impl(kernels.hull_overlap)(*args)


def test_two_point_group_error_exactly_zero():
    xs, ys, masks = random_batch(3)
    out = kernels.features_batch(xs, ys, masks, 400.0, 300.0)
    sizes = masks.sum(axis=1)
    assert np.all(out[sizes == 2, kernels.ERROR] == 0.0)


def test_numba_flag_exposed():
    assert isinstance(kernels.NUMBA_ENABLED, bool)


def test_env_flag_fallback_matches(tmp_path):
    """GROUPSENSE_NUMBA=0 must produce identical features end to end."""
    import json
    import os
    import subprocess
    import sys

    xs, ys, masks = random_batch(5)
    expected = kernels.features_batch(xs, ys, masks, 400.0, 300.0)
    script = tmp_path / "pure_run.py"
    script.write_text(
        "import json, sys\n"
        "import numpy as np\n"
        "from groupsense import kernels\n"
        "assert not kernels.NUMBA_ENABLED\n"
        "from groupsense.chart import generate_random_chart, layout\n"
        "from groupsense.diagnose import enumerate_candidates\n"
        "from groupsense.geometry import group_masks\n"
        "chart = generate_random_chart(6, seed=5)\n"
        "lay = layout(chart)\n"
        "masks = group_masks(chart, enumerate_candidates(chart))\n"
        "out = kernels.features_batch(lay.xs, lay.ys, masks, 400.0, 300.0)\n"
        "json.dump(out.tolist(), sys.stdout)\n"
    )
    result = subprocess.run(
        [sys.executable, str(script)],
        env=dict(os.environ, GROUPSENSE_NUMBA="0"),
        capture_output=True, text=True, check=True,
    )
    pure = np.array(json.loads(result.stdout))
    assert np.array_equal(pure, expected)
