import os
import subprocess
import sys

import numpy as np
import pytest

from greenline import _kernels

pytestmark = pytest.mark.skipif(_kernels.numba is None, reason="numba not installed")


def sample(n, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def test_escape_sum_backends_agree():
    f0 = np.array([1, 0, 0.5], dtype=complex)
    f1 = np.array([0.2 - 0.1j, 0, 1], dtype=complex)
    p1 = sample(500)
    p0 = np.ones_like(p1)
    p0[:3] = 0  # points at infinity
    a = _kernels.escape_sum_numba(f0, f1, p0, p1, 30)
    b = _kernels.escape_sum_numpy(f0, f1, p0, p1, 30)
    for x, y in zip(a, b):
        assert np.allclose(x, y, atol=1e-13)


def test_pair_energy_backends_agree_with_collisions():
    z = sample(300)
    z[10] = z[20]
    m = np.full(300, 1 / 300)
    a = _kernels.pair_energy_numba(z, m)
    b = _kernels.pair_energy_numpy(z, m)
    assert a[1] == b[1] == 2
    assert a[0] == pytest.approx(b[0], rel=1e-12)


@pytest.mark.parametrize("skip_self", [False, True])
def test_log_potential_backends_agree(skip_self):
    a = sample(200, 1)
    z = np.concatenate([sample(50, 2), a[:5]])
    m = np.full(200, 1 / 200)
    x = _kernels.log_potential_numba(a, m, z, skip_self)
    y = _kernels.log_potential_numpy(a, m, z, skip_self)
    assert x[1] == y[1] == 5
    assert np.allclose(x[0], y[0], rtol=1e-12)


def test_env_flag_selects_numpy():
    code = "from greenline import _kernels; print(_kernels.backend())"
    env = dict(os.environ, GREENLINE_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env["GREENLINE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"


def test_bench_runs_small():
    from greenline.bench import run
    rows = run(grid=16, atoms=64, iters=5, repeat=1)
    assert len(rows) == 3
    assert all(r["max_abs_diff"] < 1e-10 for r in rows)
