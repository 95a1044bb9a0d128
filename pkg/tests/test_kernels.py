import json
import os
import subprocess
import sys

import numpy as np
import pytest

from qmeasure import _kernels_py, kernels
from qmeasure import lan_est as le

compiled = pytest.importorskip("qmeasure._kernels")


def _cdf(n, mu):
    j, w = le.block_window(n, mu)
    cdf = np.cumsum(w)
    cdf[-1] = 1.0
    return np.ascontiguousarray(cdf), float(j[0])


def test_backend_is_compiled_when_available():
    assert kernels.BACKEND == "cython"


@pytest.mark.parametrize("draw", [0, 3, 6])
def test_uniforms_bitwise(draw):
    a = compiled.uniforms(123, 7, 5000, draw)
    b = _kernels_py.uniforms(123, 7, 5000, draw)
    assert np.array_equal(a, b)
    assert a.min() > 0 and a.max() < 1


def test_uniforms_extreme_seed():
    a = compiled.uniforms(2**64 - 1, 2**40, 100, 2)
    assert np.array_equal(a, _kernels_py.uniforms(2**64 - 1, 2**40, 100, 2))


@pytest.mark.parametrize("exact", [False, True])
def test_sample_local_agreement(exact):
    n, mu = 10_000, 0.9
    cdf, j0 = _cdf(n, mu) if exact else (np.zeros(1), 0.0)
    a = compiled.sample_local(5, 100, 20_000, n, mu, 0.3, -0.1, 0.2, exact, cdf, j0)
    b = _kernels_py.sample_local(5, 100, 20_000, n, mu, 0.3, -0.1, 0.2, exact, cdf, j0)
    assert a.shape == (20_000, 3)
    assert np.max(np.abs(a - b)) <= 1e-12


def test_chunking_is_transparent():
    n, mu = 1000, 0.8
    cdf, j0 = _cdf(n, mu)
    whole = compiled.sample_local(9, 0, 300, n, mu, 0, 0, 0, True, cdf, j0)
    parts = np.vstack([compiled.sample_local(9, s, 100, n, mu, 0, 0, 0, True, cdf, j0)
                       for s in (0, 100, 200)])
    assert np.array_equal(whole, parts)


def test_env_switch_forces_fallback():
    code = "from qmeasure import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, QM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_fallback_run_matches_compiled():
    code = ("import json; from qmeasure import lan_est as le;"
            "r = le.run_trials(le.EstimationConfig(trials=5000, seed=3, mode='exact'));"
            "print(json.dumps([r.mean_n_risk, r.exact_mean_n_risk]))")
    env = dict(os.environ, QM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    py = np.array(json.loads(out.stdout))
    rep = le.run_trials(le.EstimationConfig(trials=5000, seed=3, mode="exact"))
    assert np.allclose(py, [rep.mean_n_risk, rep.exact_mean_n_risk], rtol=1e-9, atol=0)
