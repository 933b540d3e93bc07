import os
import subprocess
import sys

import numpy as np
import pytest

from we_kit import _kernels as k
from we_kit.lemma_f import C, COT_C, f_eval

needs_numba = pytest.mark.skipif(not k.HAVE_NUMBA, reason="numba unavailable")


@needs_numba
def test_level_bisect_twins_agree():
    targets = f_eval(np.linspace(0.01, C - 0.01, 500))
    for rising, lo, hi in ((True, 0.0, C), (False, C, np.pi)):
        a = k.level_bisect_numpy(targets, lo, hi, COT_C, rising)
        b = k.level_bisect_numba(targets, lo, hi, COT_C, rising)
        assert np.abs(a - b).max() <= 1e-12
        assert np.abs(f_eval(a) - targets).max() <= 1e-12


@needs_numba
def test_q_root_bisect_twins_agree():
    rng = np.random.default_rng(1)
    # brackets around the roots of sqrt(s) cos(w log s)
    roots = np.exp((2 * np.arange(-3, 4) + 1) * np.pi / k.SQRT7)
    lo, hi = roots * 0.97, roots * 1.03
    a = k.q_root_bisect_numpy(lo, hi, 0.0, 0.0, 1, 1.0, 0.0)
    b = k.q_root_bisect_numba(lo, hi, 0.0, 0.0, 1, 1.0, 0.0)
    assert np.abs(a - roots).max() <= 1e-10
    assert np.array_equal(a, b) or np.abs(a - b).max() <= 1e-12
    K, A, B = rng.normal(size=3)
    a = k.q_root_bisect_numpy(lo, hi, K, 0.0, -1, A, B)
    b = k.q_root_bisect_numba(lo, hi, K, 0.0, -1, A, B)
    assert np.abs(a - b).max() <= 1e-12


@needs_numba
def test_contract3_twins_agree():
    rng = np.random.default_rng(2)
    for n in (3, 4, 6):
        X, Y = rng.normal(size=(2,) + (n,) * 4)
        assert np.allclose(k.contract3_numpy(X, Y), k.contract3_numba(X, Y), atol=1e-12)


def test_selected_backend():
    assert k.BACKEND == ("numba" if k.USE_NUMBA else "numpy")


@pytest.mark.parametrize("flag,want", [("1", "numpy"), ("", None)])
def test_env_flag_selects_backend(flag, want):
    env = dict(os.environ, WE_KIT_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from we_kit import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    assert out == (want or ("numba" if k.HAVE_NUMBA else "numpy"))
