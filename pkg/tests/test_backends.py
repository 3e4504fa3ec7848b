import subprocess
import sys

import numpy as np
import pytest

from dirlap import _kernels_py
from dirlap.backends import backend_name

compiled = pytest.importorskip(
    "dirlap._kernels_cy", reason="compiled kernels not built"
)


def random_inputs(seed, n=400, p=3, k=5):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    x = np.ascontiguousarray(x / np.linalg.norm(x, axis=1, keepdims=True))
    m = rng.standard_normal((k, p))
    m = np.ascontiguousarray(m / np.linalg.norm(m, axis=1, keepdims=True))
    ks = rng.uniform(0.01, 30.0, k)
    log_wc = rng.uniform(-3.0, 3.0, k)
    return x, m, ks, log_wc


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_responsibilities_parity(seed):
    x, m, ks, log_wc = random_inputs(seed)
    r_py, s_py, g_py = _kernels_py.responsibilities(x, m, ks, log_wc)
    r_cy, s_cy, g_cy = compiled.responsibilities(x, m, ks, log_wc)
    assert np.allclose(r_py, r_cy, rtol=1e-12, atol=1e-14)
    assert s_cy == pytest.approx(s_py, rel=1e-10)
    assert g_cy == pytest.approx(g_py, rel=1e-10)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_weighted_moments_parity(seed):
    x, m, ks, log_wc = random_inputs(seed)
    resp, _, _ = _kernels_py.responsibilities(x, m, ks, log_wc)
    out_py = _kernels_py.weighted_moments(x, m, resp)
    out_cy = compiled.weighted_moments(x, m, resp)
    for a, b in zip(out_py, out_cy):
        assert np.allclose(a, b, rtol=1e-10, atol=1e-12)


def test_axial_sin_parity():
    x, m, _, _ = random_inputs(7)
    assert np.allclose(
        _kernels_py.axial_sin(x, m), compiled.axial_sin(x, m), atol=1e-14
    )


def test_vanished_densities_fall_back_to_uniform():
    x, m, ks, _ = random_inputs(3, k=3)
    log_wc = np.full(3, -np.inf)  # zero-weight components everywhere
    for impl in (_kernels_py, compiled):
        resp, _, _ = impl.responsibilities(x, m, ks, log_wc)
        assert np.allclose(resp, 1.0 / 3.0)


def test_backend_selection_env_var():
    assert backend_name() in ("compiled", "python")
    for forced in ("python", "compiled"):
        out = subprocess.run(
            [
                sys.executable,
                "-c",
                "from dirlap.backends import backend_name; print(backend_name())",
            ],
            capture_output=True,
            text=True,
            env={"DIRLAP_KERNELS": forced, "PATH": "/usr/bin:/bin"},
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == forced


def test_backend_rejects_unknown_choice():
    out = subprocess.run(
        [sys.executable, "-c", "import dirlap.backends"],
        capture_output=True,
        text=True,
        env={"DIRLAP_KERNELS": "fortran", "PATH": "/usr/bin:/bin"},
    )
    assert out.returncode != 0
    assert "DIRLAP_KERNELS" in out.stderr
