import os
import subprocess
import sys

import numpy as np
import pytest

from emnls import kernels

BACKENDS = kernels.backends()
needs_cython = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def _field(rng, shape=(8, 8, 8)):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


@needs_cython
@pytest.mark.parametrize("pm1", [2.0, 8.0 / 3.0])
@pytest.mark.parametrize("with_pot", [True, False])
def test_phase_rotate_agree(rng, pm1, with_pot):
    u = _field(rng)
    pot = rng.normal(size=u.shape) if with_pot else None
    a = BACKENDS["python"].phase_rotate(u.copy(), pot, 0.013, pm1)
    b = BACKENDS["cython"].phase_rotate(u.copy(), pot, 0.013, pm1)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)


def test_phase_rotate_preserves_modulus(rng):
    u = _field(rng)
    v = kernels.phase_rotate(u.copy(), None, 0.5, 2.0)
    np.testing.assert_allclose(np.abs(v), np.abs(u), rtol=1e-14)


@needs_cython
@pytest.mark.parametrize("m", [1, 2, 3])
def test_advection_agree(rng, m):
    grads = [_field(rng) for _ in range(m)]
    avec = [np.ascontiguousarray(rng.normal(size=(8, 8, 8))) for _ in range(m)]
    a = BACKENDS["python"].advection_rhs(grads, avec, np.empty_like(grads[0]))
    b = BACKENDS["cython"].advection_rhs(grads, avec, np.empty_like(grads[0]))
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-14)


@needs_cython
def test_shooting_agree():
    amps = np.linspace(3.0, 6.0, 31)
    a = BACKENDS["python"].shoot_radial(amps, 3.0, 3.0, 1e-3, 20000)
    b = BACKENDS["cython"].shoot_radial(amps, 3.0, 3.0, 1e-3, 20000)
    np.testing.assert_array_equal(a, b)
    assert set(a) == {kernels.OVERSHOOT, kernels.UNDERSHOOT}
    pa = BACKENDS["python"].radial_profile(4.3, 3.0, 3.0, 1e-3, 5000)
    pb = BACKENDS["cython"].radial_profile(4.3, 3.0, 3.0, 1e-3, 5000)
    np.testing.assert_allclose(pa, pb, rtol=1e-12, equal_nan=True)


def test_env_selects_fallback():
    code = "from emnls import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, EMNLS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_cython
def test_default_backend_is_compiled():
    env = {k: v for k, v in os.environ.items() if k != "EMNLS_PURE_PYTHON"}
    code = "from emnls import kernels; print(kernels.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "cython"
