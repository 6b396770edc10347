import numpy as np
import pytest

from vekua import kernels

cython = pytest.importorskip("vekua._kernels")


def _random_scan(rng, n=7, N=50):
    c = rng.normal(size=(n, N)) + 1j * rng.normal(size=(n, N))
    A = rng.normal(size=(n, N)) + 1j * rng.normal(size=(n, N))
    return 0.5 * c, A


@pytest.mark.parametrize("name", ["scan_backward", "scan_forward"])
def test_scans_agree(name, rng):
    c, A = _random_scan(rng)
    ref = getattr(kernels, name)(c, A, "python")
    out = getattr(kernels, name)(c, A, "cython")
    assert np.allclose(out, ref, rtol=1e-14, atol=1e-14)


def test_scan_backward_definition(rng):
    c, A = _random_scan(rng, 1, 3)
    J = kernels.scan_backward(c, A)
    assert J[0, 3] == 0
    assert J[0, 2] == pytest.approx(A[0, 2])
    assert J[0, 0] == pytest.approx(A[0, 0] + c[0, 0] * (A[0, 1] + c[0, 1] * A[0, 2]))


def test_rk4_agree(rng):
    Ns = 40
    t = np.linspace(0, 2 * np.pi, 2 * Ns + 1)
    q = 1 + 0.5 * np.cos(t)
    s = 0.1 * np.sin(t)
    a, b = np.array([0.0, 0.3, -1.2]), np.array([0.5, -2.0, 1.0])
    F = rng.normal(size=(3, 2 * Ns + 1, 2)) + 0j
    args = (q, s, a, b, 0.7, 1.1 - 0.4j, F, 2 * np.pi / Ns)
    ref = kernels.rk4_propagate(*args, backend="python")
    out = kernels.rk4_propagate(*args, backend="cython")
    assert np.allclose(out, ref, rtol=1e-13, atol=1e-13)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
