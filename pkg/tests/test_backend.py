import numpy as np
import pytest

from mfpotts import _backend, _pykernels
from mfpotts._pykernels import config_digits

needs_ext = pytest.mark.skipif(len(_backend.available()) < 2, reason="compiled kernels not built")


def test_selection():
    assert _backend.BACKEND in _backend.available()
    assert _backend.get("python") is _pykernels
    with pytest.raises(ValueError):
        _backend.get("fortran")
    for name in _backend.available():
        mod = _backend.get(name)
        assert all(callable(getattr(mod, k)) for k in _backend.KERNEL_NAMES)


def test_env_override(monkeypatch):
    monkeypatch.setenv("MFPOTTS_BACKEND", "python")
    assert _backend._select()[0] == "python"
    monkeypatch.setenv("MFPOTTS_BACKEND", "auto")
    assert _backend._select()[0] == _backend.available()[0]


def test_config_digits():
    d = config_digits(5, 3, 3, 2)
    assert d.tolist() == [[1, 0, 1], [0, 1, 1], [1, 1, 1]]


@needs_ext
def test_energies_parity():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(9, 9))
    a = (a + a.T) / 2
    J = rng.normal(size=(3, 3))
    J = (J + J.T) / 2
    h = rng.normal(size=3)
    c = _backend.get("cython").energies(a, J, h, 1234, 5000)
    p = _pykernels.energies(a, J, h, 1234, 5000)
    assert np.max(np.abs(c - p)) <= 1e-11


@needs_ext
def test_jacobi_parity():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(25, 25))
    a = a + a.T
    wc = np.sort(_backend.get("cython").jacobi_eigh(a, 1e-12, 100)[0])
    wp = np.sort(_pykernels.jacobi_eigh(a, 1e-12, 100)[0])
    assert np.max(np.abs(wc - wp)) <= 1e-12


@needs_ext
def test_subset_scan_parity():
    rng = np.random.default_rng(2)
    for k in (1, 3, 8, 13):
        M = rng.normal(size=(k, k))
        cm, im, am = _backend.get("cython").subset_scan(M)
        pm, pi, pa = _pykernels.subset_scan(M)
        bits = lambda m: np.array([(m >> i) & 1 for i in range(k)], dtype=bool)
        val = lambda m: np.abs(M[bits(m)].sum(axis=0)).sum()
        assert val(am) == pytest.approx(val(pa), abs=1e-13)


@needs_ext
def test_sweep_parity():
    rng = np.random.default_rng(3)
    K = rng.normal(size=(7, 7))
    K = (K + K.T) / 2
    np.fill_diagonal(K, 0)
    J, h = np.eye(3) * 1.3, rng.normal(size=3)
    th0 = rng.dirichlet(np.ones(3), size=7)
    t1, t2 = th0.copy(), th0.copy()
    c1 = _backend.get("cython").mf_sweep(K, J, h, t1, 0.25)
    c2 = _pykernels.mf_sweep(K, J, h, t2, 0.25)
    assert c1 == pytest.approx(c2, abs=1e-14)
    assert np.max(np.abs(t1 - t2)) <= 1e-14
