import numpy as np
import pytest

from lpwave import grid
from lpwave.errors import GridMismatchError
from lpwave.grid import GridFunction


def naive_dft(values, period):
    """O(N^2) Fourier coefficients, independent of numpy's FFT path."""
    n = values.shape[0]
    j = np.arange(n)
    out = np.empty(n, dtype=complex)
    for m in range(n):
        out[m] = np.sum(values * np.exp(-2j * np.pi * m * j / n)) / n
    return out


def test_grid_size_validation():
    with pytest.raises(ValueError):
        GridFunction(np.zeros(7, dtype=complex))
    with pytest.raises(ValueError):
        GridFunction(np.zeros(12, dtype=complex))
    with pytest.raises(ValueError):
        GridFunction(np.zeros(8, dtype=complex), period=-1.0)
    GridFunction(np.zeros(8, dtype=complex))  # smallest legal grid


def test_fft_roundtrip_identity():
    rng = np.random.default_rng(1)
    for n in (8, 64, 256):
        w = GridFunction(rng.standard_normal(n) + 1j * rng.standard_normal(n))
        back = grid.from_coefficients(grid.coefficients(w), w.period)
        err = grid.norm(back - w) / grid.norm(w)
        assert err < 1e-13


def test_plancherel_against_naive_dft():
    rng = np.random.default_rng(2)
    w = grid.random_band_limited(64, rng=rng)
    coeffs = naive_dft(w.values, w.period)
    freq_norm = np.sqrt(w.period * np.sum(np.abs(coeffs) ** 2))
    assert abs(freq_norm - grid.norm(w)) / grid.norm(w) < 1e-12
    # and the fast coefficients agree with the naive ones
    assert np.max(np.abs(coeffs - grid.coefficients(w))) < 1e-12


def test_norm_is_quadrature():
    # pure mode: ||exp(i x)||^2 over [0, 2pi) is exactly 2*pi
    w = grid.from_callable(lambda x: np.exp(1j * x), 64)
    assert abs(grid.norm(w) ** 2 - 2.0 * np.pi) < 1e-12


def test_inner_product_conjugate_symmetry():
    rng = np.random.default_rng(3)
    f = grid.random_band_limited(32, rng=rng)
    g = grid.random_band_limited(32, rng=rng)
    assert abs(grid.inner(f, g) - np.conj(grid.inner(g, f))) < 1e-12
    assert abs(grid.inner(f, f).imag) < 1e-14


def test_derivative_pure_mode():
    w = grid.from_callable(lambda x: np.exp(3j * x), 32)
    dw = grid.derivative(w)
    expect = grid.from_callable(lambda x: 3j * np.exp(3j * x), 32)
    assert grid.norm(dw - expect) < 1e-12 * grid.norm(w)


def test_grid_mismatch_raises():
    f = GridFunction(np.zeros(16, dtype=complex))
    g = GridFunction(np.zeros(32, dtype=complex))
    with pytest.raises(GridMismatchError):
        grid.inner(f, g)
    h = GridFunction(np.zeros(16, dtype=complex), period=1.0)
    with pytest.raises(GridMismatchError):
        grid.same_grid(f, h)


def test_random_band_limited_respects_band():
    w = grid.random_band_limited(128, xi_max=8, rng=5)
    coeffs = grid.coefficients(w)
    xi = grid.frequencies(128)
    # recomputed through fft/ifft, so zero up to roundoff
    assert np.max(np.abs(coeffs[np.abs(xi) > 8])) < 1e-14 * grid.norm(w)
    assert grid.norm(w) > 0


def test_csv_roundtrip(tmp_path):
    w = grid.random_band_limited(32, rng=7)
    path = tmp_path / "w.csv"
    grid.to_csv(w, path)
    back = grid.from_csv(path)
    assert np.array_equal(back.values, w.values)  # repr round-trips floats


def test_json_roundtrip():
    w = grid.random_band_limited(16, rng=8)
    back = grid.from_json_dict(grid.to_json_dict(w))
    assert np.array_equal(back.values, w.values)
    assert back.period == w.period
