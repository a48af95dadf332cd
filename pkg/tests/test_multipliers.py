import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccnls.fields import Field, Grid, SpaceTimeSample
from ccnls.multipliers import (
    band_truncate,
    dyadic_scales,
    eta,
    eta_j,
    modulation_levels,
    modulation_project,
    project_dyadic,
    psi_N,
    sharp_truncate,
)


def random_field(grid, seed=0, ncomp=None):
    rng = np.random.default_rng(seed)
    n = grid.d if ncomp is None else ncomp
    shape = (n,) + grid.shape
    return Field(grid, rng.normal(size=shape) + 1j * rng.normal(size=shape))


def test_eta_plateau_and_support():
    assert eta(0.0) == 1.0
    assert eta(2.0) == 0.0
    assert 0.0 < eta(1.5) < 1.0
    assert eta(1.5) == eta(-1.5)


@given(st.floats(-10, 10, allow_nan=False))
def test_eta_bounds_between_indicators(x):
    inner = 1.0 if abs(x) <= 4 / 3 else 0.0
    outer = 1.0 if abs(x) <= 5 / 3 else 0.0
    assert inner <= eta(x) <= outer


def test_eta_j_base_case_and_telescoping():
    assert eta_j(0.0, 0) == 1.0
    total = sum(eta_j(10.0, j) for j in range(5))
    assert abs(total - eta(10.0 / 2**4)) <= 1e-14


def test_eta_j_vanishes_inside_previous_plateau():
    x = np.linspace(-4 * 4 / 3, 4 * 4 / 3, 2001)
    assert np.all(eta_j(x, 3) == 0.0)


def test_eta_j_rejects_negative_level():
    with pytest.raises(ValueError):
        eta_j(1.0, -1)


def test_psi_examples():
    assert psi_N(0.0, 1) == 1.0
    assert psi_N(1.0, 4) == 0.0
    total = sum(psi_N(100.0, 2**k) for k in range(13))
    assert abs(total - 1.0) <= 1e-12


@given(st.floats(0, 3000, allow_nan=False))
def test_psi_partition_of_unity(r):
    total = sum(psi_N(r, 2**k) for k in range(14))
    assert abs(total - 1.0) <= 1e-12


@given(st.floats(0, 3000, allow_nan=False), st.integers(1, 12))
def test_psi_supported_in_shell(r, k):
    N = 2**k
    if r < N / 2 or r > 2 * N:
        assert psi_N(r, N) == 0.0


def test_psi_rejects_non_dyadic():
    with pytest.raises(ValueError):
        psi_N(1.0, 3)


def test_project_dyadic_single_mode():
    g = Grid(1, 2 * math.pi, 64)
    f = Field.mode(g, 8)
    out = project_dyadic(f, 8)
    assert np.allclose(out.hat, psi_N(8.0, 8) * f.hat, atol=0)


@pytest.mark.parametrize("d,M", [(1, 256), (2, 64)])
def test_projectors_sum_to_identity(d, M):
    g = Grid(d, 2 * math.pi, M)
    f = random_field(g, seed=d)
    total = sum(project_dyadic(f, N).hat for N in dyadic_scales(g))
    err = np.linalg.norm(total - f.hat) / np.linalg.norm(f.hat)
    assert err <= 1e-12


def test_p4_support():
    g = Grid(1, 2 * math.pi, 128)
    out = project_dyadic(random_field(g), 4)
    r = g.xi_abs
    outside = (r < 2) | (r > 8)
    assert np.all(out.hat[:, outside] == 0)


def test_sharp_truncation_algebra():
    g = Grid(2, 2 * math.pi, 32)
    f = random_field(g, seed=3)
    once = sharp_truncate(f, 5.0)
    assert np.array_equal(sharp_truncate(once, 5.0).hat, once.hat)
    band = band_truncate(f, 3.0, 7.0)
    assert np.array_equal(band.hat, sharp_truncate(f, 7.0).hat - sharp_truncate(f, 3.0).hat)
    assert np.array_equal(sharp_truncate(f, math.inf).hat, f.hat)


def test_sharp_truncation_commutes_with_dyadic_projection():
    g = Grid(1, 2 * math.pi, 256)
    f = random_field(g, seed=7)
    a = sharp_truncate(project_dyadic(f, 16), 20.0).hat
    b = project_dyadic(sharp_truncate(f, 20.0), 16).hat
    assert np.array_equal(a, b)


def test_sharp_truncation_rejects_nonpositive():
    g = Grid(1, 2 * math.pi, 16)
    with pytest.raises(ValueError):
        sharp_truncate(random_field(g), 0.0)


def free_mode_sample(k=3, sigma=1.0, Q=256, T=2 * math.pi, M=32):
    # a span of 2 pi makes the lattice wave exactly periodic in time
    g = Grid(1, 2 * math.pi, M)
    xi = g.k1d[k]
    times = np.arange(Q) * (T / Q)
    return SpaceTimeSample.from_function(g, times, lambda t, x: np.exp(1j * (xi * x - sigma * xi**2 * t)))


def test_modulation_of_free_wave_sits_in_shell_zero():
    F = free_mode_sample()
    q0 = modulation_project(F, 0, 1.0)
    assert np.linalg.norm(q0.values - F.values) / np.linalg.norm(F.values) <= 1e-2
    hi = modulation_levels(F, 1.0)[-1]
    qj = modulation_project(F, hi, 1.0)
    assert np.linalg.norm(qj.values) / np.linalg.norm(F.values) <= 1e-2


def test_modulation_shells_telescope():
    rng = np.random.default_rng(1)
    g = Grid(1, 2 * math.pi, 16)
    F = SpaceTimeSample(g, 0.0, 0.05, rng.normal(size=(64, 16)) + 1j * rng.normal(size=(64, 16)))
    total = sum(modulation_project(F, j, 2.0).values for j in modulation_levels(F, 2.0))
    assert np.linalg.norm(total - F.values) / np.linalg.norm(F.values) <= 1e-12


def test_modulation_commutes_with_spatial_projection():
    rng = np.random.default_rng(2)
    g = Grid(1, 2 * math.pi, 32)
    F = SpaceTimeSample(g, 0.0, 0.05, rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32)))
    pn = psi_N(g.xi_abs, 4)

    def P(S):
        return S.with_values(np.fft.ifft(np.fft.fft(S.values, axis=-1) * pn, axis=-1))

    a = modulation_project(P(F), 2, 1.0).values
    b = P(modulation_project(F, 2, 1.0)).values
    assert np.allclose(a, b, atol=1e-13)


def test_modulation_rejects_bad_arguments():
    F = free_mode_sample(Q=8)
    with pytest.raises(ValueError):
        modulation_project(F, 0, 0.0)
    with pytest.raises(ValueError):
        modulation_project(F, -1, 1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fft_roundtrip(seed):
    g = Grid(1, 3.0, 64)
    f = random_field(g, seed)
    back = f.to_spectral().to_physical().values
    assert np.linalg.norm(back - f.values) <= 1e-12 * np.linalg.norm(f.values)
