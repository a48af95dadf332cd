import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccnls.fields import Field, Grid, SpaceTimeSample, StateBundle
from ccnls.multipliers import eta, psi_N
from ccnls.norms import (
    SupportError,
    dyadic_energy_norm,
    f_norm_proxy,
    g_norm_proxy,
    l2_norm,
    sobolev_norm,
    xns_norm,
)


def test_single_normalized_mode_gives_japanese_bracket():
    L = 2 * math.pi
    g = Grid(1, L, 64)
    for s in (0.0, 1.0, 1.6, -0.5):
        f = Field.mode(g, 5, amplitude=1 / math.sqrt(L))
        assert sobolev_norm(f, s) == pytest.approx((1 + 25.0) ** (s / 2), rel=1e-12)


def test_l2_matches_physical_quadrature():
    rng = np.random.default_rng(0)
    g = Grid(2, 5.0, 32)
    f = Field(g, rng.normal(size=(2, 32, 32)) + 1j * rng.normal(size=(2, 32, 32)))
    direct = math.sqrt(float(np.sum(np.abs(f.values) ** 2)) * g.weight)
    assert abs(l2_norm(f) - direct) <= 1e-12 * direct


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(-1, 3))
def test_sobolev_triangle_inequality(seed, s):
    rng = np.random.default_rng(seed)
    g = Grid(1, 2 * math.pi, 64)
    a = Field(g, rng.normal(size=(1, 64)) + 1j * rng.normal(size=(1, 64)))
    b = Field(g, rng.normal(size=(1, 64)) + 1j * rng.normal(size=(1, 64)))
    assert sobolev_norm(a + b, s) <= sobolev_norm(a, s) + sobolev_norm(b, s) + 1e-12


def test_dyadic_energy_norm_single_mode_within_overlap():
    L = 2 * math.pi
    g = Grid(1, L, 256)
    f = Field.mode(g, 12, amplitude=1 / math.sqrt(L))
    s = 1.0
    e = dyadic_energy_norm([f, f], s)
    # |xi| = 12 sits in the shells 8 and 16 only
    expected = math.sqrt(sum(N**2 * psi_N(12.0, N) ** 2 for N in (8, 16)))
    assert e == pytest.approx(expected, rel=1e-12)
    assert 8 * max(psi_N(12.0, 8), psi_N(12.0, 16)) <= e <= 16 * 2


def test_dyadic_energy_norm_zero_and_equivalence():
    g = Grid(1, 2 * math.pi, 128)
    assert dyadic_energy_norm([Field.zeros(g)], 1.0) == 0.0
    rng = np.random.default_rng(4)
    ratios = []
    for _ in range(20):
        f = Field(g, rng.normal(size=(1, 128)) + 1j * rng.normal(size=(1, 128)))
        ratios.append(dyadic_energy_norm([f], 1.0) / sobolev_norm(f, 1.0))
    assert 0.3 <= min(ratios) and max(ratios) <= 3.0


def test_dyadic_energy_norm_accepts_bundles():
    g = Grid(1, 2 * math.pi, 64)
    f = Field.mode(g, 3)
    b = StateBundle(f, f, Field.zeros(g))
    assert dyadic_energy_norm([b], 0.0) == pytest.approx(math.sqrt(2) * dyadic_energy_norm([f], 0.0))


def shell_hat(g, N, seed):
    rng = np.random.default_rng(seed)
    k = np.abs(g.k1d)
    return (rng.normal(size=g.M) + 1j * rng.normal(size=g.M)) * (k >= N) * (k <= 1.5 * N)


def shell_sample(N=4, sigma=1.0, Q=64, T=2 * math.pi, seed=0, M=64, t0=0.0, window=False):
    g = Grid(1, 2 * math.pi, M)
    hat = shell_hat(g, N, seed)
    times = t0 + np.arange(Q) * (T / Q)
    w = eta(times) if window else np.ones(Q)
    vals = np.stack([wt * np.fft.ifft(hat * np.exp(-1j * sigma * g.k1d**2 * t)) for wt, t in zip(w, times)])
    return SpaceTimeSample(g, t0, T / Q, vals)


def data_norm(g, N, seed):
    return math.sqrt(float(np.sum(np.abs(np.fft.ifft(shell_hat(g, N, seed))) ** 2)) * g.weight)


def test_xns_is_homogeneous():
    F = shell_sample()
    assert xns_norm(F.with_values(3j * F.values), 4, 1.0) == pytest.approx(3 * xns_norm(F, 4, 1.0), rel=1e-12)


def test_xns_single_shell_zero():
    F = shell_sample(Q=512)
    # a time-periodic free solution has modulation exactly zero, so only shell zero contributes
    ltwo = math.sqrt(float(np.sum(np.abs(F.values) ** 2)) * F.dt * F.grid.weight)
    assert xns_norm(F, 4, 1.0) == pytest.approx(ltwo, rel=1e-10)


def test_xns_rejects_off_shell_input():
    F = shell_sample(N=4)
    with pytest.raises(SupportError):
        xns_norm(F, 32, 1.0)


def test_xns_windowed_free_wave_bounded_uniformly_in_N():
    ratios = []
    for k in range(1, 6):
        N = 2**k
        g = Grid(1, 2 * math.pi, 8 * N)
        Q = 2 ** int(math.ceil(math.log2(4 * 2.25 * N * N * 4 / math.pi))) if N > 2 else 256
        F = shell_sample(N=N, M=8 * N, Q=Q, T=4.0, t0=-2.0, seed=k, window=True)
        ratios.append(xns_norm(F, N, 1.0) / data_norm(g, N, k))
    assert max(ratios) / min(ratios) <= 2.0


def test_proxies_vanish_on_zero_field():
    F = shell_sample()
    Z = F.with_values(np.zeros_like(F.values))
    assert f_norm_proxy(Z, 4, 1.0, 1.0) == 0.0
    assert g_norm_proxy(Z, 4, 1.0, 1.0) == 0.0


def proxy_sample(N, T, seed, windows=3):
    span = (10 / 3) * T / N + (windows - 1) * T / (4 * N)
    dt = 1 / (8 * 2.25 * N * N)
    return shell_sample(N=N, M=8 * N, Q=int(span / dt) + 2, T=dt * (int(span / dt) + 2), seed=seed)


def test_g_proxy_bounded_by_f_proxy_times_weight():
    N, T = 4, 1.0
    F = proxy_sample(N, T, 0)
    f = f_norm_proxy(F, N, 1.0, T)
    g = g_norm_proxy(F, N, 1.0, T)
    assert 0 < g <= f * (T / N) * (1 + 1e-12)


def test_f_proxy_free_solution_bounded_uniformly():
    vals = []
    for k in range(1, 6):
        N = 2**k
        F = proxy_sample(N, 1.0, k)
        vals.append(f_norm_proxy(F, N, 1.0, 1.0) / data_norm(F.grid, N, k))
    assert max(vals) / min(vals) <= 3.0


def test_proxy_rejects_bad_T():
    F = shell_sample()
    with pytest.raises(ValueError):
        f_norm_proxy(F, 4, 1.0, 2.0)
