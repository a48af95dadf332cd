import math

import numpy as np
import pytest

from ccnls.estimates import (
    bilinear_bound,
    bilinear_norm_fourier,
    bilinear_norm_physical,
    bilinear_ratio_experiment,
    quadratic_estimate_experiment,
    quadratic_lhs,
    random_shell_bumps,
    random_time_profile,
    trilinear_ratio_experiment,
    trilinear_window_integral,
)
from ccnls.fields import Grid
from ccnls.fitting import EstimateReport, loglog_fit
from ccnls.system import ParameterError, SystemParams


def bilinear_inputs(seed, N1=16, N2=2, j1=1, j2=2):
    rng = np.random.default_rng(seed)
    return (random_shell_bumps(rng, N1), random_shell_bumps(rng, N2),
            random_time_profile(rng, j1), random_time_profile(rng, j2))


def test_bilinear_disjoint_time_supports():
    rep = bilinear_ratio_experiment([16, 32], 2, 1, 1, ensemble=4, disjoint=True)
    assert max(rep.sup_ratio) == 0.0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_bilinear_fourier_matches_physical_oracle(seed):
    a1, a2, b1, b2 = bilinear_inputs(seed)
    four = bilinear_norm_fourier(a1, a2, b1, b2, 1.0, 1.0)[0]
    # |xi| up to 5N/3 must fit below the grid's Nyquist frequency pi M / L
    phys = bilinear_norm_physical(a1, a2, b1, b2, 1.0, 1.0, L=1024.0, M=16384)
    assert four == pytest.approx(phys, rel=1e-3)


def test_bilinear_norms_are_homogeneous():
    a1, a2, b1, b2 = bilinear_inputs(3)
    base, n1, n2 = bilinear_norm_fourier(a1, a2, b1, b2, 1.0, 1.0)
    sc, m1, m2 = bilinear_norm_fourier(a1.scaled(2.0), a2.scaled(-3j), b1, b2, 1.0, 1.0)
    assert sc == pytest.approx(6 * base, rel=1e-10)
    assert m1 * m2 == pytest.approx(6 * n1 * n2, rel=1e-10)


def test_bilinear_bound_interpolation_at_zero():
    assert bilinear_bound(64, 2, 1, 3, 1, a=1e-12) == pytest.approx(bilinear_bound(64, 2, 1, 3, 1), rel=1e-9)


def test_bilinear_regime_check():
    with pytest.raises(ParameterError):
        bilinear_ratio_experiment([4], 2, 1, 1, ensemble=2)


def test_bilinear_sup_ratio_stable_within_factor_three():
    rep = bilinear_ratio_experiment([2**k for k in range(4, 10)], 2, 1, 1, ensemble=20, seed=1)
    sup = rep.sup_ratio
    assert max(sup) / min(sup) <= 3.0


def test_bilinear_small_ensemble_warns():
    rep = bilinear_ratio_experiment([16], 2, 1, 1, ensemble=3)
    assert rep.warnings


def test_trilinear_zero_factor():
    rng = np.random.default_rng(0)
    a1, a2, a3 = (random_shell_bumps(rng, 16) for _ in range(3))
    p = SystemParams(1, 1, 1)
    assert trilinear_window_integral(a1.scaled(0.0), a2, a3, p, 0.1) == 0
    assert trilinear_window_integral(a1, a2, a3.scaled(0.0), p, 0.1) == 0


def test_trilinear_short_window_limit():
    # for tiny tau the time integral is tau times the frequency convolution
    rng = np.random.default_rng(1)
    a2 = random_shell_bumps(rng, 16, centers=[20.0])
    a3 = random_shell_bumps(rng, 2, centers=[2.0])
    a1 = random_shell_bumps(rng, 16, centers=[22.0])
    p = SystemParams(1, 1, 1)
    small = trilinear_window_integral(a1, a2, a3, p, 1e-9)
    smaller = trilinear_window_integral(a1, a2, a3, p, 5e-10)
    assert small == pytest.approx(2 * smaller, rel=1e-6)


def test_trilinear_needs_alpha_equal_gamma():
    with pytest.raises(ParameterError):
        trilinear_ratio_experiment([16], "w_low", SystemParams(2, 1, 1))


@pytest.mark.parametrize("case", ["w_low", "v_low"])
def test_trilinear_sharp_cases_slope_stable(case):
    rep = trilinear_ratio_experiment([2**k for k in range(5, 10)], case, SystemParams(1, 1, 1), ensemble=100)
    assert abs(rep.slope) <= 0.1


@pytest.mark.parametrize("case", ["u_low", "comparable"])
def test_trilinear_other_cases_do_not_grow(case):
    rep = trilinear_ratio_experiment([2**k for k in range(5, 10)], case, SystemParams(1, 1, 1), ensemble=100)
    assert rep.slope <= 0.1


def test_quadratic_zero_factor():
    g = Grid(1, 32 * math.pi, 4096)
    rng = np.random.default_rng(0)
    f = random_shell_bumps(rng, 8)(g.xi[0])
    z = np.zeros_like(f)
    assert quadratic_lhs(g, f, z, 8, 1.5, 1.0) == 0.0
    assert quadratic_lhs(g, z, f, 8, 1.5, 1.0) == 0.0


@pytest.mark.parametrize("case", ["high_low", "high_high"])
def test_quadratic_slope_stable(case):
    rep = quadratic_estimate_experiment([4, 8, 16, 32, 64], case, ensemble=12)
    assert abs(rep.slope) <= 0.1


def test_quadratic_high_low_needs_separated_shells():
    with pytest.raises(ParameterError):
        quadratic_estimate_experiment([2, 4, 8, 16, 32], "high_low")


def test_estimate_report_needs_five_points():
    rep = EstimateReport("x", {})
    for k, N in enumerate([2, 4, 8, 16]):
        rep.add(N, 0, 1.0)
    assert rep.slope is None
    rep.add(32, 0, 1.0)
    assert rep.slope == pytest.approx(0.0, abs=1e-12)


def test_loglog_fit_exact_power():
    x = [2.0**k for k in range(6)]
    f = loglog_fit(x, [3 * v**0.5 for v in x])
    assert f.slope == pytest.approx(0.5, abs=1e-12)
