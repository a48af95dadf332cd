import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccnls.fields import Field, Grid, StateBundle
from ccnls.norms import homogeneous_norm
from ccnls.system import (
    ParameterError,
    Regime,
    SystemParams,
    commutator_pn,
    double_commutator,
    nonlinearity,
    resonance_quantities,
    scaling_transform,
)


def rand_field(g, seed, ncomp=None, band=None):
    rng = np.random.default_rng(seed)
    n = g.d if ncomp is None else ncomp
    hat = rng.normal(size=(n,) + g.shape) + 1j * rng.normal(size=(n,) + g.shape)
    if band is not None:
        hat = hat * (g.xi_abs <= band)
    return Field(g, hat, spectral=True)


@pytest.mark.parametrize("abg,kt,regime", [
    ((1, 1, 1), 0.0, Regime.ShortTime),
    ((2, 1, 1), 2.0, Regime.Iteration),
    ((1, -1, 1), 0.0, Regime.IllPosedLine),
])
def test_classification_examples(abg, kt, regime):
    r = resonance_quantities(SystemParams(*abg))
    assert r.kappa_tilde == kt
    assert r.regime == regime


def test_b_value_for_unit_parameters():
    assert resonance_quantities(SystemParams(1, 1, 1)).b == 0.0


def test_params_reject_zero_coefficients():
    with pytest.raises(ParameterError):
        SystemParams(0, 1, 1)


def test_params_json_roundtrip():
    p = SystemParams(1.5, -0.5, 2.0, K=32, d=2)
    assert SystemParams.from_json(p.to_json()) == p


def test_nonlinearity_zero_state():
    g = Grid(1, 2 * math.pi, 32)
    z = StateBundle.zeros(g)
    for f in nonlinearity(z, SystemParams(1, 1, 1)):
        assert np.all(f.hat == 0)


def test_nonlinearity_with_v_zero():
    g = Grid(1, 2 * math.pi, 32)
    u = Field.mode(g, 2)
    w = rand_field(g, 1, band=5)
    n1, n2, n3 = nonlinearity(StateBundle(u, Field.zeros(g), w), SystemParams(1, 1, 1))
    assert np.allclose(n1.hat, 0)
    assert np.allclose(n3.hat, 0)


def test_nonlinearity_single_mode_product():
    L = 2 * math.pi
    g = Grid(1, L, 64)
    a, c = 3, 5
    w = Field.mode(g, a)
    v = Field.mode(g, c)
    n1, _, _ = nonlinearity(StateBundle(Field.zeros(g), v, w), SystemParams(1, 1, 1), dealias=False)
    expected = (1j * a) * np.exp(1j * (a + c) * g.x[0])
    assert np.allclose(n1.values[0], expected, atol=1e-12)


def test_commutator_of_constant_vanishes():
    g = Grid(1, 2 * math.pi, 64)
    f = Field(g, np.full((1, 64), 2.5 + 1j))
    out = commutator_pn(f, rand_field(g, 0), 4)
    assert np.max(np.abs(out.values)) <= 1e-12


def test_commutator_plateau_example():
    g = Grid(1, 2 * math.pi, 256)
    N = 16
    # psi_16 is one on [40/3, 64/3]; g at 16 and f at frequency 1 keep the product in it
    gf = Field.mode(g, 16)
    f = Field.mode(g, 1, amplitude=0.3)
    assert np.max(np.abs(commutator_pn(f, gf, N).values)) <= 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 1000), st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_commutator_bilinear(seed, c):
    g = Grid(1, 2 * math.pi, 32)
    f1, f2, h = rand_field(g, seed), rand_field(g, seed + 1), rand_field(g, seed + 2)
    lhs = commutator_pn(f1 + c * f2, h, 4).values
    rhs = commutator_pn(f1, h, 4).values + c * commutator_pn(f2, h, 4).values
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_double_commutator_with_zero_argument():
    g = Grid(1, 2 * math.pi, 64)
    f = rand_field(g, 3)
    z = Field.zeros(g)
    assert np.allclose(double_commutator(f, z, 4).values, 0)
    assert np.allclose(double_commutator(z, z, 4).values, 0)


def test_double_commutator_low_frequency_inputs():
    g = Grid(1, 2 * math.pi, 256)
    N = 64
    # both inputs live in |xi| <= N/100, far from the shell of N
    f = rand_field(g, 4, band=N / 100)
    h = rand_field(g, 5, band=N / 100)
    assert np.max(np.abs(double_commutator(f, h, N).values)) <= 1e-10


def test_double_commutator_symmetric_for_scalars():
    g = Grid(1, 2 * math.pi, 64)
    f, h = rand_field(g, 6), rand_field(g, 7)
    a, b = double_commutator(f, h, 8).values, double_commutator(h, f, 8).values
    # equal up to rounding of fused multiply-add in the complex products
    assert np.max(np.abs(a - b)) <= 1e-14 * np.max(np.abs(a))


def test_scaling_identity_and_composition():
    g = Grid(1, 2 * math.pi, 64)
    s = StateBundle(rand_field(g, 1), rand_field(g, 2), rand_field(g, 3))
    same = scaling_transform(s, 1.0)
    assert np.allclose(same.u.values, s.u.values)
    ab = scaling_transform(scaling_transform(s, 2.0), 4.0)
    direct = scaling_transform(s, 8.0)
    assert ab.grid == direct.grid
    assert np.allclose(ab.v.values, direct.v.values)


@pytest.mark.parametrize("d", [1, 2])
def test_scaling_critical_seminorm_invariant(d):
    g = Grid(d, 2 * math.pi, 32)
    s = StateBundle(rand_field(g, 1, band=8), rand_field(g, 2, band=8), rand_field(g, 3, band=8))
    sc = d / 2 - 1
    for lam in (2.0, 0.5):
        out = scaling_transform(s, lam)
        assert homogeneous_norm(out, sc) == pytest.approx(homogeneous_norm(s, sc), rel=1e-10)


def test_scaling_rejects_non_dyadic():
    g = Grid(1, 2 * math.pi, 16)
    with pytest.raises(ParameterError):
        scaling_transform(StateBundle.zeros(g), 3.0)
