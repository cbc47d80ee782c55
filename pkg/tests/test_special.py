import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special as sps

from pjx import special
from pjx.errors import ParameterError


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 1.5, 2.5, 7.3, 20.0, 29.5, -0.5, -2.7, -1.0 + 1e-7])
def test_gamma_matches_scipy(x):
    assert special.gamma(x) == pytest.approx(sps.gamma(x), rel=1e-12)


def test_gamma_poles():
    with pytest.raises(ParameterError):
        special.gamma(-3.0)
    assert special.rgamma(-2.0) == 0.0


@given(st.floats(0.05, 30.0))
def test_gamma_recurrence(x):
    assert special.gamma(x + 1) == pytest.approx(x * special.gamma(x), rel=1e-12)


@given(st.floats(0.05, 0.95))
def test_reflection(x):
    assert special.gamma(x) * special.gamma(1 - x) == pytest.approx(math.pi / math.sin(math.pi * x), rel=1e-12)


@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_beta_symmetry_and_definition(p, s):
    b = special.beta(p, s)
    assert b == pytest.approx(special.beta(s, p), rel=1e-13)
    assert b == pytest.approx(special.gamma(p) * special.gamma(s) / special.gamma(p + s), rel=1e-11)


def test_known_values():
    assert special.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert special.beta(2.0, 3.0) == pytest.approx(1 / 12, rel=1e-14)


@pytest.mark.parametrize(
    "a,b,c,z",
    [
        (0.5, 1.0, 1.5, 0.3),
        (1.0, 2.0, 3.0, -0.8),
        (2.0, 0.3, 2.5, 0.9),
        (1 / 3, 2.0, 4 / 3, -5.0),
        (0.8, 1.7, 1.8, -40.0),
        (1.0, 1.0, 2.0, 1e-3),
    ],
)
def test_hyp2f1_matches_scipy(a, b, c, z):
    assert special.hyp2f1(a, b, c, z) == pytest.approx(sps.hyp2f1(a, b, c, z), rel=1e-11)


def test_hyp2f1_closed_forms():
    # 2F1(1, 1; 2; z) = -log(1 - z) / z
    for z in (-0.7, 0.4):
        assert special.hyp2f1(1.0, 1.0, 2.0, z) == pytest.approx(-math.log1p(-z) / z, rel=1e-12)
    z = -3.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        assert special.hyp2f1(1.0, 1.0, 2.0, z) == pytest.approx(-math.log1p(-z) / z, rel=1e-9)
    assert special.hyp2f1(0.5, 1.0, 3.0, 1.0) == pytest.approx(
        special.gamma(3.0) * special.gamma(1.5) / (special.gamma(2.5) * special.gamma(2.0)), rel=1e-13
    )


@pytest.mark.parametrize("a,b,c,z", [(2.0, 1.0, 2.5, -4.0), (2.5, 0.5, 3.5, -1.5), (1 / 3, 1 / 3, 4 / 3, -1e4)])
def test_integer_difference_warns(a, b, c, z):
    with pytest.warns(RuntimeWarning):
        v = special.hyp2f1(a, b, c, z)
    assert v == pytest.approx(sps.hyp2f1(a, b, c, z), rel=5e-8)


def test_continuation_rejects_integer_difference():
    with pytest.raises(ParameterError):
        special.hyp2f1_continued(2.0, 1.0, 2.5, -4.0)


def test_gamma_near_pole_is_accurate():
    eps = 1e-7
    # Gamma(-1 + eps) = -1/eps + (gamma_E - 1) + O(eps)
    assert special.gamma(-1.0 + eps) == pytest.approx(sps.gamma(-1.0 + eps), rel=1e-13)


def test_hyp2f1_domain():
    with pytest.raises(ParameterError):
        special.hyp2f1(1.0, 1.0, -2.0, 0.1)
    with pytest.raises(ParameterError):
        special.hyp2f1(1.0, 1.0, 2.0, 1.5)
    with pytest.raises(ParameterError):
        special.hyp2f1(1.0, 1.0, 1.5, 1.0)


@given(st.floats(0.3, 4.0), st.floats(0.2, 3.0), st.floats(1.05, 60.0))
def test_continuation_against_quadrature(q, b, c0):
    # int_0^1 (1 + c0 s^q)^-b ds = 2F1(1/q, b; 1 + 1/q; -c0)
    d = 1 / q - b
    if abs(d - round(d)) < 1e-6:
        return
    ref = integrate.quad(lambda s: (1 + c0 * s**q) ** -b, 0, 1, epsabs=0, epsrel=1e-13, limit=200)[0]
    assert special.hyp2f1_continued(1 / q, b, 1 + 1 / q, -c0) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("q,b", [(0.5, 1.5), (2.0, 0.7), (5.0, 2.5), (1.2, 1.0)])
def test_power_antiderivative_differentiates_back(q, b):
    assert special.lemma_diff_check(q, b, 1.0, 0.3, (-0.6, 1.2), 1.5) < 1e-8


def test_lemma_diff_check_preconditions():
    with pytest.raises(ParameterError):
        special.lemma_diff_check(2.0, 1.0, 2.0, 0.0, (-0.5, 0.5), 1.0)
    with pytest.raises(ParameterError):
        special.lemma_diff_check(2.0, 1.0, 1.0, 0.0, (-2.0, 0.5), 1.0)


def test_beta_by_quadrature():
    for p in (0.3, 1.7, 2.5):
        for s_ in (0.3, 1.7, 2.5):
            ref = integrate.quad(lambda t: 1.0, 0, 1, weight="alg", wvar=(p - 1, s_ - 1), epsabs=0, epsrel=1e-13)[0]
            assert special.beta(p, s_) == pytest.approx(ref, rel=1e-9)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("q,b", [(1.0, 2.0), (2.0, 1.0), (3.0, 0.5)])
def test_trig_integral_identity(q, b):
    f = lambda th: np.cos(th) ** (2 * b - 2 / q - 1) * np.sin(th) ** (2 / q - 1)
    lhs = 2 * integrate.quad(f, 0, np.pi / 2, epsabs=0, epsrel=1e-13, limit=200)[0]
    rhs = q * special.gamma(1 + 1 / q) * special.gamma(b - 1 / q) / special.gamma(b)
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_power_antiderivative_is_odd():
    x = np.array([0.2, 0.5, 0.9])
    f = special.power_antiderivative(x, 1.5, 1.2, 1.0, 0.0, 1.0)
    g = special.power_antiderivative(-x, 1.5, 1.2, 1.0, 0.0, 1.0)
    np.testing.assert_allclose(f, -g, rtol=1e-14)
