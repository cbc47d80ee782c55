import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as si

from pjx.errors import DomainError, OutOfRangeError
from pjx.profiles import BUILTIN_LAMBDA, builtin, powerlaw
from pjx.solution import (
    EtaTimeMap,
    SolutionFrame,
    characteristic,
    eta_of_time,
    eulerian_alpha,
    extrema,
    gamma_alpha,
    lagrangian_to_eulerian,
    time_of_eta,
    ux,
    ux_final_form,
    uxx,
)

A = np.linspace(0.0, 1.0, 41)


def _kbar0_oracle(p, lam, eta):
    f = lambda a: (1 - lam * eta * p.u0p(a)) ** (-1 / lam)
    return si.quad(f, 0, 1, epsabs=0, epsrel=1e-13, limit=200)[0]


@pytest.mark.parametrize("eta", [0.3, 1.0, 1.7])
def test_ex6_kbar0_and_time(eta):
    p = builtin("ex6_linear")
    f = SolutionFrame.at(p, 1.0, eta)
    assert f.kbar0 == pytest.approx(_kbar0_oracle(p, 1.0, eta), rel=1e-11)
    t_ref = si.quad(lambda e: _kbar0_oracle(p, 1.0, e) ** 2, 0, eta, epsabs=0, epsrel=1e-11)[0]
    assert f.t == pytest.approx(t_ref, rel=1e-9)


def test_ex1_time_against_nested_oracle():
    p = builtin("ex1_q13")

    def k0(e):
        return si.quad(lambda s: 3 * s * s * (1 - 0.5 * e * p.u0p(s**3)) ** -2, 0, 1, epsabs=0, epsrel=1e-13)[0]

    ref = si.quad(k0, 0, 1.5, epsabs=0, epsrel=1e-12)[0]
    assert time_of_eta(0.5, p, 1.5) == pytest.approx(ref, rel=1e-10)


@given(st.floats(0.0, 0.39))
def test_burgers_clock(eta):
    # lambda = -1: Kbar0 = int J = 1, so t = eta
    p = builtin("ex4_q32")
    f = SolutionFrame.at(p, -1.0, eta)
    assert f.kbar0 == pytest.approx(1.0, abs=1e-13)
    assert f.t == pytest.approx(eta, abs=1e-13)


def test_initial_data_recovered():
    for name in ("ex2_q5", "ex5_mixed", "ex6_linear"):
        p = builtin(name)
        f = SolutionFrame.at(p, BUILTIN_LAMBDA[name], 0.0)
        np.testing.assert_allclose(ux(f, A), p.u0p(A), atol=1e-14)
        np.testing.assert_allclose(characteristic(f, A), A, atol=1e-14)


def test_small_eta_forms_agree():
    p = builtin("ex2_q5")
    for eta in (1e-9, 1e-7, 1e-3):
        f = SolutionFrame.at(p, 2.0, eta)
        np.testing.assert_allclose(ux(f, A), ux_final_form(f, A), rtol=1e-7, atol=1e-9)
    f = SolutionFrame.at(p, 2.0, 1e-10)
    np.testing.assert_allclose(ux(f, A), p.u0p(A), atol=1e-8)


@pytest.mark.parametrize("name", ["ex1_q13", "ex2_q52", "ex4_q32", "ex6_linear"])
def test_mean_zero_and_endpoints(name):
    p = builtin(name)
    lam = BUILTIN_LAMBDA[name]
    f = SolutionFrame.at(p, lam, 0.6 * p.eta_star(lam))
    # gamma(1) = 1 and int u_x dx = u(1) - u(0) = 0
    assert characteristic(f, [1.0])[0] == pytest.approx(1.0, abs=1e-10)
    m = f.kernel.integrate(lambda a, J, w: ux(f, a) * gamma_alpha(f, a)).value
    assert abs(m) < 1e-10


def test_uxx_matches_difference_of_ux():
    p = builtin("ex6_linear")
    f = SolutionFrame.at(p, 1.0, 1.2)
    a = np.linspace(0.05, 0.95, 19)
    h = 1e-5
    dux = (ux(f, a + h) - ux(f, a - h)) / (2 * h)
    dx = (characteristic(f, a + h) - characteristic(f, a - h)) / (2 * h)
    np.testing.assert_allclose(uxx(f, a), dux / dx, rtol=1e-6, atol=1e-8)


def test_eulerian_alpha_inverts_characteristic():
    p = builtin("ex5_mixed")
    f = SolutionFrame.at(p, -1 / 3, 20.0)
    a = np.linspace(0, 1, 57)
    x = characteristic(f, a)
    np.testing.assert_allclose(eulerian_alpha(f, x), a, atol=1e-10)


def test_eulerian_dump():
    p = builtin("ex2_q5")
    f = SolutionFrame.at(p, 2.0, 0.3)
    a, x, v, u = lagrangian_to_eulerian(f, 101)
    assert u[0] == 0 and abs(u[-1]) < 1e-10
    assert np.all(np.diff(x) > 0)
    # u_x is the x-derivative of u
    np.testing.assert_allclose(np.gradient(u, x)[5:-5], v[5:-5], rtol=2e-3, atol=2e-3)


def test_extrema_follow_extremal_characteristics():
    p = builtin("ex6_linear")
    f = SolutionFrame.at(p, 1.0, 1.5)
    M, m = extrema(f)
    assert M == pytest.approx(ux(f, [0.0])[0])
    assert m == pytest.approx(ux(f, [0.5])[0])


def test_eta_time_map_round_trip():
    p = builtin("ex3_q6")
    tm = EtaTimeMap.build(5.5, p, knots=60)
    for eta in (0.1, 1.0, 1.9, 1.999):
        t = time_of_eta(5.5, p, eta)
        assert eta_of_time(tm, t) == pytest.approx(eta, rel=1e-8)
    with pytest.raises(OutOfRangeError):
        eta_of_time(tm, tm.t_star + 1)


def test_domain_errors():
    p = builtin("ex2_q5")
    with pytest.raises(OutOfRangeError):
        time_of_eta(2.0, p, 0.5)
    with pytest.raises(DomainError):
        time_of_eta(0.0, p, 0.1)
    with pytest.raises(DomainError):
        characteristic(SolutionFrame.at(p, 2.0, 0.1), [1.5])


@settings(max_examples=30)
@given(st.floats(0.4, 4.0), st.floats(0.2, 3.0), st.floats(0.05, 0.95))
def test_time_is_increasing(q, lam, frac):
    p = powerlaw(q)
    es = p.eta_star(lam)
    t1 = time_of_eta(lam, p, frac * es)
    t2 = time_of_eta(lam, p, min(frac + 0.04, 0.99) * es)
    assert 0 < t1 < t2
