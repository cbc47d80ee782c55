import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as si

from pjx.errors import DivergenceError, DomainError, SingularityGuardError
from pjx.profiles import builtin, powerlaw
from pjx.quadrature import (
    DEFAULT_SPEC,
    NODES,
    WG,
    WK,
    Kernel,
    QuadratureSpec,
    check_jpow,
    gk15,
    integrate,
    integrate_jpow,
    wynn_epsilon,
)


def test_rule_weights():
    assert WK.sum() == pytest.approx(2.0, abs=1e-15)
    assert WG.sum() == pytest.approx(2.0, abs=1e-15)
    # Kronrod rule is exact for degree 22 polynomials
    assert np.sum(WK * NODES**22) == pytest.approx(2 / 23, rel=1e-13)


def test_gk15_polynomial():
    v, e = gk15(lambda x: x**5, np.array([0.0]), np.array([2.0]))[:2]
    assert v[0] == pytest.approx(64 / 6, rel=1e-14)


@pytest.mark.parametrize(
    "f,exact",
    [
        (lambda x: np.exp(x), math.e - 1),
        (lambda x: x ** -0.5, 2.0),
        (lambda x: (1 - x) ** (-2 / 3), 3.0),
        (lambda x: np.log(x), -1.0),
        (lambda x: x ** -0.9, 10.0),
    ],
)
def test_integrate_endpoint_singularities(f, exact):
    r = integrate(f, 0.0, 1.0)
    assert r.value == pytest.approx(exact, rel=1e-9)
    assert r.converged


def test_integrate_interior_breakpoint():
    r = integrate(lambda x: np.abs(x - 0.3) ** -0.5, 0.0, 1.0, points=[0.3])
    assert r.value == pytest.approx(2 * math.sqrt(0.3) + 2 * math.sqrt(0.7), rel=1e-9)


def test_wynn_accelerates_series():
    partial = np.cumsum([(-1) ** k / (k + 1) for k in range(20)])
    v, err = wynn_epsilon(partial)
    assert v == pytest.approx(math.log(2), abs=1e-12)


def test_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=0, rel_tol=0)
    with pytest.raises(DomainError):
        QuadratureSpec(max_depth=0)


def test_ex1_kernel_at_eta_star():
    p = builtin("ex1_q13")
    assert integrate_jpow(p, 0.5, b_exp=2, jbar=0.0).value == pytest.approx(27 / 16, rel=1e-12)


@given(st.floats(0.0, 1.99))
def test_ex1_kernel_against_substituted_oracle(eta):
    p = builtin("ex1_q13")
    # alpha = s^3 removes the cusp at the maximum
    ref = si.quad(lambda s: 3 * s * s * (1 - 0.5 * eta * p.u0p(s**3)) ** -2, 0, 1, epsabs=0, epsrel=1e-13)[0]
    assert integrate_jpow(p, 0.5, eta, 2.0).value == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("jbar", [1e-1, 1e-3, 1e-6])
def test_ex2_kernel_against_scipy(jbar):
    p = builtin("ex2_q5")
    lam = 2.0
    es = p.eta_star(lam)
    eta = (1 - jbar) * es
    w = (jbar / (lam * eta * 6.0)) ** 0.2
    pts = [w * k for k in (0.1, 1, 10) if w * k < 1]

    def f(a):
        return (jbar + lam * eta * p.gap(0.0, np.array([a]))[0]) ** -0.5

    ref = si.quad(f, 0, 1, points=pts, epsabs=0, epsrel=1e-12, limit=400)[0]
    assert integrate_jpow(p, lam, b_exp=0.5, jbar=jbar).value == pytest.approx(ref, rel=1e-9)


def test_kernel_J_is_cancellation_free():
    p = builtin("ex2_q5")
    k = Kernel.make(p, 2.0, jbar=1e-12)
    J = k.J(np.array([0.0, 1e-4]))
    assert J[0] == pytest.approx(1e-12, rel=1e-12)
    assert J[1] > J[0]


def test_divergence_and_guard():
    p = builtin("ex2_q5")
    with pytest.raises(DivergenceError):
        check_jpow(Kernel.make(p, 2.0, jbar=0.0), 0.5)
    with pytest.raises(SingularityGuardError):
        check_jpow(Kernel.make(p, 2.0, jbar=1e-15), 0.5)
    check_jpow(Kernel.make(p, 2.0, jbar=1e-15, spec=QuadratureSpec(singularity_guard=1e-16)), 0.5)


def test_beyond_eta_star():
    with pytest.raises(DomainError):
        Kernel.make(builtin("ex2_q5"), 2.0, eta=0.6)


@given(st.floats(0.3, 5.0), st.floats(-4, -1))
def test_kernel_integral_positive_and_monotone(q, logj):
    p = powerlaw(q)
    j = 10.0**logj
    a = integrate_jpow(p, 1.0, b_exp=1.5, jbar=j).value
    b = integrate_jpow(p, 1.0, b_exp=1.5, jbar=j / 2).value
    assert 0 < a < b


def test_eta_zero_is_one():
    assert integrate_jpow(builtin("ex6_linear"), 1.0, 0.0, 3.0).value == 1.0


def test_default_spec_guard():
    assert DEFAULT_SPEC.singularity_guard == 1e-13
