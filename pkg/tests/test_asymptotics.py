import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pjx import special
from pjx.asymptotics import (
    blowup_locations,
    blowup_tail,
    blowup_time,
    flank_constant,
    kbar_estimate,
    lemma_general,
)
from pjx.errors import DomainError, ExcludedParameterError, UnsupportedRegimeError
from pjx.profiles import Extremum, builtin, powerlaw
from pjx.quadrature import QuadratureSpec, integrate_jpow


def _profile(q, lam):
    return powerlaw(q, kind="max" if lam > 0 else "min")


@pytest.mark.parametrize("lam,q,b", [(1.0, 1.0, 2.0), (0.5, 2.0, 2.0), (-2.5, 1.5, 2.0), (2.0, 5.0, 0.5)])
def test_power_regime_ratio_tends_to_one(lam, q, b):
    p = _profile(q, lam)
    est = lemma_general(lam, q, b, p)
    assert est.regime == "power" and est.exponent == pytest.approx(1 / q - b)
    spec = QuadratureSpec(singularity_guard=1e-16)
    errs = [abs(integrate_jpow(p, lam, b_exp=b, jbar=j, spec=spec).value / est(j) - 1) for j in (1e-4, 1e-8, 1e-12)]
    assert errs[2] < errs[0]
    assert errs[2] < 1e-2


def test_log_regime():
    # q = 1, b = 1: Kbar ~ A log(1/J) + B
    p = powerlaw(1.0)
    est = lemma_general(1.0, 1.0, 1.0, p)
    assert est.regime == "log"
    spec = QuadratureSpec(singularity_guard=1e-16)
    for j in (1e-6, 1e-10):
        assert integrate_jpow(p, 1.0, b_exp=1.0, jbar=j, spec=spec).value == pytest.approx(est(j), rel=1e-4)


def test_bounded_regime_limit():
    p = powerlaw(2.0)
    est = lemma_general(1.0, 2.0, 0.25, p)
    assert est.case == "case3"
    # the approach to the limit is like J^(1/q - b)
    d1 = est.C - integrate_jpow(p, 1.0, b_exp=0.25, jbar=1e-8).value
    d2 = est.C - integrate_jpow(p, 1.0, b_exp=0.25, jbar=1e-12).value
    assert 0 < d2 < d1
    assert d2 / d1 == pytest.approx(1e-4**0.25, rel=0.05)


def test_unsupported_bounded_case():
    with pytest.raises(UnsupportedRegimeError):
        lemma_general(0.5, 1 / 3, 2.0, powerlaw(1 / 3))


def test_lemma_domain():
    with pytest.raises(DomainError):
        lemma_general(0.0, 1.0, 1.0, powerlaw(1.0))


def test_interior_extremum_counts_two_flanks():
    one = Extremum(0.0, 2.0, -3.0)
    two = Extremum(0.5, 2.0, -3.0)
    assert flank_constant(two, 1.0, 1.5) == pytest.approx(2 * flank_constant(one, 1.0, 1.5))


@settings(max_examples=30)
@given(st.floats(0.6, 6.0), st.floats(0.02, 0.98))
def test_gamma_ratio_identity(q, frac):
    lam = frac * q
    p = powerlaw(q)
    c3 = kbar_estimate(lam, q, p, 0).C
    c4 = kbar_estimate(lam, q, p, 1).C
    assert c4 / c3 == pytest.approx(1 - lam / q, rel=1e-10)


def test_flank_constant_formula():
    e = Extremum(0.0, 3.0, -2.0)
    b = 1.5
    want = special.gamma(1 + 1 / 3) * special.gamma(b - 1 / 3) / special.gamma(b) * (1 / 2) ** (1 / 3)
    assert flank_constant(e, 1.0, b) == pytest.approx(want, rel=1e-14)


def test_resonance_averaged():
    # lambda = q/(1 - q) with q = 3/4: Kbar0 is bounded but lambda is resonant
    q = 0.75
    lam = q / (1 - q)
    p = powerlaw(q)
    est = kbar_estimate(lam, q, p, 0)
    assert est.regime == "bounded"
    assert any("resonant" in c for c in est.caveats)
    assert est.C == pytest.approx(integrate_jpow(p, lam, b_exp=1 / lam, jbar=0.0).value, rel=1e-5)
    with pytest.raises(ExcludedParameterError):
        kbar_estimate(lam, q, p, 0, continuity=False)
    with pytest.raises(UnsupportedRegimeError):
        kbar_estimate(lam, q, p, 1)


def test_blowup_times_of_examples():
    assert blowup_time(0.5, builtin("ex1_q13")).t_star == pytest.approx(2.25, abs=1e-6)
    assert blowup_time(1.0, builtin("ex6_linear")).t_star == pytest.approx(2.8048, abs=1e-3)
    assert math.isinf(blowup_time(2.0, builtin("ex2_q5")).t_star)
    assert math.isinf(blowup_time(1.25, builtin("ex2_q52")).t_star)


def test_blowup_time_insensitive_to_cutoff():
    p = builtin("ex6_linear")
    a = blowup_time(1.0, p, delta=1e-5).t_star
    b = blowup_time(1.0, p, delta=1e-7).t_star
    assert a == pytest.approx(b, rel=1e-6)


def test_burgers_closed_form():
    p = builtin("ex4_q32")
    r = blowup_time(-1.0, p)
    assert r.method == "closed-form" and r.t_star == p.eta_star(-1.0)


@pytest.mark.parametrize("lam", [-0.5, -2.5, -5.0])
def test_negative_lambda_brackets(lam):
    p = powerlaw(1.5, kind="min")
    r = blowup_time(lam, p)
    lo, hi = r.bracket
    assert lo <= r.t_star <= hi


def test_tail_classification():
    p = powerlaw(2.0)
    assert not blowup_tail(0.8, 2.0, p).finite  # 2 lambda / q - 1 < 0
    assert blowup_tail(1.5, 2.0, p).finite
    assert not blowup_tail(1.0, 2.0, p).finite  # marginal: logarithmic divergence


def test_locations_ex5():
    xs = sorted(x for _, x in blowup_locations(-1 / 3, builtin("ex5_mixed")))
    assert xs[0] == pytest.approx(0.885, abs=0.005)
    assert xs[1] == pytest.approx(1.0, abs=1e-9)
