import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pjx.errors import ConsistencyError, DomainError, FitError, ParameterError
from pjx.profiles import (
    BUILTIN_LAMBDA,
    builtin,
    builtin_names,
    load_profile,
    polynomial_profile,
    powerlaw,
    profile_from_dict,
    profile_to_dict,
    validate,
    verify_local_expansion,
)

@pytest.mark.parametrize("name", builtin_names())
def test_builtins_validate(name):
    prof = builtin(name)
    validate(prof, n=200_001)
    assert name in BUILTIN_LAMBDA


@pytest.mark.parametrize("name", builtin_names())
def test_builtin_local_expansion(name):
    fits = verify_local_expansion(builtin(name))
    assert fits and all(f.ok for f in fits), fits


def test_example_data():
    p = builtin("ex1_q13")
    assert (p.M0, p.m0, p.q) == pytest.approx((1.0, -1 / 3, 1 / 3), rel=1e-14)
    assert p.eta_star(0.5) == pytest.approx(2.0)
    p = builtin("ex4_q32")
    assert p.eta_star(-2.5) == pytest.approx(0.4)
    assert p.q_active(-2.5) == pytest.approx(1.5)
    p = builtin("ex3_q6")
    assert p.M0 == pytest.approx(1 / 11)
    assert p.eta_star(5.5) == pytest.approx(2.0)
    p = builtin("ex5_mixed")
    assert len(p.minima) == 2
    assert sorted(e.q for e in p.min_points) == [1.0, 2.0]


def test_unknown_builtin():
    with pytest.raises(DomainError):
        builtin("nope")


def test_powerlaw_by_name():
    p = builtin("powerlaw(2.5)")
    assert p.q == 2.5
    assert builtin("powerlaw_min(1.5, 2)").m0 == -2.0


@given(st.floats(0.2, 6.0), st.sampled_from(["max", "min"]))
def test_powerlaw_is_consistent(q, kind):
    p = powerlaw(q, kind=kind)
    validate(p, n=100_001)
    fits = verify_local_expansion(p)
    central = [f for f in fits if f.alpha == 0.5]
    assert central and all(f.ok for f in central)


def test_powerlaw_bad_args():
    with pytest.raises((ParameterError, DomainError)):
        powerlaw(-1.0)
    with pytest.raises((ParameterError, DomainError)):
        powerlaw(2.0, kind="saddle")


def test_polynomial_profile_detects_structure():
    # u0' = 1 - 2 alpha: M0 = 1 at 0, m0 = -1 at 1, q = 1
    p = polynomial_profile([1.0, -2.0])
    assert (p.M0, p.m0) == pytest.approx((1.0, -1.0))
    assert p.maxima == (0.0,) and p.minima == (1.0,)
    assert p.q == pytest.approx(1.0)
    assert p.C1 == pytest.approx(-2.0)


def test_polynomial_rejects_nonzero_mean():
    with pytest.raises((ConsistencyError, ParameterError)):
        polynomial_profile([1.0, -1.0])


def test_json_round_trip(tmp_path):
    data = {"kind": "polynomial", "coeffs": [1.0, -2.0], "M0": 1.0, "m0": -1.0, "q": 1.0}
    path = tmp_path / "p.json"
    path.write_text(json.dumps(data))
    p = load_profile(str(path))
    d = profile_to_dict(p)
    assert d["M0"] == pytest.approx(1.0) and d["maxima"] == [0.0]


def test_json_declared_mismatch():
    with pytest.raises(ConsistencyError):
        profile_from_dict({"kind": "builtin", "name": "ex2_q5", "q": 4.0})
    with pytest.raises(ConsistencyError):
        profile_from_dict({"kind": "polynomial", "coeffs": [1.0, -2.0], "maxima": [0.5]})


def test_json_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(DomainError):
        load_profile(str(path))


def test_gap_is_accurate_near_extremum():
    p = builtin("ex2_q5")
    d = np.array([1e-6, 1e-4])
    # u0' near 0 is 1 - c d^5: the gap function must resolve values far below eps
    g = p.gap(0.0, d)
    assert np.all(g > 0)
    assert g[0] / g[1] == pytest.approx(1e-10, rel=1e-6)


def test_constant_neighbourhood_fails_fit():
    # u0' with a plateau at its maximum has no power law there
    p = powerlaw(2.0)
    flat = type(p)(
        name="flat",
        u0p=p.u0p,
        M0=p.M0,
        m0=p.m0,
        max_points=p.max_points,
        min_points=p.min_points,
        q=p.q,
        gap_fn=lambda point, d: np.zeros_like(np.asarray(d, dtype=float)),
    )
    with pytest.raises(FitError):
        verify_local_expansion(flat)
