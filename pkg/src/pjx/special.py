"""Special functions: gamma, beta and the real Gauss hypergeometric function.

The gamma function uses the Lanczos approximation (g = 7, nine terms) with the
reflection formula for x < 1/2. ``hyp2f1`` sums the power series on |z| < 1/2,
uses the Pfaff transformation on [-1, -1/2), Gauss's theorem at z = 1 and the
connection formula through 1/z for z < -1.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .errors import ConvergenceError, ParameterError

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

MAX_TERMS = 100_000
_SERIES_TOL = 1e-17
_INT_TOL = 1e-9
_PERTURB = 1e-7


def _is_nonpos_int(x: float) -> bool:
    return x <= 0 and abs(x - round(x)) < 1e-14 * max(1.0, abs(x))


def _lanczos_log_core(x: float) -> tuple[float, float]:
    # Gamma(x + 1) = sqrt(2 pi) t^(x + 1/2) e^-t A(x) with t = x + g + 1/2
    s = _LANCZOS[0]
    for k in range(1, 9):
        s += _LANCZOS[k] / (x + k)
    t = x + _LANCZOS_G + 0.5
    return (x + 0.5) * math.log(t) - t + 0.5 * math.log(2 * math.pi), s


def _sinpi(x: float) -> float:
    """sin(pi x) without the loss of accuracy near the integers."""
    n = round(x)
    r = x - n  # exact
    v = math.sin(math.pi * r)
    return -v if n % 2 else v


def gamma(x: float) -> float:
    """Gamma function for real x. Poles raise :class:`ParameterError`."""
    x = float(x)
    if math.isnan(x):
        raise ParameterError("gamma of nan")
    if _is_nonpos_int(x):
        raise ParameterError(f"gamma has a pole at {x}")
    if x < 0.5:
        s = _sinpi(x)
        return math.pi / (s * gamma(1.0 - x))
    logpart, s = _lanczos_log_core(x - 1.0)
    if logpart > 709.0:
        return math.inf
    return math.exp(logpart) * s


def rgamma(x: float) -> float:
    """Reciprocal gamma, zero at the poles."""
    x = float(x)
    if _is_nonpos_int(x):
        return 0.0
    if x < 0.5:
        return _sinpi(x) * gamma(1.0 - x) / math.pi
    return 1.0 / gamma(x)


def lgamma_abs(x: float) -> float:
    """log|Gamma(x)|."""
    x = float(x)
    if _is_nonpos_int(x):
        raise ParameterError(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.log(math.pi / abs(_sinpi(x))) - lgamma_abs(1.0 - x)
    logpart, s = _lanczos_log_core(x - 1.0)
    return logpart + math.log(s)


def beta(p: float, s: float) -> float:
    """Euler beta function B(p, s) = Gamma(p) Gamma(s) / Gamma(p + s)."""
    if p > 30 or s > 30:
        sign = 1.0
        for v in (p, s):
            if v < 0 and math.floor(v) % 2 == 1:
                sign = -sign
        return sign * math.exp(lgamma_abs(p) + lgamma_abs(s) - lgamma_abs(p + s))
    return gamma(p) * gamma(s) * rgamma(p + s)


def _series(a: float, b: float, c: float, z: float) -> float:
    """Direct power series, |z| < 1."""
    if _is_nonpos_int(c):
        raise ParameterError(f"hyp2f1 undefined for c = {c}")
    total = 1.0
    term = 1.0
    small = 0
    for k in range(MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        total += term
        if term == 0.0:
            return total
        if abs(term) <= _SERIES_TOL * abs(total):
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise ConvergenceError(
        f"hyp2f1 series did not converge in {MAX_TERMS} terms (a={a}, b={b}, c={c}, z={z})"
    )


def _connection(a: float, b: float, c: float, z: float) -> float:
    """Continuation to z < -1 through 1/z; needs a - b off the integers."""
    w = 1.0 / z
    mz = -z
    # a - b is formed once so that the two (nearly singular) halves see the
    # same rounding of it and their large parts cancel
    d = a - b
    t1 = gamma(c) * gamma(d) * rgamma(a) * rgamma(c - b)
    t2 = gamma(c) * gamma(-d) * rgamma(b) * rgamma(c - a)
    out = 0.0
    if t1 != 0.0:
        out += t1 * mz ** (-b) * hyp2f1(b, 1.0 + b - c, 1.0 - d, w)
    if t2 != 0.0:
        out += t2 * mz ** (-a) * hyp2f1(a, 1.0 + a - c, 1.0 + d, w)
    return out


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Real Gauss hypergeometric function 2F1(a, b; c; z) for z <= 1.

    For z < -1 the connection formula is used. When a - b is within 1e-9 of
    an integer the formula is singular; the value is then taken as the mean
    of the results at b +- 1e-7 and a ``RuntimeWarning`` is issued.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpos_int(c):
        raise ParameterError(f"hyp2f1 undefined for c = {c}")
    if z > 1.0:
        raise ParameterError("hyp2f1 is complex for real z > 1")
    if z == 0.0:
        return 1.0
    if z == 1.0:
        if c - a - b <= 0:
            raise ParameterError("hyp2f1 diverges at z = 1 unless c - a - b > 0")
        return gamma(c) * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b)
    if abs(z) <= 0.5 or z > 0.5:
        return _series(a, b, c, z)
    if z >= -1.0:
        # Pfaff: maps [-1, -1/2) into [1/3, 1/2]
        return (1.0 - z) ** (-a) * _series(a, c - b, c, z / (z - 1.0))
    d = a - b
    if abs(d - round(d)) < _INT_TOL:
        warnings.warn(
            f"a - b = {d} is (nearly) an integer; using symmetric perturbation of b",
            RuntimeWarning,
            stacklevel=2,
        )
        bb = a - round(d)
        return 0.5 * (
            _connection(a, bb + _PERTURB, c, z) + _connection(a, bb - _PERTURB, c, z)
        )
    return _connection(a, b, c, z)


def hyp2f1_continued(a: float, b: float, c: float, z: float) -> float:
    """Connection formula evaluated directly (z < -1). Mostly for testing."""
    if z >= -1.0:
        raise ParameterError("connection formula requires z < -1")
    d = a - b
    if abs(d - round(d)) < _INT_TOL:
        raise ParameterError("connection formula requires a - b off the integers")
    return _connection(float(a), float(b), float(c), float(z))


def power_antiderivative(beta_, q, b, c0, beta0, eps):
    """F(beta) whose derivative is (eps + c0 |beta - beta0|^q)^(-b)."""
    x = np.asarray(beta_, dtype=float) - beta0
    z = -c0 * np.abs(x) ** q / eps
    f = np.vectorize(lambda zz: hyp2f1(1.0 / q, b, 1.0 + 1.0 / q, zz))(z)
    return x * f / eps**b


def power_integrand(beta_, q, b, c0, beta0, eps):
    x = np.asarray(beta_, dtype=float) - beta0
    return (eps + c0 * np.abs(x) ** q) ** (-b)


def lemma_diff_check(q, b, c0, beta0, interval, eps, n=100, h=1e-4):
    """Largest defect between d/dbeta of the antiderivative and the integrand.

    Requires eps >= c0 and |beta - beta0| <= 1 on ``interval`` so that the
    hypergeometric argument stays in [-1, 0]. The derivative is a
    Richardson-extrapolated central difference; the exact point beta0 is
    skipped.
    """
    lo, hi = interval
    if eps < c0:
        raise ParameterError("need eps >= c0")
    if max(abs(lo - beta0), abs(hi - beta0)) > 1.0:
        raise ParameterError("need |beta - beta0| <= 1 on the interval")
    grid = np.linspace(lo, hi, n + 2)[1:-1]
    grid = grid[np.abs(grid - beta0) > 4 * h]

    def F(x):
        return power_antiderivative(x, q, b, c0, beta0, eps)

    d1 = (F(grid + h) - F(grid - h)) / (2 * h)
    d2 = (F(grid + h / 2) - F(grid - h / 2)) / h
    deriv = (4 * d2 - d1) / 3
    rhs = power_integrand(grid, q, b, c0, beta0, eps)
    return float(np.max(np.abs(deriv - rhs)))
