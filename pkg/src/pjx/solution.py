"""Exact solution in the Lagrangian variable eta.

For initial data u0' the solution is written in terms of J(alpha, eta) =
1 - lambda eta u0'(alpha) and the moments Kbar_b = int_0^1 J^-b dalpha with
b = i + 1/lambda:

* u_x(gamma(alpha, t), t) = (lambda eta Kbar0^(2 lambda))^-1 (1/J - Kbar1/Kbar0)
* u_xx = u0'' J^(1/lambda - 2) Kbar0^(1 - 2 lambda)
* gamma_alpha = J^(-1/lambda) / Kbar0, gamma(0) = 0
* t(eta) = int_0^eta Kbar0(mu)^(2 lambda) dmu

For eta <= 1e-8 the algebraically equivalent form
u_x = Kbar0^(-2 lambda) (u0'/J - Kbar0^-1 int u0' J^(-1 - 1/lambda)) is used,
since the first form loses all digits as eta -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConsistencyError, DomainError, OutOfRangeError
from .profiles import InitialProfile
from .quadrature import DEFAULT_SPEC, Kernel, QuadratureSpec, check_jpow, integrate

SMALL_ETA = 1e-8


@dataclass(frozen=True, eq=False)
class SolutionFrame:
    """State of the solution at one value of eta."""

    profile: InitialProfile
    lam: float
    eta: float
    jbar: float
    spec: QuadratureSpec = DEFAULT_SPEC
    kernel: Kernel = field(default=None, repr=False)

    @classmethod
    def at(cls, profile, lam, eta=None, *, jbar=None, spec=DEFAULT_SPEC) -> "SolutionFrame":
        """Frame at ``eta``, or at the distance ``jbar`` = J(alpha_bar) from blow-up.

        Passing ``jbar`` keeps J at the extremum exact even when it is far
        below the resolution of eta near eta*.
        """
        if lam == 0:
            raise DomainError("lambda must be nonzero")
        k = Kernel.make(profile, lam, eta, jbar, spec)
        return cls(profile, float(lam), k.eta, k.jbar, spec, k)

    @property
    def eta_star(self) -> float:
        return self.profile.eta_star(self.lam)

    def J(self, alpha) -> np.ndarray:
        return self.kernel.J(np.atleast_1d(np.asarray(alpha, dtype=float)))

    def kbar(self, i: int | float) -> float:
        return _kbar_cached(self, float(i))

    @cached_property
    def kbar0(self) -> float:
        return self.kbar(0)

    @cached_property
    def kbar1(self) -> float:
        return self.kbar(1)

    @cached_property
    def weighted_moment(self) -> float:
        """int_0^1 u0' J^(-1 - 1/lambda) dalpha."""
        b = 1.0 + 1.0 / self.lam
        check_jpow(self.kernel, b)
        return self.kernel.integrate(lambda x, J, w: w * J ** (-b)).value

    @cached_property
    def t(self) -> float:
        return time_of_eta(self.lam, self.profile, jbar=self.jbar, spec=self.spec)


def _kbar_cached(frame: SolutionFrame, i: float) -> float:
    cache = frame.__dict__.setdefault("_kbar", {})
    if i not in cache:
        b = i + 1.0 / frame.lam
        if frame.eta == 0:
            cache[i] = 1.0
        else:
            check_jpow(frame.kernel, b)
            cache[i] = frame.kernel.integrate(lambda x, J, w: J ** (-b)).value
    return cache[i]


def kbar(frame: SolutionFrame, i: int | float) -> float:
    """Kbar_i = int_0^1 J^-(i + 1/lambda) dalpha."""
    return frame.kbar(i)


def jac_J(frame: SolutionFrame, alpha) -> np.ndarray:
    return frame.J(alpha)


def ux(frame: SolutionFrame, alpha) -> np.ndarray:
    """u_x along the characteristic started at alpha."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    J = frame.J(alpha)
    lam, eta = frame.lam, frame.eta
    K0 = frame.kbar0
    if eta <= SMALL_ETA:
        w = frame.profile.u0p(alpha)
        return K0 ** (-2 * lam) * (w / J - frame.weighted_moment / K0)
    r = frame.kbar1 / K0
    return (1.0 / J - r) / (lam * eta * K0 ** (2 * lam))


def ux_final_form(frame: SolutionFrame, alpha) -> np.ndarray:
    """The small-eta form of u_x evaluated at any eta (used for cross-checks)."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    J = frame.J(alpha)
    K0 = frame.kbar0
    w = frame.profile.u0p(alpha)
    return K0 ** (-2 * frame.lam) * (w / J - frame.weighted_moment / K0)


def uxx(frame: SolutionFrame, alpha) -> np.ndarray:
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if frame.profile.u0pp is None:
        raise DomainError("profile has no second derivative")
    J = frame.J(alpha)
    return frame.profile.u0pp(alpha) * J ** (1.0 / frame.lam - 2.0) * frame.kbar0 ** (1.0 - 2.0 * frame.lam)


def gamma_alpha(frame: SolutionFrame, alpha) -> np.ndarray:
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    return frame.J(alpha) ** (-1.0 / frame.lam) / frame.kbar0


def characteristic(frame: SolutionFrame, alpha) -> np.ndarray:
    """Eulerian position gamma(alpha) with gamma(0) = 0."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if np.any((alpha < 0) | (alpha > 1)):
        raise DomainError("alpha must lie in [0, 1]")
    order = np.argsort(alpha)
    out = np.empty_like(alpha)
    inv = -1.0 / frame.lam
    K0 = frame.kbar0
    check_jpow(frame.kernel, 1.0 / frame.lam)
    acc, prev = 0.0, 0.0
    for idx in order:
        a = alpha[idx]
        if a > prev:
            acc += frame.kernel.integrate(lambda x, J, w: J**inv, prev, a).value
            prev = a
        out[idx] = acc / K0
    return out


def _kbar0_at(profile, lam, s, spec):
    k = Kernel.make(profile, lam, jbar=s, spec=spec)
    if k.eta == 0:
        return 1.0
    check_jpow(k, 1.0 / lam)
    return k.integrate(lambda x, J, w: J ** (-1.0 / lam)).value


def _time_integrand(profile, lam, spec):
    def f(s):
        s = np.asarray(s, dtype=float)
        return np.array([_kbar0_at(profile, lam, float(v), spec) ** (2 * lam) for v in s.ravel()]).reshape(s.shape)

    return f


def _graded(lo: float, hi: float) -> list[float]:
    pts = []
    k = 1
    while 2.0**-k > lo and k < 200:
        if 2.0**-k < hi:
            pts.append(2.0**-k)
        k += 1
    return pts


def time_between(lam, profile, j_lo, j_hi, spec=DEFAULT_SPEC) -> float:
    """t(J = j_lo) - t(J = j_hi) for 0 < j_lo <= j_hi <= 1."""
    if j_lo == j_hi:
        return 0.0
    es = profile.eta_star(lam)
    f = _time_integrand(profile, lam, spec)
    outer = QuadratureSpec(spec.abs_tol, max(spec.rel_tol, 1e-12), spec.max_depth, (), spec.singularity_guard)
    r = integrate(f, j_lo, j_hi, outer, _graded(j_lo, j_hi))
    return es * r.value


def time_of_eta(lam, profile, eta=None, *, jbar=None, spec=DEFAULT_SPEC) -> float:
    """Physical time t(eta) = int_0^eta Kbar0(mu)^(2 lambda) dmu."""
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    es = profile.eta_star(lam)
    if jbar is None:
        if eta is None or eta < 0:
            raise DomainError("need eta >= 0")
        if eta >= es:
            raise OutOfRangeError(f"eta = {eta} is not below eta* = {es}")
        jbar = 1.0 - eta / es
    if not 0 < jbar <= 1:
        raise OutOfRangeError("J(alpha_bar) must lie in (0, 1]")
    return time_between(lam, profile, jbar, 1.0, spec)


@dataclass(frozen=True, eq=False)
class EtaTimeMap:
    """Tabulated monotone map between eta and t, refined by Newton on demand."""

    profile: InitialProfile
    lam: float
    jbar: np.ndarray
    eta: np.ndarray
    t: np.ndarray
    t_star: float
    spec: QuadratureSpec = DEFAULT_SPEC

    @classmethod
    def build(cls, lam, profile, knots=200, t_star=None, j_min=1e-10, spec=DEFAULT_SPEC):
        """Knots geometric in J(alpha_bar) from 1 down to ``j_min``."""
        if knots < 2:
            raise DomainError("need at least two knots")
        js = np.geomspace(1.0, j_min, knots)
        es = profile.eta_star(lam)
        ts = np.zeros(knots)
        for k in range(1, knots):
            ts[k] = ts[k - 1] + time_between(lam, profile, js[k], js[k - 1], spec)
        if t_star is None:
            from .asymptotics import blowup_time

            t_star = blowup_time(lam, profile, spec=spec).t_star
        return cls(profile, float(lam), js, (1.0 - js) * es, ts, float(t_star), spec)

    @cached_property
    def _interp(self):
        return PchipInterpolator(self.t, self.jbar)

    def time_of(self, eta: float) -> float:
        es = self.profile.eta_star(self.lam)
        j = 1.0 - eta / es
        return self._time_of_j(j)

    def _time_of_j(self, j: float) -> float:
        k = int(np.searchsorted(-self.jbar, -j, side="right")) - 1
        k = max(0, min(k, len(self.jbar) - 1))
        return self.t[k] + time_between(self.lam, self.profile, j, self.jbar[k], self.spec)

    def jbar_of_time(self, t: float) -> float:
        if t < 0:
            raise DomainError("t must be non-negative")
        if t >= self.t_star:
            raise OutOfRangeError(f"t = {t} is not below the blow-up time {self.t_star}")
        if t == 0:
            return 1.0
        es = self.profile.eta_star(self.lam)
        if t <= self.t[-1]:
            j = float(self._interp(t))
        else:
            j = float(self.jbar[-1])
        tol = 1e-10 * max(1.0, t)
        for _ in range(30):
            tj = self._time_of_j(j)
            resid = tj - t
            if abs(resid) <= tol:
                return j
            slope = es * _kbar0_at(self.profile, self.lam, j, self.spec) ** (2 * self.lam)
            jn = j + resid / slope
            if jn <= 0:
                jn = j / 10
            j = min(jn, 1.0)
        raise OutOfRangeError(f"Newton refinement failed for t = {t}")


def eta_of_time(tmap: EtaTimeMap, t: float) -> float:
    """Inverse of t(eta); |t(eta) - t| <= 1e-10 max(1, t)."""
    j = tmap.jbar_of_time(t)
    return (1.0 - j) * tmap.profile.eta_star(tmap.lam)


def extrema(frame: SolutionFrame, n_check: int = 1000) -> tuple[float, float]:
    """(M(t), m(t)): u_x at the declared maxima and minima of u0'.

    A uniform grid of ``n_check`` points must not exceed them.
    """
    prof = frame.profile
    M = float(np.max(ux(frame, np.array(prof.maxima))))
    m = float(np.min(ux(frame, np.array(prof.minima))))
    grid = ux(frame, np.linspace(0.0, 1.0, n_check))
    scale = max(abs(M), abs(m))
    slack = 1e-6 * scale + 1e-12
    if grid.max() > M + slack or grid.min() < m - slack:
        raise ConsistencyError(
            f"grid extrema ({grid.max()}, {grid.min()}) exceed declared ({M}, {m})"
        )
    return M, m


def lagrangian_to_eulerian(frame: SolutionFrame, n: int = 2001):
    """Sample (alpha, x, u_x, u) on a uniform alpha grid.

    u is obtained from u(gamma(alpha)) = int_0^alpha u_x gamma_alpha dalpha.
    """
    alpha = np.linspace(0.0, 1.0, n)
    x = characteristic(frame, alpha)
    v = ux(frame, alpha)
    lam = frame.lam
    K0 = frame.kbar0
    if frame.eta <= SMALL_ETA:
        W = frame.weighted_moment
        coef = K0 ** (-2 * lam)

        def g(a, J, w):
            return coef * (w / J - W / K0) * J ** (-1 / lam) / K0
    else:
        r = frame.kbar1 / K0
        pre = 1.0 / (lam * frame.eta * K0 ** (2 * lam))

        def g(a, J, w):
            return pre * (1.0 / J - r) * J ** (-1 / lam) / K0

    u = np.empty(n)
    acc = 0.0
    u[0] = 0.0
    for i in range(1, n):
        acc += frame.kernel.integrate(g, alpha[i - 1], alpha[i]).value
        u[i] = acc
    return alpha, x, v, u


def eulerian_alpha(frame: SolutionFrame, x, n_table: int = 4001) -> np.ndarray:
    """Invert x = gamma(alpha) (monotone) by interpolation plus Newton."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    atab = np.linspace(0.0, 1.0, n_table)
    xtab = characteristic(frame, atab)
    a = np.interp(x, xtab, atab)
    for _ in range(3):
        g = characteristic(frame, a)
        a = np.clip(a - (g - x) / gamma_alpha(frame, a), 0.0, 1.0)
    return a
