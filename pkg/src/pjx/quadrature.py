"""Adaptive Gauss-Kronrod quadrature and the profile-aware kernel integrals.

``integrate`` is a vectorised adaptive GK15 rule with global error control.
Panels whose error exceeds their width share of the tolerance are bisected.
If refinement stalls at an endpoint of the interval (an integrable power
singularity), the endpoint neighbourhood is recomputed as a series of
geometrically shrinking panels whose partial sums are accelerated with the
Wynn epsilon algorithm.

``integrate_alpha`` integrates g(alpha, J, u0') over [0, 1] where
J = 1 - lambda eta u0'(alpha). [0, 1] is split at every declared extremum.
On a flank adjacent to an active extremum the substitution
alpha = e + L u^m clusters nodes at the extremum. The flank also gets
geometric breakpoints at the width scale (J_bar / |lambda eta C|)^(1/q) of
the near-singular peak. J is formed there as J_bar + |lambda eta| gap(e, d)
to avoid cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DepthExhaustedError,
    DivergenceError,
    DomainError,
    NonFiniteIntegrandError,
    SingularityGuardError,
)
from .profiles import InitialProfile

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# 15 nodes on [-1, 1]: -x0..-x6, 0, x6..x0
NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
WK = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
WG = np.zeros(15)
WG[[1, 3, 5]] = _WG[:3]
WG[[13, 11, 9]] = _WG[:3]
WG[7] = _WG[3]

_EPS = np.finfo(float).eps
MAX_PANELS = 200_000


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-11
    rel_tol: float = 1e-10
    max_depth: int = 60
    split_points: tuple[float, ...] = ()
    singularity_guard: float = 1e-13

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0 or (self.abs_tol == 0 and self.rel_tol == 0):
            raise DomainError("tolerances must be non-negative and not both zero")
        if self.max_depth < 1:
            raise DomainError("max_depth must be positive")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    neval: int = 0
    converged: bool = True

    def __float__(self):
        return self.value


def gk15(f: Callable, lo: np.ndarray, hi: np.ndarray, allow_bad: bool = False):
    """Kronrod estimates and QUADPACK-style error estimates on many panels.

    With ``allow_bad`` panels containing non-finite values get an infinite
    error and a third return value flags them; otherwise they raise.
    """
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    x = c[:, None] + h[:, None] * NODES[None, :]
    with np.errstate(all="ignore"):
        fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    finite = np.isfinite(fx)
    bad = ~finite.all(axis=1)
    if bad.any():
        if not allow_bad:
            raise NonFiniteIntegrandError(f"non-finite integrand at x = {x[~finite][:3]}")
        fx = np.where(finite, fx, 0.0)
    ah = np.abs(h)
    rk = fx @ WK
    rg = fx @ WG
    resabs = np.abs(fx) @ WK
    mean = 0.5 * rk
    resasc = np.abs(fx - mean[:, None]) @ WK
    err = np.abs(rk - rg)
    ok = (resasc > 0) & (err > 0)
    err = np.where(ok, resasc * np.minimum(1.0, (200.0 * err / np.where(ok, resasc, 1.0)) ** 1.5), err)
    err = np.maximum(err, 50.0 * _EPS * resabs) * ah
    if allow_bad:
        err[bad] = np.inf
        return rk * h, err, bad
    return rk * h, err


def _unresolved(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return (hi - lo) < 2e3 * _EPS * np.maximum(np.abs(lo), np.abs(hi))


def _adaptive(f, breaks, spec):
    lo = np.asarray(breaks[:-1], dtype=float)
    hi = np.asarray(breaks[1:], dtype=float)
    depth = np.zeros(lo.size, dtype=int)
    A, B = breaks[0], breaks[-1]

    def evaluate(plo, phi):
        v, e, bad = gk15(f, plo, phi, allow_bad=True)
        # non-finite values are tolerated only next to the outer endpoints
        if np.any(bad & (plo > A) & (phi < B)):
            raise NonFiniteIntegrandError(f"non-finite integrand inside [{A}, {B}]")
        # nodes of a panel this narrow collapse onto a few floating-point
        # values, so neither the estimate nor its error can be trusted
        e = np.where(_unresolved(plo, phi), np.inf, e)
        return v, e

    val, err = evaluate(lo, hi)
    neval = 15 * lo.size
    width = B - A
    while True:
        total = val.sum()
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        errsum = err.sum()
        if errsum <= tol:
            return QuadResult(float(total), float(errsum), neval, True), None
        # split panels over their width share that are also among the worst
        emax = err.max()
        mark = (err > tol * (hi - lo) / width) & (err >= 0.05 * emax if np.isfinite(emax) else np.isinf(err))
        mark[np.argmax(err)] = True
        can = mark & (depth < spec.max_depth)
        # a panel too narrow to bisect in floating point is also stuck
        mid = 0.5 * (lo + hi)
        can &= (mid > lo) & (mid < hi) & ~_unresolved(lo, hi)
        if not can.any() or lo.size > MAX_PANELS:
            stuck = mark & ~can
            return QuadResult(float(total), float(errsum), neval, False), (lo[stuck], hi[stuck])
        keep = ~can
        slo, shi, sm = lo[can], hi[can], mid[can]
        nlo = np.concatenate([slo, sm])
        nhi = np.concatenate([sm, shi])
        nval, nerr = evaluate(nlo, nhi)
        neval += 15 * nlo.size
        nd = np.concatenate([depth[can], depth[can]]) + 1
        lo = np.concatenate([lo[keep], nlo])
        hi = np.concatenate([hi[keep], nhi])
        val = np.concatenate([val[keep], nval])
        err = np.concatenate([err[keep], nerr])
        depth = np.concatenate([depth[keep], nd])


def wynn_epsilon(seq) -> tuple[float, float]:
    """Wynn epsilon extrapolation of a sequence of partial sums.

    Returns the last even-column estimate and a crude error from the spread
    of the last three estimates.
    """
    s = [float(x) for x in seq]
    n = len(s)
    if n < 3:
        return s[-1], abs(s[-1] - s[-2]) if n > 1 else math.inf
    prev = [0.0] * (n + 1)
    cur = s[:]
    estimates = [s[-1]]
    k = 0
    while len(cur) > 1:
        nxt = []
        for i in range(len(cur) - 1):
            d = cur[i + 1] - cur[i]
            if d == 0.0:
                nxt.append(math.inf)
            else:
                nxt.append(prev[i + 1] + 1.0 / d)
        prev, cur = cur, nxt
        k += 1
        if k % 2 == 0 and cur and math.isfinite(cur[-1]):
            estimates.append(cur[-1])
    best = estimates[-1]
    if len(estimates) >= 3:
        errv = abs(estimates[-1] - estimates[-2]) + abs(estimates[-2] - estimates[-3])
    elif len(estimates) == 2:
        errv = abs(estimates[-1] - estimates[-2])
    else:
        errv = abs(s[-1] - s[-2])
    return best, errv


def _endpoint_series(f, end, inner, spec, tol):
    """Integral from ``end`` to ``inner`` for an integrand singular at ``end``."""
    direction = 1.0 if inner > end else -1.0
    H = abs(inner - end)
    floor = 64 * _EPS * max(abs(end), 1e-300)
    partial = []
    total = 0.0
    errsum = 0.0
    neval = 0
    h = H
    best, est_err = math.nan, math.inf
    sub = QuadratureSpec(spec.abs_tol * 1e-3, spec.rel_tol * 1e-2, spec.max_depth)
    while h / 2 > floor and len(partial) < 400:
        a, b = end + direction * h / 2, end + direction * h
        r, _ = _adaptive(f, [min(a, b), max(a, b)], sub)
        neval += r.neval
        total += r.value
        errsum += r.error
        partial.append(total)
        h /= 2
        if len(partial) >= 6:
            best, est_err = wynn_epsilon(partial[-min(len(partial), 30):])
            if est_err + errsum <= tol:
                break
    if not partial:
        raise DepthExhaustedError("endpoint panel too small", total, math.inf)
    if not math.isfinite(best):
        best, est_err = total, math.inf
    return QuadResult(best, est_err + errsum, neval, est_err + errsum <= tol * 10)


def _piecewise(f, pts, spec) -> QuadResult:
    """Singular at a declared point: treat every breakpoint as an end."""
    parts = [integrate(f, lo, hi, spec) for lo, hi in zip(pts[:-1], pts[1:])]
    return QuadResult(sum(r.value for r in parts), sum(r.error for r in parts), sum(r.neval for r in parts), True)


def integrate(f: Callable, a: float, b: float, spec: QuadratureSpec = DEFAULT_SPEC, points=()) -> QuadResult:
    """Integral of the vectorised callable ``f`` over [a, b].

    Raises :class:`NonFiniteIntegrandError` when ``f`` returns inf/nan at a
    node and :class:`DepthExhaustedError` (carrying the best estimate) when
    refinement stalls in the interior.
    """
    a, b = float(a), float(b)
    if a == b:
        return QuadResult(0.0, 0.0, 0, True)
    if b < a:
        r = integrate(f, b, a, spec, points)
        return QuadResult(-r.value, r.error, r.neval, r.converged)
    if _unresolved(np.array([a]), np.array([b]))[0]:
        # too narrow to refine; a single panel is as good as it gets
        v, e = gk15(f, np.array([a]), np.array([b]))
        return QuadResult(float(v[0]), float(e[0]), 15, True)
    pts = [a]
    for p in sorted({float(p) for p in (*spec.split_points, *points) if a < p < b}):
        if not _unresolved(np.array([pts[-1]]), np.array([p]))[0]:
            pts.append(p)
    if len(pts) > 1 and _unresolved(np.array([pts[-1]]), np.array([b]))[0]:
        pts.pop()
    pts.append(b)
    try:
        res, stuck = _adaptive(f, pts, spec)
    except NonFiniteIntegrandError:
        if len(pts) == 2:
            raise
        return _piecewise(f, pts, spec)
    if res.converged:
        return res
    slo, shi = stuck
    # unresolvably narrow panels pile up within rounding distance of an end
    band = 1e5 * _EPS * max(abs(a), abs(b), b - a)
    near_a, near_b = slo <= a + band, shi >= b - band
    at_a = bool(np.any(near_a))
    at_b = bool(np.any(near_b))
    interior = slo.size and np.any(~near_a & ~near_b)
    if (interior or not (at_a or at_b)) and len(pts) > 2:
        return _piecewise(f, pts, spec)
    if interior or not (at_a or at_b):
        raise DepthExhaustedError(
            f"adaptive quadrature stalled on [{a}, {b}]", res.value, res.error, zip(slo, shi)
        )
    H = (b - a) / 64
    if len(pts) > 2:
        H = min(H, (pts[1] - pts[0]) / 2, (pts[-1] - pts[-2]) / 2)
    tol = max(spec.abs_tol, spec.rel_tol * abs(res.value))
    lo_mid = a + H if at_a else a
    hi_mid = b - H if at_b else b
    inner = [lo_mid, *[p for p in pts if lo_mid < p < hi_mid], hi_mid]
    mid, stuck2 = _adaptive(f, inner, spec)
    if not mid.converged:
        raise DepthExhaustedError("adaptive quadrature stalled", res.value, res.error)
    value, error, neval = mid.value, mid.error, mid.neval + res.neval
    conv = True
    for flag, end, inn in ((at_a, a, a + H), (at_b, b, b - H)):
        if flag:
            r = _endpoint_series(f, end, inn, spec, tol / 2)
            value += r.value
            error += r.error
            neval += r.neval
            conv &= r.converged
    if not conv:
        raise DepthExhaustedError("endpoint singularity did not converge", value, error)
    return QuadResult(value, error, neval, True)


# ---------------------------------------------------------------------------
# profile kernels


@dataclass(frozen=True, eq=False)
class Kernel:
    """Geometry of J(alpha) = 1 - lambda eta u0'(alpha) for one (lambda, eta)."""

    profile: InitialProfile
    lam: float
    eta: float
    jbar: float
    spec: QuadratureSpec = DEFAULT_SPEC
    segments: list = field(default_factory=list, repr=False)

    @classmethod
    def make(cls, profile, lam, eta=None, jbar=None, spec=DEFAULT_SPEC):
        if lam == 0:
            raise DomainError("lambda must be nonzero")
        es = profile.eta_star(lam)
        if jbar is None:
            if eta is None:
                raise DomainError("need eta or jbar")
            eta = float(eta)
            if eta < 0:
                raise DomainError("eta must be non-negative")
            jbar = 1.0 - eta / es
        else:
            jbar = float(jbar)
            eta = (1.0 - jbar) * es
        if jbar < 0:
            raise DomainError(f"eta = {eta} lies beyond eta* = {es}")
        k = cls(profile, float(lam), float(eta), jbar, spec)
        object.__setattr__(k, "segments", k._segments())
        return k

    @property
    def eta_star(self) -> float:
        return self.profile.eta_star(self.lam)

    @property
    def lam_eta(self) -> float:
        return self.lam * self.eta

    def _segments(self):
        act = {e.alpha: e for e in self.profile.active(self.lam)}
        pts = sorted({0.0, 1.0, *self.profile.all_points(), *[p for p in self.spec.split_points if 0 < p < 1]})
        segs = []
        for lo, hi in zip(pts[:-1], pts[1:]):
            el, eh = act.get(lo), act.get(hi)
            if el is not None and eh is not None:
                mid = 0.5 * (lo + hi)
                segs.append((lo, mid, el))
                segs.append((mid, hi, eh))
            elif el is not None:
                segs.append((lo, hi, el))
            elif eh is not None:
                segs.append((lo, hi, eh))
            else:
                segs.append((lo, hi, None))
        return segs

    def J(self, alpha) -> np.ndarray:
        """J at arbitrary alpha, using the accurate local form near active extrema."""
        alpha = np.asarray(alpha, dtype=float)
        out = 1.0 - self.lam_eta * self.profile.u0p(alpha)
        ale = abs(self.lam_eta)
        for lo, hi, e in self.segments:
            if e is None:
                continue
            sel = (alpha >= lo) & (alpha <= hi)
            if np.any(sel):
                d = alpha[sel] - e.alpha
                out[sel] = self.jbar + ale * self.profile.gap(e.alpha, d)
        return out

    def width(self, e) -> float:
        """Width of the near-singular peak around an active extremum."""
        ale = abs(self.lam_eta) * abs(e.coeff)
        if ale == 0 or self.jbar == 0:
            return 0.0
        # capped at 1: only widths inside [0, 1] matter
        return math.exp(min(0.0, (math.log(self.jbar) - math.log(ale)) / e.q))

    def _flank_pieces(self, lo, hi, e, a, b):
        """Substitution callable and u-breakpoints for the flank [lo, hi] clipped to [a, b]."""
        L = (hi - lo) if e.alpha == lo else (lo - hi)  # signed, from the extremum outward
        m = 2.0 / e.q if e.q < 2 else 1.0
        # u range corresponding to [a, b] within the flank
        def u_of(alpha):
            return (abs(alpha - e.alpha) / abs(L)) ** (1.0 / m)

        ua, ub = sorted((u_of(min(max(a, lo), hi)), u_of(min(max(b, lo), hi))))
        w = self.width(e)
        pts = []
        if w > 0:
            uw = (w / abs(L)) ** (1.0 / m)
            k = uw / 4
            while k < 1:
                pts.append(k)
                k *= 2
        elif self.jbar == 0:
            pts = [2.0**-k for k in range(1, 40)]
        pts = [p for p in pts if ua < p < ub]
        return L, m, ua, ub, pts

    def integrate(self, g: Callable, a: float = 0.0, b: float = 1.0) -> QuadResult:
        """Integral of g(alpha, J, u0') over [a, b] (0 <= a <= b <= 1)."""
        if not 0.0 <= a <= b <= 1.0:
            raise DomainError("integration range must lie in [0, 1]")
        total, err, nev = 0.0, 0.0, 0
        prof = self.profile
        ale = abs(self.lam_eta)
        sgn = 1.0 if self.lam > 0 else -1.0
        ext = prof.active_value(self.lam) if self.lam != 0 else 0.0
        for lo, hi, e in self.segments:
            sa, sb = max(a, lo), min(b, hi)
            if sb <= sa:
                continue
            if e is None:
                def fa(x):
                    w0 = prof.u0p(x)
                    return g(x, 1.0 - self.lam_eta * w0, w0)

                r = integrate(fa, sa, sb, self.spec)
            else:
                L, m, ua, ub, pts = self._flank_pieces(lo, hi, e, sa, sb)
                absL = abs(L)
                sL = math.copysign(1.0, L)

                def fu(u, e=e, m=m, absL=absL, sL=sL):
                    d = sL * absL * u**m
                    gp = prof.gap(e.alpha, d)
                    Jv = self.jbar + ale * gp
                    w0 = ext - sgn * gp
                    jac = absL * m * u ** (m - 1.0) if m != 1.0 else np.full_like(u, absL)
                    return g(e.alpha + d, Jv, w0) * jac

                r = integrate(fu, ua, ub, self.spec, pts)
            total += r.value
            err += r.error
            nev += r.neval
        return QuadResult(total, err, nev, True)


def check_jpow(kernel: Kernel, b_exp: float) -> None:
    """Raise unless the integral of J^-b is finite and within the guard."""
    if kernel.jbar == 0:
        qmax = max(e.q for e in kernel.profile.active(kernel.lam))
        if b_exp * qmax >= 1:
            raise DivergenceError(f"integral of J^-{b_exp} diverges at eta* (b q = {b_exp * qmax} >= 1)")
    elif kernel.jbar < kernel.spec.singularity_guard:
        raise SingularityGuardError(
            f"J(alpha_bar) = {kernel.jbar:.3g} is below the guard {kernel.spec.singularity_guard:.3g}"
        )


def integrate_jpow(
    profile: InitialProfile,
    lam: float,
    eta: float | None = None,
    b_exp: float = 1.0,
    *,
    jbar: float | None = None,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> QuadResult:
    """Integral over [0, 1] of J(alpha)^(-b_exp)."""
    k = Kernel.make(profile, lam, eta, jbar, spec)
    check_jpow(k, b_exp)
    if k.eta == 0:
        return QuadResult(1.0, 0.0, 0, True)
    return k.integrate(lambda x, J, w: J ** (-b_exp))
