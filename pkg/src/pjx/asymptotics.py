"""Behaviour of the moments and of t(eta) as eta approaches eta*.

Near an active extremum J ~ Jbar + |lambda eta C| |alpha - alpha_bar|^q, so
int J^-b picks up, per side of the extremum lying in [0, 1],

    Gamma(1 + 1/q) Gamma(b - 1/q) / Gamma(b) (|ext| / |C|)^(1/q) Jbar^(1/q - b)

when b > 1/q. For b = 1/q the integral grows like (|ext|/|C|)^(1/q)/q
log(1/Jbar) per side. For b < 1/q it stays bounded and the limit is
evaluated by quadrature at eta = eta*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import special
from .errors import (
    DomainError,
    ExcludedParameterError,
    ParameterError,
    RangeError,
    UnsupportedRegimeError,
)
from .profiles import Extremum, InitialProfile
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate, integrate_jpow
from .solution import SolutionFrame, characteristic, time_between

_ITOL = 1e-12
CONTINUITY_SHIFT = 1e-6


def _is_int(x: float) -> bool:
    return abs(x - round(x)) < _ITOL * max(1.0, abs(x))


@dataclass(frozen=True)
class AsymptoticEstimate:
    """Kbar ~ C Jbar^exponent + log_coeff log(1/Jbar) as Jbar -> 0."""

    C: float
    exponent: float
    regime: str  # power | log | bounded
    case: str  # case1 | case2 | case3 | log | b<=0
    log_coeff: float = 0.0
    caveats: tuple[str, ...] = ()

    def __call__(self, jbar):
        jbar = np.asarray(jbar, dtype=float)
        out = self.C * jbar**self.exponent
        if self.log_coeff:
            out = out + self.log_coeff * np.log(1.0 / jbar)
        return out


def flank_constant(e: Extremum, ext: float, b: float) -> float:
    """Leading coefficient of int J^-b contributed by one extremum (all its sides)."""
    q = e.q
    g = special.gamma(1.0 + 1.0 / q) * special.gamma(b - 1.0 / q) * special.rgamma(b)
    return e.flanks * g * (abs(ext) / abs(e.coeff)) ** (1.0 / q)


def log_constant(e: Extremum, ext: float) -> float:
    return e.flanks * (abs(ext) / abs(e.coeff)) ** (1.0 / e.q) / e.q


def _locations(profile: InitialProfile, lam: float, q: float):
    locs = [e for e in profile.active(lam) if abs(e.q - q) < 1e-12]
    if not locs:
        raise ParameterError(f"no active extremum of {profile.name} has exponent q = {q}")
    return locs


def _bounded_limit(lam, profile, b, spec):
    return integrate_jpow(profile, lam, b_exp=b, jbar=0.0, spec=spec).value


def lemma_general(
    lam: float, q: float, b: float, profile: InitialProfile, spec: QuadratureSpec = DEFAULT_SPEC
) -> AsymptoticEstimate:
    """Leading behaviour of int_0^1 J^-b as Jbar -> 0.

    Three regimes: b > 1/q grows like a power of Jbar, b = 1/q grows
    logarithmically (constant term fitted at Jbar = 1e-12), and b < 1/q is
    bounded with the limit evaluated at eta*. The bounded case is covered
    when q > 1/2 and 0 < b < 1/q, or when q < 1/2 and 0 < b < 2; otherwise
    :class:`UnsupportedRegimeError` is raised. b <= 0 is always bounded.
    """
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    if q <= 0:
        raise DomainError("q must be positive")
    ext = profile.active_value(lam)
    d = b - 1.0 / q
    caveats = []
    if _is_int(1.0 / q) or _is_int(b) or _is_int(d):
        caveats.append("1/q, b or b - 1/q is an integer; hypergeometric form degenerate")
    if b <= 0:
        return AsymptoticEstimate(_bounded_limit(lam, profile, b, spec), 0.0, "bounded", "b<=0", 0.0, tuple(caveats))
    if abs(d) < 1e-12:
        A = sum(log_constant(e, ext) for e in _locations(profile, lam, q))
        jr = 1e-12
        guard = QuadratureSpec(spec.abs_tol, spec.rel_tol, spec.max_depth, spec.split_points, min(spec.singularity_guard, jr))
        B = integrate_jpow(profile, lam, b_exp=b, jbar=jr, spec=guard).value - A * math.log(1 / jr)
        return AsymptoticEstimate(B, 0.0, "log", "log", A, tuple(caveats))
    if d > 0:
        C = sum(flank_constant(e, ext, b) for e in _locations(profile, lam, q))
        return AsymptoticEstimate(C, -d, "power", "case1" if lam > 0 else "case2", 0.0, tuple(caveats))
    covered = (q > 0.5 and 0 < b < 1 / q) or (q < 0.5 and 0 < b < 2)
    if not covered:
        raise UnsupportedRegimeError(f"(q, b) = ({q}, {b}) lies outside the bounded case")
    return AsymptoticEstimate(_bounded_limit(lam, profile, b, spec), 0.0, "bounded", "case3", 0.0, tuple(caveats))


def _resonant(lam: float, q: float) -> bool:
    """lambda = q / (1 - n q) for some positive integer n (only possible for q < 1)."""
    if q >= 1:
        return False
    for n in range(1, 10_000):
        den = 1 - n * q
        if abs(den) < 1e-14:
            continue
        if abs(lam - q / den) < 1e-9 * max(1.0, abs(lam)):
            return True
        if den < 0 and q / den > lam and lam < 0:
            # values of q/(1 - n q) for den < 0 increase toward 0 with n
            continue
        if den < 0 and lam > 0:
            break
    return False


def _kbar_table(lam: float, q: float, i: int) -> str:
    """Regime of Kbar_i claimed by the case tables: power, log, bounded or none."""
    if lam > 0:
        if i == 0:
            if q == 1 and lam == 1:
                return "log"
            if 0 < lam < q:
                return "power"
            if lam > q > 0.5 or (q < 0.5 and lam > 0.5):
                return "bounded"
            return "none"
        if i == 1:
            if (0.5 < q < 1 and lam > q / (1 - q)) or (q < 0.5 and lam > 1):
                return "bounded"
            if (q < 1 and lam < q / (1 - q)) or q >= 1:
                return "power"
            return "none"
    else:
        if i == 0:
            return "bounded"
        if i == 1:
            if -1 <= lam < 0 or (q <= 1 and lam < -1):
                return "bounded"
            if q > 1 and q / (1 - q) < lam < -1:
                return "bounded"
            if q > 1 and lam < q / (1 - q):
                return "power"
            return "none"
    b = i + 1.0 / lam
    d = b - 1.0 / q
    return "power" if d > 1e-12 else ("log" if abs(d) <= 1e-12 else "bounded")


def kbar_estimate(
    lam: float,
    q: float,
    profile: InitialProfile,
    i: int,
    *,
    continuity: bool = True,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> AsymptoticEstimate:
    """Leading behaviour of Kbar_i near eta* following the case tables.

    Parameters on a resonance line lambda = q/(1 - n q) are handled by
    averaging the estimates at lambda +- 1e-6 (``continuity``) or rejected.
    """
    table = _kbar_table(lam, q, i)
    if table == "none":
        raise UnsupportedRegimeError(f"Kbar_{i} at (lambda, q) = ({lam}, {q}) is not covered")
    b = i + 1.0 / lam
    if table == "log":
        return lemma_general(lam, q, b, profile, spec)
    if table == "bounded" and _resonant(lam, q):
        if not continuity:
            raise ExcludedParameterError(f"lambda = {lam} lies on a resonance line for q = {q}")
        lo = lemma_general(lam - CONTINUITY_SHIFT, q, i + 1 / (lam - CONTINUITY_SHIFT), profile, spec)
        hi = lemma_general(lam + CONTINUITY_SHIFT, q, i + 1 / (lam + CONTINUITY_SHIFT), profile, spec)
        return AsymptoticEstimate(
            0.5 * (lo.C + hi.C),
            0.5 * (lo.exponent + hi.exponent),
            lo.regime,
            lo.case,
            0.5 * (lo.log_coeff + hi.log_coeff),
            lo.caveats + ("resonant lambda: averaged over lambda +- 1e-6",),
        )
    est = lemma_general(lam, q, b, profile, spec)
    if table != est.regime:
        raise UnsupportedRegimeError(f"table regime {table} disagrees with exponent regime {est.regime}")
    return est


@dataclass(frozen=True)
class TailInfo:
    """How t* - t(eta) behaves: ~ (eta* - eta)^exponent log^log_power."""

    finite: bool
    exponent: float
    log_power: int
    regime: str
    bracket: tuple[float, float] | None = None
    caveats: tuple[str, ...] = ()


def blowup_tail(lam: float, q: float, profile: InitialProfile) -> TailInfo:
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    es = profile.eta_star(lam)
    if lam < 0:
        if lam == -1:
            br = (es, es)
        elif lam > -1:
            br = (abs(profile.m0) / (abs(lam) * (profile.m0 - profile.M0) ** 2), es)
        else:
            br = (es, math.inf)
        return TailInfo(True, 1.0, 0, "bounded", br)
    table = _kbar_table(lam, q, 0)
    if table == "none":
        raise UnsupportedRegimeError(f"tail at (lambda, q) = ({lam}, {q}) is not covered")
    if table == "bounded":
        return TailInfo(True, 1.0, 0, "bounded")
    if table == "log":
        return TailInfo(True, 1.0, 2, "log")
    ex = 2 * lam / q - 1
    if abs(ex) < 1e-12:
        return TailInfo(False, 0.0, 1, "power")
    return TailInfo(ex > 0, ex, 0, "power")


@dataclass(frozen=True)
class BlowupReport:
    t_star: float
    eta_star: float
    method: str  # closed-form | quadrature+tail | bracketed
    tail: TailInfo | None = None
    bracket: tuple[float, float] | None = None
    tail_value: float = 0.0
    notes: tuple[str, ...] = field(default_factory=tuple)


def _tail_integral(model, delta, decay):
    """int_0^delta model(s) ds via s = delta e^-x."""
    X = 40.0 / decay
    r = integrate(lambda x: model(delta * np.exp(-x)) * np.exp(-x), 0.0, X)
    return delta * r.value


def blowup_time(
    lam: float, profile: InitialProfile, delta: float = 1e-6, spec: QuadratureSpec = DEFAULT_SPEC
) -> BlowupReport:
    """Blow-up time t* = int_0^eta* Kbar0^(2 lambda) deta.

    The integral is taken numerically up to J(alpha_bar) = delta and the
    remainder from the leading-order model of Kbar0: a power law plus a
    constant matched at delta, a logarithm plus a constant, or (bounded
    Kbar0) the straight line between its values at delta and at eta*.
    Returns infinity when the tail exponent says the integral diverges.
    """
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    es = profile.eta_star(lam)
    q = profile.q_active(lam)
    notes = []
    try:
        tail = blowup_tail(lam, q, profile)
    except UnsupportedRegimeError as exc:
        tail = None
        notes.append(f"no analytic tail: {exc}")
    if lam == -1:
        return BlowupReport(es, es, "closed-form", tail, (es, es))
    if tail is not None and not tail.finite:
        return BlowupReport(math.inf, es, "quadrature+tail", tail)
    main = time_between(lam, profile, delta, 1.0, spec)
    k_delta = SolutionFrame.at(profile, lam, jbar=delta, spec=spec).kbar0
    regime = tail.regime if tail is not None else "numeric"
    ext = profile.active_value(lam)
    if regime == "power":
        terms = []
        for e in profile.active(lam):
            b = 1.0 / lam
            if b > 1.0 / e.q:
                terms.append((flank_constant(e, ext, b), 1.0 / e.q - b))
        D = k_delta - sum(C * delta**ex for C, ex in terms)
        emin = min(ex for _, ex in terms)

        def model(s):
            return (sum(C * s**ex for C, ex in terms) + D) ** (2 * lam)

        tail_val = _tail_integral(model, delta, 1.0 + 2 * lam * emin)
    elif regime == "log":
        A = sum(log_constant(e, ext) for e in profile.active(lam) if abs(1.0 / e.q - 1.0 / lam) < 1e-12)
        B = k_delta - A * math.log(1 / delta)

        def model(s):
            return (A * np.log(1 / s) + B) ** (2 * lam)

        tail_val = _tail_integral(model, delta, 1.0)
    else:
        try:
            k0 = integrate_jpow(profile, lam, b_exp=1.0 / lam, jbar=0.0, spec=spec).value
        except RangeError:
            k0 = k_delta
            notes.append("Kbar0 at eta* unavailable; constant tail")
        except DomainError:
            k0 = k_delta
            notes.append("Kbar0 at eta* unavailable; constant tail")

        def model(s):
            return (k0 + (k_delta - k0) * s / delta) ** (2 * lam)

        tail_val = integrate(model, 0.0, delta).value
    t_star = es * (main / es + tail_val)
    if lam < 0:
        return BlowupReport(t_star, es, "bracketed", tail, tail.bracket, es * tail_val, tuple(notes))
    return BlowupReport(t_star, es, "quadrature+tail", tail, None, es * tail_val, tuple(notes))


def blowup_locations(
    lam: float, profile: InitialProfile, spec: QuadratureSpec = DEFAULT_SPEC, jbars=(1e-4, 1e-5, 1e-6)
) -> list[tuple[float, float]]:
    """(alpha_bar, x*) for every active extremum.

    gamma(alpha_bar) is evaluated at three geometric distances from eta* and
    extrapolated with the Aitken delta-squared process.
    """
    out = []
    frames = [SolutionFrame.at(profile, lam, jbar=j, spec=spec) for j in jbars]
    for e in profile.active(lam):
        g = [float(characteristic(f, [e.alpha])[0]) for f in frames]
        d1, d2 = g[1] - g[0], g[2] - g[1]
        den = d2 - d1
        if abs(den) > 1e-14 and abs(d2) > 1e-15:
            x = g[2] - d2 * d2 / den
        else:
            x = g[2]
        out.append((e.alpha, float(x)))
    return out
