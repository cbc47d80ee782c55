"""Initial data u0'(alpha) on [0, 1] together with its extremal structure.

A profile carries the derivative of the initial velocity, the global maximum
M0 and minimum m0, and for every location where they are attained the local
power law u0'(alpha) ~ M0 + C1 |alpha - alpha_bar|^q (maxima, C1 < 0) or
u0'(alpha) ~ m0 + C2 |alpha - alpha_bar|^q (minima, C2 > 0).

Each profile also supplies an accurate ``gap(point, d)`` = |u0'(point + d) -
u0'(point)| so that quantities like 1 - lambda eta u0' can be formed near an
extremum without cancellation.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ConsistencyError, DomainError, FitError, ParameterError

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Extremum:
    """A location of M0 or m0 with its local power law."""

    alpha: float
    q: float
    coeff: float

    @property
    def flanks(self) -> int:
        """Number of sides of the extremum lying inside [0, 1]."""
        return 1 if self.alpha in (0.0, 1.0) else 2


@dataclass(frozen=True, eq=False)
class InitialProfile:
    name: str
    u0p: ArrayFn
    M0: float
    m0: float
    max_points: tuple[Extremum, ...]
    min_points: tuple[Extremum, ...]
    q: float
    u0pp: ArrayFn | None = None
    boundary: str = "dirichlet"
    gap_fn: Callable[[float, np.ndarray], np.ndarray] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.M0 > 0 > self.m0):
            raise ParameterError(f"{self.name}: need M0 > 0 > m0, got {self.M0}, {self.m0}")
        if not self.max_points or not self.min_points:
            raise ParameterError(f"{self.name}: need at least one maximum and one minimum")
        for e in self.max_points:
            if not e.coeff < 0:
                raise ParameterError(f"{self.name}: C1 must be negative at alpha={e.alpha}")
        for e in self.min_points:
            if not e.coeff > 0:
                raise ParameterError(f"{self.name}: C2 must be positive at alpha={e.alpha}")
        if self.boundary not in ("dirichlet", "periodic"):
            raise ParameterError(f"unknown boundary {self.boundary!r}")

    @property
    def maxima(self) -> tuple[float, ...]:
        return tuple(e.alpha for e in self.max_points)

    @property
    def minima(self) -> tuple[float, ...]:
        return tuple(e.alpha for e in self.min_points)

    @property
    def C1(self) -> float:
        return self.max_points[0].coeff

    @property
    def C2(self) -> float:
        return self.min_points[0].coeff

    def active(self, lam: float) -> tuple[Extremum, ...]:
        """Extrema where 1 - lambda eta u0' first vanishes."""
        if lam > 0:
            return self.max_points
        if lam < 0:
            return self.min_points
        raise DomainError("lambda = 0 has no blow-up extremum")

    def active_value(self, lam: float) -> float:
        return self.M0 if lam > 0 else self.m0

    def q_active(self, lam: float) -> float:
        """Dominant (largest) local exponent among the active extrema."""
        return max(e.q for e in self.active(lam))

    def q_for_classification(self, lam: float) -> float:
        """Exponent to feed the classification tables.

        For a single active exponent this is that exponent. Mixed exponents fall
        back to the declared global q (the minimum over locations).
        """
        qs = {e.q for e in self.active(lam)}
        return qs.pop() if len(qs) == 1 else self.q

    def eta_star(self, lam: float) -> float:
        if lam == 0:
            return math.inf
        return 1.0 / (lam * self.active_value(lam))

    def gap(self, point: float, d) -> np.ndarray:
        """|u0'(point + d) - u0'(point)|, accurate for small d."""
        d = np.asarray(d, dtype=float)
        if self.gap_fn is not None:
            return np.abs(self.gap_fn(point, d))
        return np.abs(self.u0p(point + d) - self.u0p(np.full_like(d, point)))

    def all_points(self) -> tuple[float, ...]:
        return tuple(sorted({*self.maxima, *self.minima}))


# ---------------------------------------------------------------------------
# builtins


def _monomial_profile(name, A, B, p, *, scale=1.0, q_decl=None, flip=False):
    """u0' = scale * (A - B alpha^p) (or its negation when ``flip``).

    Monotone on [0, 1]; extremum at 0 with exponent p and at 1 linear.
    """
    s = -scale if flip else scale

    def u0p(a):
        a = np.asarray(a, dtype=float)
        return s * (A - B * a**p)

    def u0pp(a):
        a = np.asarray(a, dtype=float)
        with np.errstate(divide="ignore"):
            return -s * B * p * a ** (p - 1)

    def gap(point, d):
        if point == 0.0:
            return scale * B * np.abs(d) ** p
        # point == 1
        return -scale * B * np.expm1(p * np.log1p(d))

    v0 = s * A
    v1 = s * (A - B)
    slope1 = -s * B * p  # u0''(1)
    e0 = Extremum(0.0, p, -scale * B if not flip else scale * B)
    # u0'(1 - h) ~ v1 - slope1 h
    e1 = Extremum(1.0, 1.0, -slope1)
    if v0 > v1:
        mx, mn = (e0,), (e1,)
    else:
        mx, mn = (e1,), (e0,)
    M0, m0 = max(v0, v1), min(v0, v1)
    return InitialProfile(
        name=name,
        u0p=u0p,
        u0pp=u0pp,
        M0=M0,
        m0=m0,
        max_points=mx,
        min_points=mn,
        q=q_decl if q_decl is not None else p,
        gap_fn=gap,
    )


def _ex4():
    # u0' = (5/2) alpha^(3/2) - 1
    prof = _monomial_profile("ex4_q32", 1.0, 2.5, 1.5, flip=True)
    return prof


def _shifted_taylor(coeffs: np.ndarray, point: float) -> np.ndarray:
    """Coefficients of p(point + d) in powers of d."""
    n = len(coeffs)
    out = np.zeros(n)
    c = np.array(coeffs, dtype=float)
    fact = 1.0
    for k in range(n):
        out[k] = P.polyval(point, c) / fact
        c = P.polyder(c)
        if len(c) == 0:
            break
        fact *= k + 1
    return out


def polynomial_profile(
    coeffs: Sequence[float],
    name: str = "polynomial",
    boundary: str = "dirichlet",
    points: Sequence[float] | None = None,
) -> InitialProfile:
    """Profile from the ascending coefficients of u0'(alpha).

    Extrema, their exponents and coefficients are detected from the
    polynomial. ``points`` lets the caller supply exact interior critical
    points that replace numerically found roots nearby.
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if len(c) < 2:
        raise FitError("constant u0' has no extremal structure")
    dc = P.polyder(c)
    roots = P.polyroots(dc) if len(dc) > 1 else np.array([])
    cand = [0.0, 1.0]
    for r in np.atleast_1d(roots):
        if abs(r.imag) < 1e-9 and 0.0 < r.real < 1.0:
            cand.append(float(r.real))
    if points:
        for p in points:
            cand = [x for x in cand if abs(x - p) > 1e-6] + [float(p)]
    cand = sorted(set(cand))
    vals = P.polyval(np.array(cand), c)
    M0, m0 = float(vals.max()), float(vals.min())
    scale = max(abs(M0), abs(m0))
    tol = 1e-12 * scale

    def local(point, ext, sign):
        t = _shifted_taylor(c, point)
        t[0] = 0.0
        if 0.0 < point < 1.0:
            t[1] = 0.0
        nz = [k for k in range(1, len(t)) if abs(t[k]) > tol]
        if not nz:
            raise FitError(f"flat extremum at {point}")
        k = nz[0]
        coef = t[k] * ((-1.0) ** k if point == 1.0 else 1.0)
        return Extremum(point, float(k), float(coef)), t

    taylors = {}
    mx, mn = [], []
    for a, v in zip(cand, vals):
        if abs(v - M0) <= tol:
            e, t = local(a, M0, -1)
            mx.append(e)
            taylors[a] = t
        elif abs(v - m0) <= tol:
            e, t = local(a, m0, 1)
            mn.append(e)
            taylors[a] = t

    def u0p(a):
        return P.polyval(np.asarray(a, dtype=float), c)

    def u0pp(a):
        return P.polyval(np.asarray(a, dtype=float), dc)

    def gap(point, d):
        t = taylors.get(point)
        if t is None:
            return u0p(point + d) - u0p(point)
        return P.polyval(d, t)

    qs = [e.q for e in mx + mn]
    return InitialProfile(
        name=name,
        u0p=u0p,
        u0pp=u0pp,
        M0=M0,
        m0=m0,
        max_points=tuple(mx),
        min_points=tuple(mn),
        q=float(min(qs)),
        boundary=boundary,
        gap_fn=gap,
        meta={"coeffs": [float(x) for x in c]},
    )


def _ex5():
    r = (1 + 4 * math.sqrt(22)) / 36
    # u0 = alpha (1 - alpha)(alpha - 3/4)(alpha - r)
    u0 = P.polymul(P.polymul([0.0, 1.0], [1.0, -1.0]), P.polymul([-0.75, 1.0], [-r, 1.0]))
    amin = (4 + math.sqrt(22)) / 24
    prof = polynomial_profile(P.polyder(u0), name="ex5_mixed", points=[amin])
    return prof


def _ex6():
    return polynomial_profile([0.5, -3.0, 3.0], name="ex6_linear")


def powerlaw(q: float, M0: float = 1.0, C1: float | None = None, kind: str = "max") -> InitialProfile:
    """Mean-zero power-law profile centred at alpha = 1/2.

    ``kind='max'``: u0' = M0 + C1 |alpha - 1/2|^q with the maximum M0 at 1/2
    and linear minima -q M0 at both endpoints.
    ``kind='min'``: the negation, a minimum -M0 at 1/2.
    C1 is fixed by the mean-zero condition, C1 = -M0 (q + 1) 2^q.
    """
    if q <= 0 or M0 <= 0:
        raise ParameterError("powerlaw needs q > 0 and M0 > 0")
    c_mean = -M0 * (q + 1) * 2.0**q
    if C1 is None:
        C1 = c_mean
    elif abs(C1 - c_mean) > 1e-9 * abs(c_mean):
        raise ParameterError(f"C1 must equal {c_mean} for a mean-zero profile")
    if kind not in ("max", "min"):
        raise ParameterError("kind must be 'max' or 'min'")
    s = 1.0 if kind == "max" else -1.0
    absC = -C1

    def u0p(a):
        a = np.asarray(a, dtype=float)
        return s * (M0 - absC * np.abs(a - 0.5) ** q)

    def u0pp(a):
        a = np.asarray(a, dtype=float)
        x = a - 0.5
        with np.errstate(divide="ignore", invalid="ignore"):
            return -s * absC * q * np.abs(x) ** (q - 1) * np.sign(x)

    def gap(point, d):
        if point == 0.5:
            return absC * np.abs(d) ** q
        dd = d if point == 0.0 else -d
        # |u0'(end) - u0'(end +- dd)| with |alpha - 1/2| = 1/2 - dd
        return -absC * 0.5**q * np.expm1(q * np.log1p(-2.0 * dd))

    c_end = absC * q * 2.0 ** (1.0 - q)
    centre = Extremum(0.5, float(q), s * -absC)
    ends = (Extremum(0.0, 1.0, s * c_end), Extremum(1.0, 1.0, s * c_end))
    if kind == "max":
        M, m, mx, mn = M0, -q * M0, (centre,), ends
    else:
        M, m, mx, mn = q * M0, -M0, ends, (centre,)
    return InitialProfile(
        name=f"powerlaw(q={q:g},M0={M0:g},{kind})",
        u0p=u0p,
        u0pp=u0pp,
        M0=M,
        m0=m,
        max_points=mx,
        min_points=mn,
        q=float(q),
        gap_fn=gap,
    )


BUILTIN_LAMBDA = {
    "ex1_q13": 0.5,
    "ex1_q65": 0.5,
    "ex2_q5": 2.0,
    "ex2_q52": 1.25,
    "ex3_q6": 5.5,
    "ex4_q32": -2.5,
    "ex5_mixed": -1.0 / 3.0,
    "ex6_linear": 1.0,
}

_BUILDERS = {
    "ex1_q13": lambda: _monomial_profile("ex1_q13", 1.0, 4.0 / 3.0, 1.0 / 3.0),
    "ex1_q65": lambda: _monomial_profile("ex1_q65", 1.0, 11.0 / 5.0, 6.0 / 5.0),
    "ex2_q5": lambda: _monomial_profile("ex2_q5", 1.0, 6.0, 5.0),
    "ex2_q52": lambda: _monomial_profile("ex2_q52", 1.0, 3.5, 2.5),
    "ex3_q6": lambda: _monomial_profile("ex3_q6", 1.0, 7.0, 6.0, scale=1.0 / 11.0),
    "ex4_q32": _ex4,
    "ex5_mixed": _ex5,
    "ex6_linear": _ex6,
}

_POWERLAW_RE = re.compile(r"^powerlaw(_min)?\((.*)\)$")

_cache: dict[str, InitialProfile] = {}


def builtin(name: str) -> InitialProfile:
    """Look up a named profile. Also accepts ``powerlaw(q[, M0])`` and ``powerlaw_min(...)``."""
    key = name.strip().replace(" ", "")
    if key in _cache:
        return _cache[key]
    if key in _BUILDERS:
        prof = _BUILDERS[key]()
    else:
        m = _POWERLAW_RE.match(key)
        if not m:
            raise DomainError(f"unknown builtin profile {name!r}; choose from {sorted(_BUILDERS)}")
        try:
            args = [float(x) for x in m.group(2).split(",") if x]
        except ValueError as exc:
            raise DomainError(f"bad powerlaw arguments in {name!r}") from exc
        if not 1 <= len(args) <= 3:
            raise DomainError("powerlaw takes q[, M0[, C1]]")
        prof = powerlaw(*args, kind="min" if m.group(1) else "max")
    _cache[key] = prof
    return prof


def builtin_names() -> list[str]:
    return list(_BUILDERS)


# ---------------------------------------------------------------------------
# JSON


def _check_declared(prof: InitialProfile, data: dict) -> None:
    def close(a, b):
        return abs(a - b) <= 1e-8 * max(1.0, abs(b))

    for key, val in (("M0", prof.M0), ("m0", prof.m0), ("q", prof.q)):
        if key in data and data[key] is not None and not close(float(data[key]), val):
            raise ConsistencyError(f"declared {key}={data[key]} disagrees with {val}")
    for key, pts in (("maxima", prof.maxima), ("minima", prof.minima)):
        if key in data and data[key] is not None:
            got = sorted(float(x) for x in data[key])
            if len(got) != len(pts) or not all(close(a, b) for a, b in zip(got, sorted(pts))):
                raise ConsistencyError(f"declared {key}={got} disagrees with {list(pts)}")
    for key, val in (("C1", prof.C1), ("C2", prof.C2)):
        if key in data and data[key] is not None and not close(float(data[key]), val):
            raise ConsistencyError(f"declared {key}={data[key]} disagrees with {val}")


def profile_from_dict(data: dict) -> InitialProfile:
    """Build a profile from the JSON schema.

    ``kind`` is one of ``builtin`` (``name`` selects), ``polynomial``
    (``coeffs`` are the ascending coefficients of u0') or ``powerlaw``
    (``q``, ``M0``, optional ``C1`` and ``extremum`` = max|min).
    Declared fields are cross-checked against the detected structure.
    """
    kind = data.get("kind", "builtin")
    if kind == "builtin":
        prof = builtin(data["name"])
    elif kind == "polynomial":
        if "coeffs" not in data:
            raise DomainError("polynomial profile needs 'coeffs'")
        prof = polynomial_profile(
            data["coeffs"], name=data.get("name", "polynomial"), boundary=data.get("boundary", "dirichlet")
        )
    elif kind == "powerlaw":
        prof = powerlaw(
            float(data["q"]),
            float(data.get("M0", 1.0)),
            data.get("C1"),
            kind=data.get("extremum", "max"),
        )
        data = {k: v for k, v in data.items() if k not in ("q", "M0", "C1")}
    else:
        raise DomainError(f"unknown profile kind {kind!r}")
    _check_declared(prof, data)
    return prof


def load_profile(path: str) -> InitialProfile:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"malformed profile JSON: {exc}") from exc
    return profile_from_dict(data)


def profile_to_dict(prof: InitialProfile) -> dict:
    return {
        "name": prof.name,
        "q": prof.q,
        "M0": prof.M0,
        "m0": prof.m0,
        "maxima": list(prof.maxima),
        "minima": list(prof.minima),
        "C1": prof.C1,
        "C2": prof.C2,
        "boundary": prof.boundary,
    }


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class LocalFit:
    alpha: float
    kind: str
    q_declared: float
    q_fit: float
    C_declared: float
    C_fit: float
    residual: float

    @property
    def ok(self) -> bool:
        return (
            abs(self.q_fit / self.q_declared - 1) <= 0.02
            and abs(self.C_fit / self.C_declared - 1) <= 0.02
        )


def verify_local_expansion(prof: InitialProfile, h_range=(1e-5, 1e-2), n: int = 40) -> list[LocalFit]:
    """Log-log regression of |u0' - extremum| against the distance h.

    Uses the profile's accurate gap function on both sides inside [0, 1].
    Raises :class:`FitError` on a flat or non-power-law neighbourhood.
    """
    hs = np.geomspace(h_range[0], h_range[1], n)
    out = []
    for kind, pts in (("max", prof.max_points), ("min", prof.min_points)):
        for e in pts:
            xs, ys = [], []
            for side in (-1.0, 1.0):
                if not 0.0 <= e.alpha + side * h_range[1] <= 1.0:
                    continue
                g = prof.gap(e.alpha, side * hs)
                xs.append(np.log(hs))
                ys.append(np.log(np.where(g > 0, g, np.nan)))
            x, y = np.concatenate(xs), np.concatenate(ys)
            if not np.all(np.isfinite(y)):
                raise FitError(f"flat neighbourhood at alpha={e.alpha}")
            slope, icpt = np.polyfit(x, y, 1)
            resid = float(np.max(np.abs(y - (slope * x + icpt))))
            if resid > 0.1:
                raise FitError(f"no power law at alpha={e.alpha} (residual {resid:.3g})")
            # coefficient at the small-h end with the declared exponent
            lo = x == x.min()
            c_fit = float(np.mean(np.exp(y[lo] - e.q * x[lo])))
            sign = -1.0 if kind == "max" else 1.0
            out.append(LocalFit(e.alpha, kind, e.q, float(slope), e.coeff, sign * c_fit, resid))
    return out


def validate(prof: InitialProfile, n: int = 1_000_001) -> None:
    """Check the declared extremal data against a dense sample.

    Verifies M0/m0 to 1e-9 relative, their locations to 1e-5 and that u0'
    has zero mean (required for the Dirichlet representation).
    """
    a = np.linspace(0.0, 1.0, n)
    v = prof.u0p(a)
    scale = max(abs(prof.M0), abs(prof.m0))
    if abs(v.max() - prof.M0) > 1e-9 * scale or abs(v.min() - prof.m0) > 1e-9 * scale:
        raise ConsistencyError(f"{prof.name}: sampled extrema {v.max()}, {v.min()} disagree")
    for pts, target in ((prof.max_points, v.argmax()), (prof.min_points, v.argmin())):
        # a flat extremum is only located to within the width where the
        # power law drops below rounding level
        tol = [max(1e-5, (1e-14 * scale / abs(e.coeff)) ** (1.0 / e.q)) for e in pts]
        if all(abs(a[target] - e.alpha) > t for e, t in zip(pts, tol)):
            raise ConsistencyError(f"{prof.name}: extremum location {a[target]} not declared")
    mean = np.trapezoid(v, a)
    if abs(mean) > 1e-6 * scale:
        raise ConsistencyError(f"{prof.name}: u0' has nonzero mean {mean}")
