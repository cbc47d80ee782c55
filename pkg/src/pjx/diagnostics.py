"""Norms, energy and numerically observed blow-up behaviour.

All integrals are taken in the Lagrangian variable:
||u_x||_p^p = int_0^1 |u_x(gamma(alpha))|^p gamma_alpha dalpha. The energy and
its rate are computed from the central moments
V_k = int J^(-1/lambda) (1/J - Kbar1/Kbar0)^k dalpha, which avoids the
cancellation in Kbar0 Kbar2 - Kbar1^2 at small eta.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classifier import Linfty
from .errors import DomainError
from .profiles import InitialProfile
from .quadrature import DEFAULT_SPEC, QuadratureSpec, check_jpow
from .solution import SMALL_ETA, SolutionFrame, characteristic, eulerian_alpha, extrema, ux


def _ux_density(frame: SolutionFrame):
    """Callable g(alpha, J, w) -> (u_x, gamma_alpha)."""
    lam = frame.lam
    K0 = frame.kbar0
    if frame.eta <= SMALL_ETA:
        W = frame.weighted_moment
        c = K0 ** (-2 * lam)

        def f(a, J, w):
            return c * (w / J - W / K0), J ** (-1 / lam) / K0
    else:
        r = frame.kbar1 / K0
        pre = 1.0 / (lam * frame.eta * K0 ** (2 * lam))

        def f(a, J, w):
            return pre * (1.0 / J - r), J ** (-1 / lam) / K0

    return f


def lp_norm(frame: SolutionFrame, p: float) -> float:
    """||u_x(., t)||_p by Lagrangian quadrature."""
    if not p >= 1:
        raise DomainError("p must be >= 1")
    check_jpow(frame.kernel, 1.0 + 1.0 / frame.lam)
    dens = _ux_density(frame)

    def g(a, J, w):
        v, ga = dens(a, J, w)
        return np.abs(v) ** p * ga

    return frame.kernel.integrate(g).value ** (1.0 / p)


def lp_norm_eulerian(frame: SolutionFrame, p: float, n: int = 4001) -> float:
    """||u_x||_p by composite Simpson in x (an independent route)."""
    if n % 2 == 0:
        n += 1
    L = float(characteristic(frame, [1.0])[0])
    x = np.linspace(0.0, L, n)
    a = eulerian_alpha(frame, x)
    f = np.abs(ux(frame, a)) ** p
    h = L / (n - 1)
    s = f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum()
    return (s * h / 3) ** (1.0 / p)


def lp_bounds(frame: SolutionFrame, p: float) -> tuple[float, float]:
    """Lower and upper bounds on ||u_x||_p from moments of J."""
    if not p >= 1:
        raise DomainError("p must be >= 1")
    lam, eta = frame.lam, frame.eta
    if eta == 0:
        raise DomainError("bounds need eta > 0")
    K0, K1 = frame.kbar0, frame.kbar1
    k = frame.kernel

    def mom(b):
        check_jpow(k, b)
        return k.integrate(lambda a, J, w: J ** (-b)).value

    ale = abs(lam * eta)
    upper_p = 2 ** (p - 1) / (ale**p * K0 ** (1 + 2 * lam * p)) * (mom(p + 1 / lam) + K1**p / K0 ** (p - 1))
    lower = abs(mom(1 + 1 / (lam * p)) - K1 / K0 * mom(1 / (lam * p))) / (ale * K0 ** (2 * lam + 1 / p))
    return lower, upper_p ** (1.0 / p)


def central_moment(frame: SolutionFrame, k: int) -> float:
    lam = frame.lam
    r = frame.kbar1 / frame.kbar0
    check_jpow(frame.kernel, k + 1.0 / lam)
    return frame.kernel.integrate(lambda a, J, w: J ** (-1 / lam) * (1.0 / J - r) ** k).value


def energy(frame: SolutionFrame) -> float:
    """E = ||u_x||_2^2 = (lambda eta Kbar0^(1+2 lambda))^-2 (Kbar0 Kbar2 - Kbar1^2)."""
    if frame.eta <= SMALL_ETA:
        return lp_norm(frame, 2) ** 2
    lam = frame.lam
    K0 = frame.kbar0
    return K0 * central_moment(frame, 2) / (lam * frame.eta * K0 ** (1 + 2 * lam)) ** 2


def cubic_integral(frame: SolutionFrame) -> float:
    """int u_x^3 dx."""
    if frame.eta <= SMALL_ETA:
        dens = _ux_density(frame)

        def g(a, J, w):
            v, ga = dens(a, J, w)
            return v**3 * ga

        return frame.kernel.integrate(g).value
    lam = frame.lam
    K0 = frame.kbar0
    return central_moment(frame, 3) / ((lam * frame.eta) ** 3 * K0 ** (1 + 6 * lam))


def energy_rate(frame: SolutionFrame) -> float:
    """dE/dt = (1 + 2 lambda) int u_x^3 dx."""
    c = 1.0 + 2.0 * frame.lam
    if c == 0:
        return 0.0
    return c * cubic_integral(frame)


def lp_sandwich(frame: SolutionFrame, p: float, slack: float = 1e-9) -> bool:
    lo, hi = lp_bounds(frame, p)
    v = lp_norm(frame, p)
    return lo * (1 - slack) <= v <= hi * (1 + slack)


SWEEP_COLUMNS = ("eta", "t", "M", "m", "lp1", "lp2", "lp3", "E", "Edot")


def sweep_row(frame: SolutionFrame, ps=(1.0, 2.0, 3.0)) -> dict:
    M, m = extrema(frame)
    row = {"eta": frame.eta, "t": frame.t, "M": M, "m": m}
    for i, p in enumerate(ps, 1):
        row[f"lp{i}"] = lp_norm(frame, p)
    row["E"] = energy(frame)
    row["Edot"] = energy_rate(frame)
    return row


def regularity_sweep(
    profile: InitialProfile,
    lam: float,
    etas,
    ps=(1.0, 2.0, 3.0),
    spec: QuadratureSpec = DEFAULT_SPEC,
    threads: int = 1,
) -> list[dict]:
    """Rows of (eta, t, M, m, lp1, lp2, lp3, E, Edot), in the order of ``etas``."""

    def one(eta):
        return sweep_row(SolutionFrame.at(profile, lam, eta, spec=spec), ps)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(one, etas))
    return [one(e) for e in etas]


# ---------------------------------------------------------------------------
# numerical observation of the L-infinity behaviour


@dataclass(frozen=True)
class Observation:
    outcome: Linfty
    jbar: np.ndarray
    M: np.ndarray
    m: np.ndarray
    interior: np.ndarray
    probe: float


def _diverges(series: np.ndarray, scale: float) -> bool:
    """Growth past 1e6 x scale, or steady growth that is not levelling off."""
    a = np.abs(series)
    if a[-1] > 1e6 * scale:
        return True
    inc = np.diff(a)
    if len(inc) < 3 or np.any(inc[-3:] <= 0):
        return False
    # increments per decade that do not shrink: logarithmic or power growth
    return inc[-1] >= 0.9 * inc[-2] and inc[-1] > 0.01 * a[-1]


def _plateau(series: np.ndarray) -> bool:
    a, b = series[-2], series[-1]
    return abs(b - a) <= 0.01 * max(abs(a), abs(b)) and abs(b) > 0


def interior_probe(profile: InitialProfile) -> float:
    """A point where u0' sits midway between m0 and M0, away from the extrema."""
    a = np.linspace(0.0, 1.0, 20001)
    v = profile.u0p(a)
    target = 0.5 * (profile.M0 + profile.m0)
    pts = np.array(profile.all_points())
    dist = np.min(np.abs(a[:, None] - pts[None, :]), axis=1)
    score = np.abs(v - target) / (profile.M0 - profile.m0) - 0.1 * np.minimum(dist, 0.1)
    return float(a[np.argmin(score)])


def observe_linfty(
    profile: InitialProfile,
    lam: float,
    jbars=tuple(10.0**-k for k in range(2, 15)),
    spec: QuadratureSpec | None = None,
) -> Observation:
    """Classify the behaviour of u_x from its values as J(alpha_bar) -> 0.

    The rules: growth past 1e6 times the initial sup norm (or sustained
    growth per decade) means divergence; a sup norm below 1e-3 of the
    initial one means vanishing; a change below 1% over the last decade
    means a nontrivial steady state.
    """
    jb = np.array(sorted(jbars, reverse=True), dtype=float)
    if spec is None:
        spec = QuadratureSpec(singularity_guard=min(DEFAULT_SPEC.singularity_guard, jb.min()))
    probe = interior_probe(profile)
    Ms, ms, Is = [], [], []
    for j in jb:
        f = SolutionFrame.at(profile, lam, jbar=j, spec=spec)
        vals = ux(f, np.array([*profile.maxima, *profile.minima, probe]))
        nM = len(profile.maxima)
        Ms.append(vals[:nM].max())
        ms.append(vals[nM:-1].min())
        Is.append(vals[-1])
    M, m, I = np.array(Ms), np.array(ms), np.array(Is)
    scale = max(abs(profile.M0), abs(profile.m0))
    top, bot, mid = _diverges(M, scale), _diverges(m, scale), _diverges(I, scale)
    sup = np.maximum(np.abs(M), np.abs(m))
    if lam > 0:
        if top and bot and mid and I[-1] < 0:
            out = Linfty.TWO_SIDED
        elif top and not bot and not mid:
            out = Linfty.ONE_SIDED_MAX
        elif sup[-1] < 1e-3 * scale:
            out = Linfty.GLOBAL_VANISH
        elif _plateau(M) and _plateau(m) and not (top or bot):
            out = Linfty.GLOBAL_STEADY
        else:
            out = Linfty.NOT_COVERED
    else:
        if top and bot and mid and I[-1] > 0:
            out = Linfty.TWO_SIDED
        elif bot and not top and not mid:
            out = Linfty.ONE_SIDED_MIN
        else:
            out = Linfty.NOT_COVERED
    return Observation(out, jb, M, m, I, probe)
