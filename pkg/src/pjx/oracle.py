"""Direct Eulerian integration of u_xt + u u_xx - lambda u_x^2 = I(t).

The unknown is v = u_x on a uniform grid. u is rebuilt from v by mean-zero
antidifferentiation and the nonlocal term is chosen so that the discrete
mean of v is conserved exactly. Time stepping is classical RK4.

This module exists to check the closed-form solution in the smooth regime;
it makes no attempt to follow the flow up to a singularity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .diagnostics import energy
from .errors import BlowupGuardError, CFLError, DomainError, OutOfRangeError, SingularityGuardError
from .profiles import InitialProfile
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .solution import SolutionFrame, characteristic, eulerian_alpha, time_of_eta, ux, uxx

BLOWUP_GUARD = 1e5
CFL = 0.4


@dataclass(frozen=True)
class MolState:
    grid: np.ndarray
    v: np.ndarray
    t: float
    I: float
    periodic: bool = False

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def mean(self) -> float:
        return _mean(self.v, self.h, self.periodic)


def make_grid(N: int, periodic: bool = False) -> np.ndarray:
    """N intervals on [0, 1]: N nodes when periodic, N + 1 with both ends otherwise."""
    if N < 256 or N & (N - 1):
        raise DomainError(f"N must be a power of two >= 256, got {N}")
    if periodic:
        return np.arange(N) / N
    return np.linspace(0.0, 1.0, N + 1)


def _simpson(f: np.ndarray, h: float) -> float:
    return h / 3 * (f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum())


def _mean(f: np.ndarray, h: float, periodic: bool) -> float:
    if periodic:
        return float(f.mean())
    return float(_simpson(f, h))


def _dx_fd4(f: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order first derivative with one-sided stencils at the ends."""
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return d


def _u_and_vx(v: np.ndarray, h: float, periodic: bool) -> tuple[np.ndarray, np.ndarray]:
    if periodic:
        N = len(v)
        k = 2j * np.pi * np.fft.fftfreq(N, d=1.0 / N)
        vh = np.fft.fft(v)
        vx = np.fft.ifft(k * vh).real
        kk = k.copy()
        kk[0] = 1.0
        uh = vh / kk
        uh[0] = 0.0
        return np.fft.ifft(uh).real, vx
    vx = _dx_fd4(v, h)
    # trapezoid with the Euler-Maclaurin end correction, fourth order
    u = np.concatenate([[0.0], np.cumsum(0.5 * h * (v[1:] + v[:-1]))])
    u -= h * h / 12 * (vx - vx[0])
    x = np.linspace(0.0, 1.0, len(v))
    u -= x * u[-1]
    return u, vx


def rhs(v: np.ndarray, h: float, lam: float, periodic: bool) -> tuple[np.ndarray, float, np.ndarray]:
    """(v_t, I, u) for the current v."""
    u, vx = _u_and_vx(v, h, periodic)
    f = -u * vx + lam * v * v
    I = -_mean(f, h, periodic)
    return f + I, I, u


def stable_dt(state: MolState, lam: float, dt_max: float = 1e-3) -> float:
    u, _ = _u_and_vx(state.v, state.h, state.periodic)
    umax = float(np.max(np.abs(u)))
    if umax == 0:
        return dt_max
    return min(CFL * state.h / umax, dt_max)


def mol_step(state: MolState, lam: float, dt: float) -> MolState:
    """One RK4 step of length dt."""
    h, per = state.h, state.periodic
    vmax = float(np.max(np.abs(state.v)))
    if not vmax < BLOWUP_GUARD:
        raise BlowupGuardError(f"max|u_x| = {vmax:.3e} exceeds {BLOWUP_GUARD:.0e} at t = {state.t:.6g}")
    k1, I0, u = rhs(state.v, h, lam, per)
    umax = float(np.max(np.abs(u)))
    if dt * umax > CFL * h * (1 + 1e-12):
        raise CFLError(f"dt = {dt:.3e} exceeds {CFL} dx / max|u| = {CFL * h / umax:.3e}")
    k2, _, _ = rhs(state.v + 0.5 * dt * k1, h, lam, per)
    k3, _, _ = rhs(state.v + 0.5 * dt * k2, h, lam, per)
    k4, _, _ = rhs(state.v + dt * k3, h, lam, per)
    v = state.v + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(v)):
        raise BlowupGuardError(f"non-finite values at t = {state.t + dt:.6g}")
    _, I, _ = rhs(v, h, lam, per)
    return MolState(state.grid, v, state.t + dt, I, per)


@dataclass
class MolRun:
    lam: float
    states: list[MolState] = field(default_factory=list)
    max_mean_drift: float = 0.0

    @property
    def final(self) -> MolState:
        return self.states[-1]


def initial_state(profile: InitialProfile, N: int = 1024, periodic: bool | None = None, lam: float = 0.0) -> MolState:
    per = profile.boundary == "periodic" if periodic is None else periodic
    x = make_grid(N, per)
    v = np.asarray(profile.u0p(x), dtype=float)
    _, I, _ = rhs(v, x[1] - x[0], lam, per)
    return MolState(x, v, 0.0, I, per)


def mol_solve(
    profile: InitialProfile,
    lam: float,
    times,
    N: int = 1024,
    dt: float | None = None,
    periodic: bool | None = None,
) -> MolRun:
    """Integrate from t = 0 and record a state at each requested time.

    With ``dt`` omitted the step is min(0.4 dx / max|u|, 1e-3), recomputed
    every step and shortened to land exactly on the output times.
    """
    times = sorted(float(t) for t in np.atleast_1d(times))
    if times and times[0] < 0:
        raise DomainError("times must be nonnegative")
    st = initial_state(profile, N, periodic, lam)
    m0 = st.mean()
    run = MolRun(lam, [])
    for target in times:
        while st.t < target - 1e-14:
            step = stable_dt(st, lam) if dt is None else dt
            step = min(step, target - st.t)
            st = mol_step(st, lam, step)
            run.max_mean_drift = max(run.max_mean_drift, abs(st.mean() - m0))
        run.states.append(st)
    return run


# ---------------------------------------------------------------------------
# comparisons with the closed-form solution


def eta_at_time(profile: InitialProfile, lam: float, t: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Solve t(eta) = t by Newton's method; dt/deta = Kbar0^(2 lambda)."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0:
        return 0.0
    es = profile.eta_star(lam)
    eta = min(t, 0.5 * es)
    for _ in range(60):
        try:
            f = SolutionFrame.at(profile, lam, eta, spec=spec)
            g = f.t - t
        except SingularityGuardError as exc:
            raise OutOfRangeError(f"t = {t} is not reached before the singularity") from exc
        step = g / f.kbar0 ** (2 * lam)
        new = eta - step
        if new >= es:
            new = 0.5 * (eta + es)
        elif new <= 0:
            new = 0.5 * eta
        if abs(new - eta) <= 1e-15 * max(1.0, eta):
            return new
        eta = new
    if abs(g) > 1e-12 * max(1.0, t):
        raise OutOfRangeError(f"t = {t} is not reached before the singularity")
    return eta


def exact_on_grid(profile: InitialProfile, lam: float, t: float, x: np.ndarray, spec: QuadratureSpec = DEFAULT_SPEC):
    """u_x(x, t) from the closed-form solution at Eulerian nodes x."""
    frame = SolutionFrame.at(profile, lam, eta_at_time(profile, lam, t, spec), spec=spec)
    return ux(frame, eulerian_alpha(frame, x))


def compare_to_exact(profile: InitialProfile, lam: float, t: float, N: int = 1024, dt: float | None = None) -> float:
    """max over nodes of |v_mol - u_x exact| at time t."""
    run = mol_solve(profile, lam, [t], N=N, dt=dt)
    st = run.final
    return float(np.max(np.abs(st.v - exact_on_grid(profile, lam, t, st.grid))))


def burgers_exact(profile: InitialProfile, t: float, x, n_table: int = 20001) -> np.ndarray:
    """u_x for lambda = -1, where u_t + u u_x = 0 and x = alpha + t u0(alpha).

    u0 is tabulated by cumulative Simpson, independently of the kernel
    quadrature used elsewhere.
    """
    a = np.linspace(0.0, 1.0, n_table)
    d = np.asarray(profile.u0p(a), dtype=float)
    if np.min(1 + t * d) <= 0:
        raise OutOfRangeError("characteristics have crossed")
    u0 = CubicSpline(a, cumulative_simpson(d, x=a, initial=0.0))
    x = np.asarray(x, dtype=float)
    X = a + t * u0(a)
    al = np.interp(x, X, a)
    for _ in range(6):
        g = al + t * u0(al) - x
        al = np.clip(al - g / (1 + t * profile.u0p(al)), 0.0, 1.0)
    s = profile.u0p(al)
    return s / (1 + t * s)


# ---------------------------------------------------------------------------
# PDE residual of the reconstructed solution


def _deriv3(ts, fs, k):
    """Derivative at ts[k] of the quadratic through three (t, f) samples."""
    t0, t1, t2 = ts
    f0, f1, f2 = fs
    tk = ts[k]
    l0 = ((tk - t1) + (tk - t2)) / ((t0 - t1) * (t0 - t2))
    l1 = ((tk - t0) + (tk - t2)) / ((t1 - t0) * (t1 - t2))
    l2 = ((tk - t0) + (tk - t1)) / ((t2 - t0) * (t2 - t1))
    return l0 * f0 + l1 * f1 + l2 * f2


@dataclass(frozen=True)
class Residual:
    value: float
    scale: float
    t: float
    skipped: int = 0

    @property
    def ok(self) -> bool:
        return self.value <= 1e-3 * self.scale


def residual(
    profile: InitialProfile,
    lam: float,
    eta: float,
    x=None,
    d_eta: float = 1e-4,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> Residual:
    """max |u_xt + u u_xx - lambda u_x^2 - I(t)| over an Eulerian grid.

    u_xt is a three-point difference in t at fixed x across frames at
    eta - d, eta, eta + d (forward when eta < d); u is the time derivative
    of the characteristic; I = -(lambda + 1) ||u_x||_2^2.
    """
    es = profile.eta_star(lam)
    if not 0 <= eta < es:
        raise OutOfRangeError("eta must lie in [0, eta*)")
    if 1 - eta / es < 1e-3:
        raise OutOfRangeError("frame too close to the singularity")
    if not 1e-7 <= d_eta <= 1e-2 or eta + 2 * d_eta >= es:
        raise DomainError("insufficient frame spacing")
    if eta >= d_eta:
        etas, k = (eta - d_eta, eta, eta + d_eta), 1
    else:
        etas, k = (eta, eta + d_eta, eta + 2 * d_eta), 0
    frames = [SolutionFrame.at(profile, lam, e, spec=spec) for e in etas]
    ts = [time_of_eta(lam, profile, e, spec=spec) if e > 0 else 0.0 for e in etas]
    f0 = frames[k]
    if x is None:
        L = float(characteristic(f0, [1.0])[0])
        x = np.linspace(0.0, L, 401)
    x = np.asarray(x, dtype=float)
    alphas = [eulerian_alpha(f, x) for f in frames]
    vx_t = _deriv3(ts, [ux(f, a) for f, a in zip(frames, alphas)], k)
    a0 = alphas[k]
    # u = d gamma / dt at fixed alpha
    u = _deriv3(ts, [characteristic(f, a0) for f in frames], k)
    v = ux(f0, a0)
    I = -(lam + 1) * energy(f0)
    with np.errstate(invalid="ignore"):
        res = vx_t + u * uxx(f0, a0) - lam * v * v - I
    # u0'' is infinite at a cusp (q < 1); the equation has no pointwise meaning there
    ok = np.isfinite(res)
    return Residual(float(np.max(np.abs(res[ok]))), max(1.0, float(np.max(v * v))), ts[k], int(np.sum(~ok)))


def nonlocal_term(profile: InitialProfile, lam: float, t: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """-(lambda + 1) ||u_x||_2^2 from the closed-form solution."""
    f = SolutionFrame.at(profile, lam, eta_at_time(profile, lam, t, spec), spec=spec)
    return -(lam + 1) * energy(f)


def snapshot_rows(state: MolState) -> list[tuple[float, float, float]]:
    u, _ = _u_and_vx(state.v, state.h, state.periodic)
    return [(float(a), float(b), float(c)) for a, b, c in zip(state.grid, u, state.v)]


__all__ = [
    "BLOWUP_GUARD",
    "MolRun",
    "MolState",
    "Residual",
    "burgers_exact",
    "compare_to_exact",
    "eta_at_time",
    "exact_on_grid",
    "initial_state",
    "make_grid",
    "mol_solve",
    "mol_step",
    "nonlocal_term",
    "residual",
    "snapshot_rows",
]
