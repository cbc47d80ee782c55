"""Classification of the long-time behaviour from (lambda, q, p).

The tables here encode which regimes lead to global existence or finite-time
blow-up of u_x in L-infinity, and which L^p norms stay finite or diverge at
the blow-up time. ``q`` is the local curvature exponent of the relevant
extremum of u0' (maxima for lambda > 0, minima for lambda < 0). ``q = 1`` has
its own complete table.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field

from .errors import DomainError


class Linfty(str, enum.Enum):
    GLOBAL_VANISH = "GlobalVanish"
    GLOBAL_STEADY = "GlobalNontrivialSteady"
    GLOBAL_EXISTENCE = "GlobalExistence"
    TWO_SIDED = "TwoSidedEverywhere"
    ONE_SIDED_MIN = "OneSidedDiscreteMin"
    ONE_SIDED_MAX = "OneSidedDiscreteMax"
    NOT_COVERED = "NotCovered"

    @property
    def is_global(self) -> bool:
        return self.value.startswith("Global")

    @property
    def is_blowup(self) -> bool:
        return self in (Linfty.TWO_SIDED, Linfty.ONE_SIDED_MAX, Linfty.ONE_SIDED_MIN)


class LpOutcome(str, enum.Enum):
    FINITE = "FiniteAtTstar"
    DIVERGES = "Diverges"
    UNKNOWN = "Unknown"


class TStar(str, enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class LinftyVerdict:
    outcome: Linfty
    provenance: str
    caveats: tuple[str, ...] = ()

    @property
    def t_star(self) -> TStar:
        if self.outcome.is_global:
            return TStar.INFINITE
        if self.outcome.is_blowup:
            return TStar.FINITE
        return TStar.UNKNOWN


@dataclass(frozen=True)
class LpVerdict:
    p: float
    outcome: LpOutcome
    provenance: str


@dataclass
class Verdict:
    """Full verdict as serialised by the CLI."""

    lam: float
    q: float
    linfty: LinftyVerdict
    lp: list[LpVerdict] = field(default_factory=list)
    extra_caveats: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "q": self.q,
            "linfty": self.linfty.outcome.value,
            "t_star": self.linfty.t_star.value,
            "lp": [{"p": v.p, "outcome": v.outcome.value} for v in self.lp],
            "provenance": [self.linfty.provenance, *[f"p={v.p}: {v.provenance}" for v in self.lp]],
            "caveats": [*self.linfty.caveats, *self.extra_caveats],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _check(lam, q):
    for name, v in (("lambda", lam), ("q", q)):
        if not isinstance(v, (int, float)) or math.isnan(v) or math.isinf(v):
            raise DomainError(f"{name} must be a finite real")
    if q <= 0:
        raise DomainError("q must be positive")


def _close(a, b):
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def resonance_caveat(lam: float, q: float) -> str | None:
    """Caveat when q = 1/n or lambda = q/(1 - n q) for a positive integer n."""
    if q < 1:
        inv = 1.0 / q
        if _close(inv, round(inv)):
            return f"q = 1/{round(inv)}: result relies on a continuity argument"
        for n in range(1, int(inv) + 2):
            den = 1 - n * q
            if den != 0 and _close(lam, q / den):
                return f"lambda = q/(1 - {n} q): result relies on a continuity argument"
    return None


def _q1_linfty(lam: float) -> LinftyVerdict:
    src = "q=1 table"
    if lam > 0.5:
        return LinftyVerdict(Linfty.TWO_SIDED, src)
    if lam == 0.5:
        return LinftyVerdict(Linfty.GLOBAL_STEADY, src)
    if lam > 0:
        return LinftyVerdict(Linfty.GLOBAL_VANISH, src)
    if lam == 0:
        return LinftyVerdict(Linfty.GLOBAL_EXISTENCE, src, ("lambda = 0: global, long-time profile not stated",))
    return LinftyVerdict(Linfty.ONE_SIDED_MIN, src)


def classify_linfty(lam: float, q: float) -> LinftyVerdict:
    """L-infinity behaviour of u_x for parameter lambda and local exponent q."""
    _check(lam, q)
    if _close(q, 1.0):
        return _q1_linfty(lam)
    cav = resonance_caveat(lam, q)
    cavs = (cav,) if cav else ()
    if lam == 0:
        return LinftyVerdict(Linfty.GLOBAL_EXISTENCE, "lambda>=0, small lambda", ("lambda = 0: global, long-time profile not stated",))
    if lam > 0:
        src = "lambda>0 table"
        if lam < q / 2:
            return LinftyVerdict(Linfty.GLOBAL_VANISH, src + ": 0<lambda<q/2")
        if _close(lam, q / 2):
            return LinftyVerdict(Linfty.GLOBAL_STEADY, src + ": lambda=q/2")
        if lam < q and not _close(lam, q):
            return LinftyVerdict(Linfty.TWO_SIDED, src + ": q/2<lambda<q")
        if q < 0.5:
            if lam > 1:
                return LinftyVerdict(Linfty.ONE_SIDED_MAX, src + ": 0<q<1/2, lambda>1", cavs)
            if 1 / 3 < q and 0.5 < lam < q / (1 - q):
                return LinftyVerdict(Linfty.TWO_SIDED, src + ": 1/3<q<1/2, 1/2<lambda<q/(1-q)", cavs)
        elif 0.5 < q < 1:
            thr = q / (1 - q)
            if q < lam < thr and not _close(lam, q) and not _close(lam, thr):
                return LinftyVerdict(Linfty.TWO_SIDED, src + ": 1/2<q<1, q<lambda<q/(1-q)")
            if lam > thr and not _close(lam, thr):
                return LinftyVerdict(Linfty.ONE_SIDED_MAX, src + ": 1/2<q<1, lambda>q/(1-q)", cavs)
        elif q > 1:
            if lam > q and not _close(lam, q):
                return LinftyVerdict(Linfty.TWO_SIDED, src + ": lambda>q>1")
        return LinftyVerdict(Linfty.NOT_COVERED, src + ": gap", ("parameter pair not covered by the tables",))
    src = "lambda<0 table"
    if lam >= -1:
        return LinftyVerdict(Linfty.ONE_SIDED_MIN, src + ": -1<=lambda<0")
    if q < 1:
        return LinftyVerdict(Linfty.ONE_SIDED_MIN, src + ": lambda<-1, 0<q<1", cavs)
    thr = q / (1 - q)
    if _close(lam, thr):
        return LinftyVerdict(Linfty.NOT_COVERED, src + ": lambda=q/(1-q)", ("boundary line not covered",))
    if lam > thr:
        return LinftyVerdict(Linfty.ONE_SIDED_MIN, src + ": q>1, q/(1-q)<lambda<-1")
    return LinftyVerdict(
        Linfty.TWO_SIDED, src + ": q>1, lambda<q/(1-q)", ("divergence is to +infinity away from the minima",)
    )


def _q1_lp(lam: float, p: float) -> LpVerdict:
    src = "q=1 table"
    if 0 <= lam <= 0.5:
        return LpVerdict(p, LpOutcome.FINITE, src + ": global, all p")
    if lam > 0.5:
        if p > 1:
            return LpVerdict(p, LpOutcome.DIVERGES, src + ": lambda>1/2, p>1")
        return LpVerdict(p, LpOutcome.UNKNOWN, src + ": lambda>1/2, p=1 not stated")
    if p == 1 or lam > 1 / (1 - p):
        return LpVerdict(p, LpOutcome.FINITE, src + ": lambda<0, p=1 or 1/(1-p)<lambda")
    if p >= 2 and lam <= -1:
        return LpVerdict(p, LpOutcome.DIVERGES, src + ": energy diverges for lambda<=-1")
    if p >= 3 and lam <= -0.5:
        return LpVerdict(p, LpOutcome.DIVERGES, src + ": L3 diverges for lambda<=-1/2")
    return LpVerdict(p, LpOutcome.UNKNOWN, src)


def classify_lp(lam: float, q: float, p: float) -> LpVerdict:
    """Whether ||u_x||_p stays finite up to t* (or for all time when global)."""
    _check(lam, q)
    if not p >= 1 or math.isinf(p):
        raise DomainError("p must be a finite real >= 1")
    if _close(q, 1.0):
        return _q1_lp(lam, p)
    if lam >= 0:
        src = "lambda>=0 Lp table"
        if lam <= q / 2 or _close(lam, q / 2):
            return LpVerdict(p, LpOutcome.FINITE, src + ": global, all p")
        if p > 1:
            div = (
                (lam < q and not _close(lam, q))
                or (q > 1 and lam > q)
                or (1 / 3 < q < 0.5 and 0.5 < lam < q / (1 - q))
                or (0.5 < q < 1 and q < lam < q / (1 - q))
            )
            if div:
                return LpVerdict(p, LpOutcome.DIVERGES, src + ": two-sided blow-up, p>1")
        if q < 0.5 and p < 2 and lam > 1 / (2 - p):
            return LpVerdict(p, LpOutcome.FINITE, src + ": 0<q<1/2, lambda>1/(2-p), 1<=p<2")
        if 0.5 < q < 1 and p < 1 / q and lam > q / (1 - p * q):
            return LpVerdict(p, LpOutcome.FINITE, src + ": 1/2<q<1, lambda>q/(1-pq), 1<=p<1/q")
        return LpVerdict(p, LpOutcome.UNKNOWN, src)
    src = "lambda<0 Lp table"
    if q < 0.5:
        if p <= 2 or 1 / (2 - p) < lam:
            return LpVerdict(p, LpOutcome.FINITE, src + ": 0<q<1/2")
    elif 0.5 < q < 1:
        if p <= 1 / q or q / (1 - p * q) < lam:
            return LpVerdict(p, LpOutcome.FINITE, src + ": 1/2<q<1")
    elif q > 1:
        if q / (1 - p * q) < lam:
            return LpVerdict(p, LpOutcome.FINITE, src + ": q>1, q/(1-pq)<lambda")
        if p > 1 and lam < q / (p * (1 - q)):
            return LpVerdict(p, LpOutcome.DIVERGES, src + ": q>1, lambda<q/(p(1-q))")
    return LpVerdict(p, LpOutcome.UNKNOWN, src)


@dataclass(frozen=True)
class EnergyVerdict:
    energy: str  # diverges | finite
    energy_rate: str  # +inf | zero | bounded
    l3: str  # diverges | finite
    cubic_integral: str  # +inf | -inf | bounded
    provenance: str = "q=1 energy table"


def classify_energy(lam: float, q: float = 1.0) -> EnergyVerdict:
    """Energy E = ||u_x||_2^2, its rate and the L3 norm for q = 1 data."""
    _check(lam, q)
    if not _close(q, 1.0):
        raise DomainError("energy table is stated for q = 1 only")
    energy = "diverges" if (lam <= -1 or lam > 0.5) else "finite"
    if lam == -0.5:
        rate = "zero"
    elif lam < -0.5 or lam > 0.5:
        rate = "+inf"
    else:
        rate = "bounded"
    l3 = "diverges" if (lam <= -0.5 or lam > 0.5) else "finite"
    if lam > 0.5:
        cubic = "+inf"
    elif lam <= -0.5:
        cubic = "-inf"
    else:
        cubic = "bounded"
    return EnergyVerdict(energy, rate, l3, cubic)


def classify_smooth(lam: float, k: int) -> LinftyVerdict:
    """Smooth data whose first nonvanishing derivative at the extremum has odd order k."""
    if not isinstance(k, int) or k < 1 or k % 2 == 0:
        raise DomainError("k must be a positive odd integer")
    if not math.isfinite(lam):
        raise DomainError("lambda must be finite")
    src = f"smooth data, k={k}"
    top = (1 + k) / 2
    if lam == 0:
        return LinftyVerdict(Linfty.GLOBAL_EXISTENCE, src, ("lambda = 0: global, long-time profile not stated",))
    if 0 < lam < top:
        return LinftyVerdict(Linfty.GLOBAL_VANISH, src + ": 0<lambda<(1+k)/2")
    if lam == top:
        return LinftyVerdict(Linfty.GLOBAL_STEADY, src + ": lambda=(1+k)/2")
    if lam > top:
        return LinftyVerdict(Linfty.TWO_SIDED, src + ": lambda>(1+k)/2")
    low = -(1 + k) / k
    if low < lam < 0:
        return LinftyVerdict(Linfty.ONE_SIDED_MIN, src + ": -(1+k)/k<lambda<0")
    if lam < low:
        return LinftyVerdict(Linfty.TWO_SIDED, src + ": lambda<-(1+k)/k")
    return LinftyVerdict(Linfty.NOT_COVERED, src + ": lambda=-(1+k)/k", ("boundary line not covered",))


def euler_spf(q: float, dim: int) -> str:
    """Outcome for stagnation-point-form Euler flow (lambda = 1/(dim - 1)).

    Returns "blowup", "global" or "unknown".
    """
    if dim not in (2, 3):
        raise DomainError("dim must be 2 or 3")
    if q <= 0:
        raise DomainError("q must be positive")
    if dim == 2:
        if 0.5 < q < 2:
            return "blowup"
        return "global" if q >= 2 else "unknown"
    if 0.5 < q < 1:
        return "blowup"
    return "global" if q >= 1 else "unknown"


def verdict(lam: float, q: float, ps=(1.0, 2.0, 3.0)) -> Verdict:
    v = Verdict(lam, q, classify_linfty(lam, q), [classify_lp(lam, q, p) for p in ps])
    if lam == -0.5:
        v.extra_caveats.append("lambda = -1/2: dE/dt = 0, the energy is conserved")
    for dim, lv in ((2, 1.0), (3, 0.5)):
        if lam == lv:
            v.extra_caveats.append(f"{dim}D Euler stagnation-point form: {euler_spf(q, dim)}")
    return v
