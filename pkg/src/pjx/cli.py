"""Command-line interface: ``pjx classify | solve | blowup | example``.

Exit codes: 0 ok, 1 example FAIL, 2 domain error, 3 range error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import blowup_locations, blowup_time
from .classifier import verdict
from .diagnostics import energy, extrema
from .errors import DomainError, NumericalError, OutOfRangeError, PJXError, RangeError
from .profiles import BUILTIN_LAMBDA, builtin, builtin_names, load_profile, profile_from_dict
from .quadrature import QuadratureSpec
from .reproduce import EXAMPLES, run_example
from .solution import EtaTimeMap, SolutionFrame, eta_of_time, lagrangian_to_eulerian

EXIT_OK, EXIT_FAIL, EXIT_DOMAIN, EXIT_RANGE, EXIT_NUMERIC = 0, 1, 2, 3, 4
ETA_GUARD = 1e-12


def threads() -> int:
    try:
        n = int(os.environ.get("PJX_THREADS", "1"))
    except ValueError:
        raise DomainError("PJX_THREADS must be an integer")
    return max(1, n)


def parse_range(text: str) -> list[float]:
    """'a:b:step' (inclusive of b) or a single number, strictly increasing."""
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise DomainError(f"bad sample spec {text!r}")
    if len(vals) == 1:
        return vals
    if len(vals) != 3:
        raise DomainError(f"sample spec must be a or a:b:step, got {text!r}")
    a, b, step = vals
    if not step > 0 or b < a:
        raise DomainError(f"sample spec {text!r} is not increasing")
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    return [round(a + k * step, 12) for k in range(n)]


def _fmt(x) -> str:
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def write_csv(rows: list[dict], columns, meta: dict) -> str:
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={_fmt(v)}" for k, v in meta.items()) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _emit(text: str, out: str | None, name: str | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if name is not None:
        path.mkdir(parents=True, exist_ok=True)
        path = path / name
    path.write_text(text)


def _spec(args) -> QuadratureSpec:
    kw = {}
    if args.tol_abs is not None:
        kw["abs_tol"] = args.tol_abs
    if args.tol_rel is not None:
        kw["rel_tol"] = args.tol_rel
    return QuadratureSpec(**kw)


def _profile_and_lambda(args):
    if (args.builtin is None) == (args.profile_json is None):
        raise DomainError("give exactly one of --builtin or --profile-json")
    lam = args.lam
    if args.builtin is not None:
        prof = builtin(args.builtin)
        if lam is None:
            lam = BUILTIN_LAMBDA.get(args.builtin)
    else:
        src = args.profile_json
        if src.lstrip().startswith("{"):
            data = json.loads(src)
            prof = profile_from_dict(data)
        else:
            data = json.loads(Path(src).read_text())
            prof = load_profile(src)
        if lam is None:
            lam = data.get("lambda")
    if lam is None:
        raise DomainError("--lambda is required for this profile")
    lam = float(lam)
    if lam == 0 or not math.isfinite(lam):
        raise DomainError("lambda must be finite and nonzero")
    return prof, lam


def _meta(args, lam, q, eta_star) -> dict:
    spec = _spec(args)
    return {
        "lambda": lam,
        "q": q,
        "eta_star": eta_star,
        "tol_abs": spec.abs_tol,
        "tol_rel": spec.rel_tol,
        "version": __version__,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_classify(args) -> int:
    if args.q is None or args.lam is None:
        raise DomainError("classify needs --lambda and --q")
    v = verdict(args.lam, args.q, tuple(args.p))
    d = v.to_dict()
    if args.format == "json":
        _emit(dump_json(d), args.out)
    else:
        rows = [
            {"lambda": args.lam, "q": args.q, "linfty": d["linfty"], "t_star": d["t_star"], "p": lp["p"], "lp": lp["outcome"]}
            for lp in d["lp"]
        ]
        meta = {"lambda": args.lam, "q": args.q, "version": __version__}
        _emit(write_csv(rows, ["lambda", "q", "linfty", "t_star", "p", "lp"], meta), args.out)
    return EXIT_OK


def _etas(args, prof, lam, spec) -> list[float]:
    if (args.eta is None) == (args.t is None):
        raise DomainError("give exactly one of --eta or --t")
    es = prof.eta_star(lam)
    if args.eta is not None:
        etas = parse_range(args.eta)
    else:
        ts = parse_range(args.t)
        tmap = EtaTimeMap.build(lam, prof, spec=spec)
        etas = [0.0 if t == 0 else eta_of_time(tmap, t) for t in ts]
    for e in etas:
        if e < 0:
            raise DomainError("eta must be nonnegative")
        if e > es * (1 - ETA_GUARD):
            raise OutOfRangeError(f"eta = {e} is not below eta* = {es}")
    return etas


def cmd_solve(args) -> int:
    spec = _spec(args)
    prof, lam = _profile_and_lambda(args)
    etas = _etas(args, prof, lam, spec)
    n = args.grid

    def frame_rows(eta):
        f = SolutionFrame.at(prof, lam, eta, spec=spec)
        a, x, v, u = lagrangian_to_eulerian(f, n)
        M, m = extrema(f)
        summ = {"eta": eta, "t": f.t, "M": M, "m": m, "E": energy(f)}
        grid = [
            {"eta": eta, "t": f.t, "alpha": a[i], "x": x[i], "u": u[i], "ux": v[i]} for i in range(n)
        ]
        return grid, summ

    nt = threads()
    if nt > 1:
        with ThreadPoolExecutor(max_workers=nt) as ex:
            results = list(ex.map(frame_rows, etas))
    else:
        results = [frame_rows(e) for e in etas]
    meta = _meta(args, lam, prof.q_for_classification(lam), prof.eta_star(lam))
    summary = [s for _, s in results]
    grid = [r for g, _ in results for r in g]
    if args.format == "json":
        body = {"meta": meta, "summary": summary}
        if args.out is not None:
            body["frames"] = grid
        _emit(dump_json(body), args.out, "solve.json" if args.out else None)
        return EXIT_OK
    scols = ["eta", "t", "M", "m", "E"]
    if args.out is None:
        _emit(write_csv(summary, scols, meta), None)
    else:
        _emit(write_csv(grid, ["eta", "t", "alpha", "x", "u", "ux"], meta), args.out, "frames.csv")
        _emit(write_csv(summary, scols, meta), args.out, "summary.csv")
    return EXIT_OK


def blowup_report(prof, lam, spec) -> dict:
    rep = blowup_time(lam, prof, spec=spec)
    d = {
        "profile": prof.name,
        "lambda": lam,
        "q": prof.q_for_classification(lam),
        "eta_star": rep.eta_star,
        "t_star": rep.t_star,
        "method": rep.method,
        "tail_value": rep.tail_value,
        "bracket": list(rep.bracket) if rep.bracket else None,
        "notes": list(rep.notes),
        "locations": [],
    }
    if rep.tail is not None:
        d["tail"] = {
            "finite": rep.tail.finite,
            "exponent": rep.tail.exponent,
            "log_power": rep.tail.log_power,
            "regime": rep.tail.regime,
            "caveats": list(rep.tail.caveats),
        }
    if math.isfinite(rep.t_star):
        d["locations"] = [{"alpha": a, "x": x} for a, x in blowup_locations(lam, prof, spec=spec)]
    return d


def cmd_blowup(args) -> int:
    spec = _spec(args)
    prof, lam = _profile_and_lambda(args)
    d = blowup_report(prof, lam, spec)
    if args.format == "json":
        _emit(dump_json(d), args.out)
    else:
        rows = [{"key": k, "value": json.dumps(_jsonable(v))} for k, v in d.items()]
        _emit(write_csv(rows, ["key", "value"], _meta(args, lam, d["q"], d["eta_star"])), args.out)
    return EXIT_OK


def cmd_example(args) -> int:
    spec = _spec(args)
    res = run_example(args.n, spec=spec)
    if args.out is not None:
        prof = builtin(res.profile)
        es = prof.eta_star(res.lam)
        etas = [es * (1 - j) for j in (1.0, 0.5, 1e-1, 1e-2, 1e-3, 1e-4)]
        rows = []
        for eta in etas:
            f = SolutionFrame.at(prof, res.lam, eta, spec=spec)
            a, x, v, u = lagrangian_to_eulerian(f, args.grid)
            rows += [{"eta": eta, "t": f.t, "alpha": a[i], "x": x[i], "u": u[i], "ux": v[i]} for i in range(len(a))]
        meta = _meta(args, res.lam, res.report["q"], es)
        _emit(write_csv(rows, ["eta", "t", "alpha", "x", "u", "ux"], meta), args.out, "frames.csv")
        _emit(dump_json(res.report), args.out, "report.json")
    else:
        sys.stdout.write(dump_json(res.report))
    print(res.summary_line())
    return EXIT_OK if res.passed else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, default=None)
    common.add_argument("--out", default=None, help="output file (classify, blowup) or directory (solve, example)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--tol-abs", type=float, default=None)
    common.add_argument("--tol-rel", type=float, default=None)

    prof = argparse.ArgumentParser(add_help=False)
    prof.add_argument("--builtin", default=None, help="one of " + ", ".join(builtin_names()))
    prof.add_argument("--profile-json", default=None, help="inline JSON or a path to a JSON file")

    p = argparse.ArgumentParser(prog="pjx", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"pjx {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="classify (lambda, q)")
    c.add_argument("--q", type=float, default=None)
    c.add_argument("--p", type=float, nargs="+", default=[1.0, 2.0, 3.0])
    c.set_defaults(func=cmd_classify, default_format="json")

    s = sub.add_parser("solve", parents=[common, prof], help="sample the exact solution")
    s.add_argument("--eta", default=None, help="a:b:step or a single value")
    s.add_argument("--t", default=None, help="a:b:step or a single value")
    s.add_argument("--grid", type=int, default=201)
    s.set_defaults(func=cmd_solve, default_format="csv")

    b = sub.add_parser("blowup", parents=[common, prof], help="blow-up time and locations")
    b.set_defaults(func=cmd_blowup, default_format="json")

    e = sub.add_parser("example", parents=[common], help="reproduce a worked example")
    e.add_argument("n", help="one of " + ", ".join(EXAMPLES))
    e.add_argument("--grid", type=int, default=201)
    e.set_defaults(func=cmd_example, default_format="json")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    if getattr(args, "grid", 2) < 2:
        print("error: --grid must be at least 2", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        return args.func(args)
    except (DomainError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except RangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except (NumericalError, PJXError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
