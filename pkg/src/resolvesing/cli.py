"""Command-line front end.

Exit statuses: 0 success, 2 unreadable or invalid input, 3 year or
computation budget exhausted, 4 certificate or check failure.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from . import __version__
from .geometry import (
    Chart,
    CenterSpec,
    ResolutionTree,
    StraighteningFailed,
    InadmissibleCenter,
    blow_up_component,
    nc_check,
    snc_check,
    straighten_center,
)
from .invariant import Bounds, NotOnVariety, WitnessNotFound, invariant_at_point
from .ideals import BudgetExceeded
from .polyring import Poly, parse_poly, parse_rational
from .resolver import (
    ResolverConfig,
    chart_history,
    resolve_hypersurface,
    resolve_ideal_to_nc,
    verify_tree,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_FAILED = 4

CONFIG_KEYS = ("max_years", "coef_bound", "kmax", "prime", "sample_height", "samples_per_chart", "dot_width")


class InputError(ValueError):
    pass


@dataclass
class ProblemFile:
    vars: tuple
    k: int
    l: int
    mode: str = "hypersurface"
    polynomials: List[Poly] = field(default_factory=list)
    divisors: List[tuple] = field(default_factory=list)
    center: List[Poly] = field(default_factory=list)
    config: Dict[str, object] = field(default_factory=dict)
    prime: Optional[int] = None

    @property
    def polynomial(self):
        return self.polynomials[0]


def _split_vars(spec):
    """``"x,y|z"`` or a list; returns (vars, k or None)."""
    if isinstance(spec, str):
        left, bar, right = spec.partition("|")
        lv = [v.strip() for v in left.split(",") if v.strip()]
        rv = [v.strip() for v in right.split(",") if v.strip()]
        return tuple(lv + rv), (len(lv) if bar else None)
    if isinstance(spec, list) and all(isinstance(v, str) for v in spec):
        return tuple(spec), None
    raise InputError("vars must be a string like 'x,y|z' or a list of names")


def parse_problem(obj) -> ProblemFile:
    if not isinstance(obj, dict):
        raise InputError("problem file must hold a JSON object")
    if "vars" not in obj:
        raise InputError("missing 'vars'")
    vars, k = _split_vars(obj["vars"])
    if not vars:
        raise InputError("no variables")
    if len(set(vars)) != len(vars):
        raise InputError("variable names must be unique")
    if "k" in obj:
        k = int(obj["k"])
    l = int(obj["l"]) if "l" in obj else None
    if k is None:
        k = len(vars) - (l or 0)
    if l is None:
        l = len(vars) - k
    if k < 0 or l < 0 or k + l != len(vars):
        raise InputError(f"k + l must equal the number of variables ({len(vars)})")

    def P(text):
        try:
            return parse_poly(str(text), vars)
        except ValueError as exc:
            raise InputError(f"cannot parse {text!r}: {exc}") from None

    mode = obj.get("mode")
    if "ideal" in obj:
        polys = [P(t) for t in obj["ideal"]]
        mode = mode or "ideal"
    elif "polynomial" in obj:
        polys = [P(obj["polynomial"])]
        mode = mode or "hypersurface"
    else:
        polys = []
        mode = mode or "hypersurface"
    if mode not in ("hypersurface", "ideal"):
        raise InputError(f"unknown mode {mode!r}")
    divs = []
    raw = obj.get("divisors", [])
    if isinstance(raw, dict):
        raw = sorted(raw.items())
    for i, d in enumerate(raw):
        if isinstance(d, (list, tuple)):
            divs.append((str(d[0]), P(d[1])))
        else:
            divs.append((f"D{i + 1}", P(d)))
    center = [P(t) for t in obj.get("center", [])]
    config = dict(obj.get("config", {}))
    unknown = set(config) - set(CONFIG_KEYS)
    if unknown:
        raise InputError(f"unknown config keys {sorted(unknown)}")
    prime = obj.get("prime", config.pop("prime", None))
    return ProblemFile(vars, k, l, mode, polys, divs, center, config, None if prime is None else int(prime))


def load_problem(path) -> ProblemFile:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    return parse_problem(obj)


def _settings(prob: ProblemFile, args) -> dict:
    # flag > file > default
    out = {"max_years": 32, "coef_bound": 3, "kmax": 64, "sample_height": 8, "samples_per_chart": 6, "dot_width": 40}
    out.update(prob.config)
    out["prime"] = prob.prime
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            out[key] = v
    return out


def _config(prob, args, mode=None) -> ResolverConfig:
    s = _settings(prob, args)
    try:
        return ResolverConfig(
            max_years=int(s["max_years"]),
            coef_bound=int(s["coef_bound"]),
            kmax=int(s["kmax"]),
            mode=mode or prob.mode,
            prime=None if s["prime"] is None else int(s["prime"]),
            sample_height=int(s["sample_height"]),
            samples_per_chart=int(s["samples_per_chart"]),
            k=prob.k,
            l=prob.l,
        )
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _parse_point(text, n):
    try:
        pt = tuple(parse_rational(t.strip()) for t in text.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad point {text!r}: {exc}") from None
    if len(pt) != n:
        raise InputError(f"point needs {n} coordinates")
    return pt


# ---------------------------------------------------------------------------
# commands


def cmd_resolve(args) -> int:
    prob = load_problem(args.problem)
    if not prob.polynomials:
        raise InputError("resolve needs 'polynomial' or 'ideal'")
    config = _config(prob, args)
    width = int(_settings(prob, args)["dot_width"])
    t0 = time.time()
    try:
        if prob.mode == "hypersurface":
            if len(prob.polynomials) != 1:
                raise InputError("hypersurface mode takes one polynomial")
            tree, cert = resolve_hypersurface(prob.polynomial, prob.k, prob.l, config)
        else:
            tree, cert = resolve_ideal_to_nc(prob.polynomials, prob.k, prob.l, config)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = args.out_dir or "."
    os.makedirs(out, exist_ok=True)
    _write(os.path.join(out, "tree.json"), tree.dumps())
    _write(os.path.join(out, "certificate.json"), _dump(cert.to_json()))
    _write(os.path.join(out, "tree.dot"), tree.to_dot(width))
    meta = {
        "version": __version__,
        "python": platform.python_version(),
        "argv": sys.argv[1:],
        "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(t0)),
        "seconds": round(time.time() - t0, 3),
    }
    _write(os.path.join(out, "run.json"), _dump(meta))
    print(f"status: {tree.status}")
    print(f"years: {tree.year}  blowups: {tree.blowup_count()}  charts: {len(tree.charts)}")
    for y in tree.years:
        print(f"  year {y.year}: {y.word}" + (f" J={','.join(y.word.J)}" if y.word.J else ""))
    if tree.error:
        print(f"error: {tree.error}")
    for f in cert.failures:
        print(f"failed: {f}")
    if tree.status == "budget_exceeded":
        return EXIT_BUDGET
    return EXIT_OK if cert.ok else EXIT_FAILED


def cmd_invariant(args) -> int:
    prob = load_problem(args.problem)
    config = _config(prob, args)
    if args.tree:
        try:
            with open(args.tree, encoding="utf-8") as fh:
                tree = ResolutionTree.from_json(json.load(fh))
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"cannot read tree {args.tree}: {exc}") from None
        cid = args.chart or "c0"
        if cid not in tree.charts:
            raise InputError(f"no chart {cid!r} in tree")
        chart = tree.charts[cid]
        gens = tree.transforms[cid]
        history = chart_history(tree, cid)
        births = {d: r.birth for d, r in tree.divisors.items()}
    else:
        if args.chart not in (None, "c0"):
            raise InputError("--chart needs --tree")
        if not prob.polynomials:
            raise InputError("invariant needs 'polynomial' or 'ideal'")
        chart = Chart("c0", 0, prob.vars)
        gens = prob.polynomials
        history, births = (), {}
    pt = _parse_point(args.at, len(chart.vars))
    try:
        w = invariant_at_point(gens, chart, history, pt, births, config.bounds)
    except NotOnVariety:
        print(_dump({"point": [str(x) for x in pt], "order": 0, "word": None}), end="")
        print("order 0: the point is not on the variety")
        return EXIT_INPUT
    except (BudgetExceeded, WitnessNotFound) as exc:
        print(f"budget: {exc}")
        return EXIT_BUDGET
    except ValueError as exc:
        raise InputError(str(exc)) from None
    print(str(w))
    print(_dump({"point": [str(x) for x in pt], "chart": chart.id, **w.to_json()}), end="")
    return EXIT_OK


def cmd_blowup(args) -> int:
    prob = load_problem(args.problem)
    center = prob.center
    if args.center:
        center = [parse_poly(t, prob.vars) for t in args.center.split(",")]
    if not center:
        raise InputError("blowup needs a center ('center' in the file or --center)")
    bound = int(_settings(prob, args)["coef_bound"])
    chart = Chart("c0", 0, prob.vars, divisors=tuple(prob.divisors))
    try:
        st = straighten_center(chart, center, bound)
    except StraighteningFailed as exc:
        print(f"budget: {exc}")
        return EXIT_BUDGET
    except (InadmissibleCenter, ValueError) as exc:
        print(f"failed: {exc}")
        return EXIT_FAILED
    new = "E"
    while any(d == new for d, _ in prob.divisors):
        new += "'"
    kids = blow_up_component(chart, CenterSpec("c0", tuple(center), st), 1, new)
    from .geometry import strict_transform, weak_transform_ideal

    charts = []
    for kid in kids:
        theta = kid.divisor(new) or Poly.const(kid.vars, 1)
        entry = kid.to_json()
        if prob.polynomials and prob.mode == "hypersurface":
            g, d = strict_transform(prob.polynomial, kid, theta)
            entry["strict_transform"] = str(g)
            entry["exceptional_power"] = d
        elif prob.polynomials:
            I, mu = weak_transform_ideal(prob.polynomials, kid, theta)
            entry["weak_transform"] = [str(g) for g in I.generators]
            entry["exceptional_power"] = mu
        entry["transition_text"] = [str(p) for p in kid.transition]
        charts.append(entry)
    report = {"center": [str(p) for p in center], "straightening": st.to_json(), "charts": charts}
    text = _dump(report)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        _write(os.path.join(args.out_dir, "blowup.json"), text)
    print(text, end="")
    return EXIT_OK


def cmd_check(args) -> int:
    if args.kind == "verify":
        try:
            with open(args.problem, encoding="utf-8") as fh:
                tree = ResolutionTree.from_json(json.load(fh))
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"cannot read tree {args.problem}: {exc}") from None
        cfg = ResolverConfig(
            max_years=max(1, args.max_years or 32),
            coef_bound=args.coef_bound or 3,
            kmax=args.kmax or 64,
            mode=tree.mode,
            prime=args.prime,
            sample_height=args.sample_height or 8,
        )
        cert = verify_tree(tree, cfg)
        print(_dump(cert.to_json()), end="")
        return EXIT_OK if cert.ok else EXIT_FAILED
    prob = load_problem(args.problem)
    chart = Chart("c0", 0, prob.vars, divisors=tuple(prob.divisors))
    if args.kind == "nc":
        if len(prob.polynomials) != 1:
            raise InputError("nc check takes one polynomial")
        exps = nc_check(prob.polynomial, chart)
        print(_dump({"normal_crossings": exps is not None, "exponents": exps}), end="")
        return EXIT_OK if exps is not None else EXIT_FAILED
    ok = snc_check(prob.polynomials[:1], chart)
    print(_dump({"snc": ok}), end="")
    return EXIT_OK if ok else EXIT_FAILED


# ---------------------------------------------------------------------------


def _common(p):
    p.add_argument("--max-years", type=int, dest="max_years")
    p.add_argument("--coef-bound", type=int, dest="coef_bound")
    p.add_argument("--kmax", type=int)
    p.add_argument("--prime", type=int)
    p.add_argument("--sample-height", type=int, dest="sample_height")
    p.add_argument("--out-dir", dest="out_dir")


def build_parser():
    ap = argparse.ArgumentParser(prog="resolvesing", description="Embedded resolution of hypersurfaces and ideals.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("resolve", help="run the resolution and write tree.json, certificate.json, tree.dot")
    p.add_argument("problem")
    _common(p)
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("invariant", help="invariant word at a rational point")
    p.add_argument("problem")
    p.add_argument("--at", required=True, help="comma separated coordinates, e.g. 0,1/2")
    p.add_argument("--chart", help="chart id (needs --tree)")
    p.add_argument("--tree", help="tree.json from a previous run")
    _common(p)
    p.set_defaults(func=cmd_invariant)

    p = sub.add_parser("blowup", help="blow up one smooth center and print the charts")
    p.add_argument("problem")
    p.add_argument("--center", help="comma separated generators")
    _common(p)
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("check", help="normal crossings checks and certificate verification")
    p.add_argument("kind", choices=["nc", "snc", "verify"])
    p.add_argument("problem", help="problem file (nc, snc) or tree.json (verify)")
    _common(p)
    p.set_defaults(func=cmd_check)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
