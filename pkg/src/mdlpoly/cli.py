"""Command line entry point: ``python3 -m mdlpoly <command> ...``.

Exit codes: 0 success, 1 non-member / violation found, 2 usage error,
3 resource budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .model import (
    BlockPoint,
    IndexCodec,
    InputDistribution,
    Scenario,
    coarse_grain,
    deterministic_point,
    load_point,
    point_to_json,
)
from .numerics import FieldScalar, field_decimal, parse_scalar
from .optimize import (
    certificate_json,
    family_lower_bound,
    maximize_functional,
    maximize_functional_uniform,
    membership,
    threshold_scan,
)
from .polytope import MdlBounds, count_vertices, extremal_profile
from .reference import builtin_point, chsh_functional, putz_functional
from .strategies import (
    CoarseContributes,
    EnumerationTooLarge,
    ResponseFilter,
    mismatch_count,
    mismatch_spectrum,
    normalise_class,
    parse_strategy,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
WORKERS_ENV = "MDLPOLY_WORKERS"
DEFAULT_DECOMPOSITION = "pr2_decomposition.txt"


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# appendix-style decompositions


@dataclass
class DecompositionReport:
    ok: bool
    weight_sum: Fraction
    errors: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)   # coordinate label -> target - sum

    def lines(self) -> list[str]:
        out = [f"weight sum: {self.weight_sum}"]
        out += self.errors
        for lab, r in self.residuals.items():
            out.append(f"residual at {lab}: {r}")
        out.append("decomposition matches target exactly" if self.ok else "decomposition does NOT match target")
        return out


def parse_decomposition(text: str, scenario: Scenario = Scenario(N=2)):
    """Rows (line number, weight, strategy) from "w ; a(00),... ; b(00),..." lines."""
    rows, errors = [], []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(";")]
        try:
            if len(parts) != 3:
                raise ValueError("expected three ';'-separated fields")
            w = Fraction(parts[0])
            st = parse_strategy(f"{parts[1]} ; {parts[2]}", scenario)
        except ValueError as exc:
            errors.append(f"row {no}: cannot parse ({exc})")
            continue
        rows.append((no, w, st))
    return rows, errors


def verify_decomposition(text: str, target: BlockPoint, bounds: MdlBounds) -> DecompositionReport:
    """Rebuild each row's unique compatible vertex and compare the mixture with ``target``."""
    sc = target.scenario
    rows, errors = parse_decomposition(text, sc)
    prof = extremal_profile(bounds, sc)
    n = sc.n_inputs
    codec = IndexCodec(sc)
    acc = [Fraction(0)] * sc.size
    wsum = Fraction(0)
    for no, w, st in rows:
        wsum += w
        rep = mismatch_count(st, target)
        free = n - rep.k
        if not (prof.integral and free == prof.m and bounds.L.sign() == 0):
            errors.append(f"row {no}: {rep.k}-mismatch strategy has no unique compatible assignment at H = {bounds.H}")
            continue
        zero = []
        for k in range(n):
            x, y = codec.input_pair(k)
            zero.append(target.entries[codec.flat(st.alice[x], st.bob[y], x, y)].is_zero())
        inputs = InputDistribution(sc, tuple(Fraction(0) if z else bounds.H.as_fraction() for z in zero))
        p = deterministic_point(sc, st.alice, st.bob, inputs)
        for i in p.support():
            acc[i] += w * p.entries[i].as_fraction()
    if wsum != 1:
        errors.append(f"weights sum to {wsum}, not 1")
    residuals = {}
    for i, (a, t) in enumerate(zip(acc, target.entries)):
        d = t - a
        if not d.is_zero():
            residuals["".join(codec.label(i))] = d
    return DecompositionReport(not errors and not residuals, wsum, errors, residuals)


def default_decomposition_text() -> str:
    return resources.files("mdlpoly").joinpath("data", DEFAULT_DECOMPOSITION).read_text()


# ---------------------------------------------------------------------------
# argument handling


def _exact(text: str) -> FieldScalar:
    try:
        return parse_scalar(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def load_any_point(src: str) -> BlockPoint:
    if src.startswith("builtin:") or src in ("pr", "hardy", "pr2", "hardy2", "uniform") or src.startswith("ld:"):
        return builtin_point(src)
    path = Path(src)
    if not path.exists():
        raise UsageError(f"no such point file or builtin: {src}")
    return load_point(path)


def bounds_from(args, N: int) -> MdlBounds:
    given = [v for v in (args.h, args.h2, args.H) if v is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --h, --h2, --H")
    if args.h is not None:
        H = _exact(args.h) ** N
    elif args.h2 is not None:
        if N != 2:
            raise UsageError("--h2 only applies to N = 2")
        H = _exact(args.h2)
    else:
        H = _exact(args.H)
    L = _exact(args.L) if args.L is not None else FieldScalar(0)
    return MdlBounds(L, H)


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    return int(os.environ.get(WORKERS_ENV, "1"))


def _emit(args, payload: str):
    if getattr(args, "output", None):
        Path(args.output).write_text(payload if payload.endswith("\n") else payload + "\n")
    else:
        print(payload)


def _block_scenario(args, target: BlockPoint) -> Scenario:
    if args.space == "coarse":
        return target.scenario.with_runs(args.N)
    return target.scenario


def _add_common(p, bounds=True, point=True):
    p.add_argument("--class", dest="cls", default="dep", choices=["dep", "indep", "dependent", "independent"])
    p.add_argument("--space", default="full", choices=["full", "coarse"])
    p.add_argument("--N", type=int, default=2, help="runs per block for coarse queries")
    if bounds:
        g = p.add_argument_group("bounds (exact strings such as 1/10)")
        g.add_argument("--h", help="per-run bound h; H = h^N")
        g.add_argument("--h2", help="h^2 directly (N = 2)")
        g.add_argument("--H", help="block bound h^N directly")
        g.add_argument("--L", help="lower bound on P(x y) (default 0)")
    if point:
        p.add_argument("--point", default="builtin:pr2", help="builtin:<name>, ld:<strategy> or JSON file")
    p.add_argument("--output", "-o")
    p.add_argument("--workers", type=int)
    p.add_argument("--digits", type=int, default=8)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mdlpoly", description="Block-i.i.d. measurement-dependent locality polytopes")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("membership", help="LP membership with certificate")
    _add_common(p)
    p.add_argument("--no-lift", action="store_true", help="do not lift the Farkas functional to all vertices")

    p = sub.add_parser("threshold", help="least h^N with membership")
    _add_common(p, bounds=False)

    p = sub.add_parser("spectrum", help="k-mismatch histogram")
    _add_common(p, bounds=False)
    p.add_argument("--filter", choices=["none", "zero"], default="none",
                   help="zero: only strategies that can populate the all-zero coordinate")

    p = sub.add_parser("maximize", help="maximise a functional over MDL_N")
    _add_common(p, point=False)
    p.add_argument("--functional", choices=["putz", "chsh"], default="putz")
    p.add_argument("--l", help="Putz l (default 1 - 3h)")
    p.add_argument("--ph", help="Putz h coefficient (default: the per-run bound h)")
    p.add_argument("--uniform", action="store_true", help="restrict to uniform inputs")

    p = sub.add_parser("curve", help="Putz curve CSV")
    _add_common(p, bounds=False, point=False)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--uniform", action="store_true")
    p.add_argument("--hardy-variant", action="store_true", help="add the maximal-Hardy quantum column")
    p.add_argument("--family", action="store_true", help="append family-bound locus rows")
    p.add_argument("--max-family-N", type=int, default=6)

    p = sub.add_parser("count-vertices", help="exact vertex count")
    _add_common(p, point=False)

    p = sub.add_parser("coarse-grain", help="coarse-grain a block point")
    p.add_argument("--point", required=True)
    p.add_argument("--output", "-o")

    p = sub.add_parser("point", help="emit a builtin point as JSON")
    p.add_argument("name")
    p.add_argument("--output", "-o")

    p = sub.add_parser("verify-decomposition", help="check a decomposition file against a target")
    p.add_argument("--file", help="decomposition file (default: shipped PR2 fixture)")
    p.add_argument("--point", default="builtin:pr2")
    g = p.add_argument_group("bounds")
    g.add_argument("--h")
    g.add_argument("--h2")
    g.add_argument("--H")
    g.add_argument("--L")

    p = sub.add_parser("family-bound", help="explicit lower bound on B_N from the k-run family")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--digits", type=int, default=8)
    return ap


# ---------------------------------------------------------------------------
# commands


def cmd_membership(args) -> int:
    target = load_any_point(args.point)
    scen = _block_scenario(args, target)
    bounds = bounds_from(args, scen.N)
    out = membership(target, bounds, args.cls, args.space, scen, lift=not args.no_lift)
    _emit(args, json.dumps(certificate_json(out), indent=1))
    return EXIT_OK if out.member else EXIT_VIOLATION


def cmd_threshold(args) -> int:
    target = load_any_point(args.point)
    scen = _block_scenario(args, target)
    res = threshold_scan(target, args.cls, args.space, scen)
    lab = f"h{scen.N}" if scen.N > 1 else "h"
    if res.exact is not None:
        print(f"{lab} = {res.exact}")
        return EXIT_OK
    if res.upper is None:
        print(f"not a member for any {lab} <= 1")
        return EXIT_VIOLATION
    print(f"{lab} in ({res.lower}, {res.upper}]")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    target = load_any_point(args.point)
    scen = _block_scenario(args, target)
    flt = None
    if args.filter == "zero":
        flt = ResponseFilter.zero_block(scen) if args.space == "full" else CoarseContributes.zero_coordinate()
    rep = mismatch_spectrum(scen, args.cls, target, args.space, flt, workers=_workers(args))
    _emit(args, json.dumps({"k_min": rep.k_min, "strategies": rep.family_size,
                            "spectrum": {str(k): v for k, v in rep.spectrum.items()}}, indent=1))
    return EXIT_OK


def cmd_maximize(args) -> int:
    scen = Scenario(N=args.N)
    bounds = bounds_from(args, scen.N)
    if args.functional == "putz":
        if args.ph is not None:
            ph = _exact(args.ph)
        elif args.h is not None:
            ph = _exact(args.h)
        else:
            raise UsageError("the Putz functional needs --ph or --h")
        l = _exact(args.l) if args.l is not None else 1 - 3 * ph
        f = putz_functional(l.as_fraction() if l.is_rational() else l, ph.as_fraction() if ph.is_rational() else ph)
    else:
        f = chsh_functional()
    cls = normalise_class(args.cls)
    if args.uniform:
        out = maximize_functional_uniform(f, bounds, cls, scen)
        payload = {"value": str(out.value), "decimal": field_decimal(out.value, args.digits), **certificate_json(out)}
    else:
        res = maximize_functional(f, bounds, cls, scen, workers=_workers(args))
        payload = {"value": str(res.value), "decimal": field_decimal(res.value, args.digits),
                   "strategy": str(res.strategy), "strategy_id": res.strategy.id,
                   "inputs": [str(v) for v in res.inputs.entries]}
    _emit(args, json.dumps(payload, indent=1))
    return EXIT_OK


def cmd_curve(args) -> int:
    from .curves import default_grid, putz_curve, write_curve_csv

    pts = putz_curve(default_grid(args.points), normalise_class(args.cls), args.N, args.uniform)
    text = write_curve_csv(pts, args.digits, args.hardy_variant)
    if args.family:
        lines = ["", "N,k,h0_power,h0,family_value"]
        for N in range(1, args.max_family_N + 1):
            for k in range(N + 1):
                fb = family_lower_bound(N, k)
                h0 = float(fb.h0)
                lines.append(f"{N},{k},{fb.h0_power},{h0:.{args.digits}f},{(1 - 3 * h0) * float(fb.p0000):.{args.digits}f}")
        text += "\n".join(lines) + "\n"
    _emit(args, text.rstrip("\n"))
    return EXIT_OK


def cmd_count(args) -> int:
    scen = Scenario(N=args.N)
    bounds = bounds_from(args, scen.N)
    prof = extremal_profile(bounds, scen)
    total = count_vertices(bounds, args.cls, scen)
    _emit(args, json.dumps({"m": prof.m, "assignments": prof.count, "vertices": total,
                            "remainder": None if prof.remainder is None else str(prof.remainder)}, indent=1))
    return EXIT_OK


def cmd_coarse(args) -> int:
    p = load_any_point(args.point)
    _emit(args, json.dumps(point_to_json(coarse_grain(p)), indent=1))
    return EXIT_OK


def cmd_point(args) -> int:
    _emit(args, json.dumps(point_to_json(load_any_point(args.name)), indent=1))
    return EXIT_OK


def cmd_verify(args) -> int:
    target = load_any_point(args.point)
    if all(v is None for v in (args.h, args.h2, args.H)):
        args.h2 = "1/10"
    bounds = bounds_from(args, target.scenario.N)
    text = Path(args.file).read_text() if args.file else default_decomposition_text()
    rep = verify_decomposition(text, target, bounds)
    print("\n".join(rep.lines()))
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def cmd_family(args) -> int:
    try:
        fb = family_lower_bound(args.N, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    h0 = float(fb.h0)
    print(f"h0^{fb.N} = {fb.h0_power}")
    print(f"P(0000) = {fb.p0000}")
    print(f"value = (1 - 3 h0) * {fb.p0000} ~ {(1 - 3 * h0) * float(fb.p0000):.{args.digits}f}")
    print(f"strategy: {fb.strategy}")
    return EXIT_OK


COMMANDS = {
    "membership": cmd_membership,
    "threshold": cmd_threshold,
    "spectrum": cmd_spectrum,
    "maximize": cmd_maximize,
    "curve": cmd_curve,
    "count-vertices": cmd_count,
    "coarse-grain": cmd_coarse,
    "point": cmd_point,
    "verify-decomposition": cmd_verify,
    "family-bound": cmd_family,
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "cls", None):
        args.cls = normalise_class(args.cls)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EnumerationTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
