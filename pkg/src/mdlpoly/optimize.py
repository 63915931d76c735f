"""Membership, functional maximisation and threshold scans over MDL_N.

The vertex sets involved are far too large to list for the dependent class,
so every LP here is solved by column generation: the restricted master is an
exact simplex over the columns seen so far, and pricing maximises the
dual-weighted objective strategy by strategy with the greedy box-simplex
rule.  Pricing is screened in floating point over all strategies at once
(numpy) and confirmed exactly for every strategy that could possibly
improve, so optimality and infeasibility certificates are exact.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, ColumnSimplex, FarkasCertificate, LpOutcome, lp_solve
from .model import (
    BlockPoint,
    IndexCodec,
    InputDistribution,
    Scenario,
    _digits,
    coarse_grain,
    coarse_map,
    deterministic_point,
)
from .numerics import FieldScalar, QuadraticSurd, to_exact
from .polytope import ExtremalProfile, MdlBounds, Vertex, extremal_profile, pattern_distribution
from .strategies import (
    CoarseContributes,
    ResponseFilter,
    Strategy,
    StrategyTable,
    decode_strategy,
    format_strategy,
    independent_strategy,
    k_max,
    mismatch_spectrum,
    normalise_class,
)

__all__ = [
    "LinearFunctional",
    "LpOutcome",
    "FarkasCertificate",
    "GreedyResult",
    "MaxResult",
    "ThresholdResult",
    "ZeroPatternResult",
    "FamilyBound",
    "lp_solve",
    "greedy_box_simplex",
    "membership",
    "mismatch_h_bound",
    "maximize_functional",
    "maximize_functional_uniform",
    "threshold_scan",
    "zero_pattern_feasibility",
    "family_lower_bound",
    "certificate_json",
    "farkas_max_over_vertices",
]


# ---------------------------------------------------------------------------
# functionals


@dataclass(frozen=True, eq=False)
class LinearFunctional:
    """f(P) = sum_i c_i P_i on the single-run (N = 1) or a block space."""

    scenario: Scenario
    coefficients: dict

    @property
    def space(self) -> str:
        return "single" if self.scenario.N == 1 else "block"

    @classmethod
    def from_labels(cls, scenario: Scenario, values: dict) -> "LinearFunctional":
        codec = IndexCodec(scenario)
        return cls(scenario, {codec.coordinate(k): v for k, v in values.items()})

    def dense(self) -> list:
        out = [Fraction(0)] * self.scenario.size
        for i, v in self.coefficients.items():
            out[i] = to_exact(v)
        return out

    def pullback(self, block: Scenario) -> "LinearFunctional":
        """The block functional f(c_N(P)), for a single-run functional f."""
        if self.scenario.N != 1 or block.single() != self.scenario:
            raise ValueError("pullback needs a single-run functional and a matching block scenario")
        if block.N == 1:
            return self
        f = self.dense()
        inv = Fraction(1, block.N)
        coeffs = {}
        for idx, cs in enumerate(coarse_map(block)):
            acc = 0
            for c in cs:
                if f[c] != 0:
                    acc = acc + f[c]
            if acc != 0:
                coeffs[idx] = acc * inv
        return LinearFunctional(block, coeffs)

    def on(self, scenario: Scenario) -> "LinearFunctional":
        if scenario == self.scenario:
            return self
        return self.pullback(scenario)

    def evaluate(self, p: BlockPoint):
        f = self.on(p.scenario)
        acc = 0
        for i, c in f.coefficients.items():
            v = p.entries[i]
            if not v.is_zero():
                acc = acc + c * to_exact(v)
        return acc

    def __add__(self, other: "LinearFunctional") -> "LinearFunctional":
        if other.scenario != self.scenario:
            raise ValueError("functionals live on different spaces")
        out = dict(self.coefficients)
        for k, v in other.coefficients.items():
            out[k] = out.get(k, 0) + v
        return LinearFunctional(self.scenario, out)

    def scaled(self, s) -> "LinearFunctional":
        return LinearFunctional(self.scenario, {k: v * s for k, v in self.coefficients.items()})


# ---------------------------------------------------------------------------
# greedy box simplex


@dataclass
class GreedyResult:
    assignment: tuple
    value: object
    top: tuple
    remainder: int | None


def _greedy_exact(w: Sequence, avail: Sequence[int], bounds: MdlBounds, prof: ExtremalProfile,
                  secondary: Sequence | None = None) -> GreedyResult | None:
    need = prof.m + (0 if prof.integral else 1)
    if len(avail) < need:
        return None
    if secondary is None:
        order = sorted(avail, key=lambda k: (-w[k], k))
    else:
        order = sorted(avail, key=lambda k: (-w[k], -secondary[k], k))
    L = to_exact(bounds.L)
    H = to_exact(bounds.H)
    P = [L] * len(w)
    top = tuple(sorted(order[:prof.m]))
    for k in top:
        P[k] = H
    rem = None
    if not prof.integral:
        rem = order[prof.m]
        P[rem] = to_exact(prof.remainder)
    val = 0
    for k in range(len(w)):
        if P[k] != 0 and w[k] != 0:
            val = val + w[k] * P[k]
    return GreedyResult(tuple(P), val, top, rem)


def greedy_box_simplex(coefficients: Sequence, H, L=0, available: Iterable[int] | None = None,
                       secondary: Sequence | None = None) -> GreedyResult:
    """max sum c_k P_k  s.t.  sum P = 1,  L <= P_k <= H  (P_k = 0 off ``available``).

    Sorts coefficients in decreasing order (ties by index) and fills greedily.
    """
    n = len(coefficients)
    bounds = MdlBounds(L, H)
    scen_n = n
    if not bounds.L * scen_n <= 1 <= bounds.H * scen_n:
        raise ValueError(f"bound H={H} infeasible for {n} inputs")
    prof = _profile_n(bounds, n)
    avail = list(range(n)) if available is None else sorted(available)
    if bounds.L.sign() > 0 and len(avail) != n:
        raise ValueError("forced zeros need L = 0")
    w = [to_exact(c) for c in coefficients]
    res = _greedy_exact(w, avail, bounds, prof, secondary)
    if res is None:
        raise ValueError("not enough available inputs for bound H")
    return res


def _profile_n(bounds: MdlBounds, n: int) -> ExtremalProfile:
    # extremal_profile only needs n_inputs; a 1-run scenario with n = dX*dY would do for n = 4,
    # but arbitrary n is handled here directly.
    L, H = bounds.L, bounds.H
    if H == L:
        return ExtremalProfile(n, 0, None, 1, n)
    ratio = (1 - L * n) / (H - L)
    m = math.floor(float(ratio))
    while FieldScalar(m) > ratio:
        m -= 1
    while FieldScalar(m + 1) <= ratio:
        m += 1
    m = min(m, n)
    if FieldScalar(m) == ratio:
        return ExtremalProfile(m, n - m, None, math.comb(n, m), n)
    rem = 1 - H * m - L * (n - m - 1)
    return ExtremalProfile(m, n - m - 1, rem, 0, n)


def _greedy_float(W: np.ndarray, avail: np.ndarray | None, bounds: MdlBounds, prof: ExtremalProfile) -> np.ndarray:
    """Row-wise greedy values (floating point screen)."""
    H = float(bounds.H)
    L = float(bounds.L)
    G = W if avail is None else np.where(avail, W, -np.inf)
    srt = -np.sort(-G, axis=1)
    with np.errstate(invalid="ignore"):
        val = (H - L) * srt[:, :prof.m].sum(axis=1) if prof.m else np.zeros(len(W))
        if L:
            val = val + L * W.sum(axis=1)
        if not prof.integral and prof.m < W.shape[1]:
            val = val + (float(prof.remainder) - L) * srt[:, prof.m]
    return np.nan_to_num(val, nan=-np.inf)


# ---------------------------------------------------------------------------
# vertex families for column generation


def _zero_mask_from(target: BlockPoint | None, size: int) -> np.ndarray:
    if target is None:
        return np.zeros(size, dtype=bool)
    return np.array(target.zero_mask(), dtype=bool)


class _Family:
    """Compatible vertices of one strategy class, seen through a row map.

    ``rows``: "full" (block coordinates), "coarse" (single-run coordinates),
    "inputs" (block input marginals) or "norm" (one normalisation row).
    ``row_of`` maps a coordinate (or input) to its LP row, -1 if dropped.
    """

    def __init__(self, scenario: Scenario, cls: str, bounds: MdlBounds, zero_mask=None, space: str = "full",
                 rows: str = "full", row_of=None, support_filter=None, objective: LinearFunctional | None = None,
                 table: StrategyTable | None = None):
        bounds.check(scenario)
        self.scenario = scenario
        self.bounds = bounds
        self.prof = extremal_profile(bounds, scenario)
        table = table or StrategyTable(scenario, cls)
        n = scenario.n_inputs
        full = table.full_coords()
        coarse = table.coarse_coords() if (space == "coarse" or rows == "coarse") else None
        if zero_mask is None:
            mism = np.zeros((len(table), n), dtype=bool)
        elif space == "full":
            mism = np.asarray(zero_mask, dtype=bool)[full]
        else:
            mism = np.asarray(zero_mask, dtype=bool)[coarse].any(axis=2)
        ks = mism.sum(axis=1)
        need = self.prof.m + (0 if self.prof.integral else 1)
        keep = (ks == 0) if bounds.L.sign() > 0 else (n - ks >= need)
        if support_filter is not None:
            keep &= support_filter.mask(table, mism)
        self.table = table.subset(keep)
        self.full = full[keep]
        self.coarse = coarse[keep] if coarse is not None else None
        self.avail = ~mism[keep]
        self.rows = rows
        self.row_of = None if row_of is None else np.asarray(row_of, dtype=np.int64)
        self.n_rows = {"norm": 1, "inputs": n}.get(rows, None if row_of is None else int(self.row_of.max()) + 1)
        self.N = scenario.N
        self.invN = Fraction(1, scenario.N)
        if objective is not None:
            fb = objective.on(scenario)
            self.obj_exact = fb.dense()
            self.obj_float = np.array([float(v) for v in self.obj_exact])
        else:
            self.obj_exact = None
            self.obj_float = None

    def __len__(self):
        return len(self.table)

    # dual-weighted per-input coefficients
    def dual_float(self, y: np.ndarray) -> np.ndarray:
        S, n = self.full.shape
        if self.rows == "norm":
            return np.full((S, n), y[0])
        if self.rows == "inputs":
            return np.broadcast_to(y[None, :], (S, n))
        yext = np.append(y, 0.0)
        if self.rows == "full":
            return yext[self.row_of[self.full]]
        return yext[self.row_of[self.coarse]].sum(axis=2) / self.N

    def dual_exact(self, i: int, y: Sequence) -> list:
        n = self.scenario.n_inputs
        if self.rows == "norm":
            return [y[0]] * n
        if self.rows == "inputs":
            return list(y)
        if self.rows == "full":
            out = []
            for k in range(n):
                r = self.row_of[self.full[i, k]]
                out.append(y[r] if r >= 0 else Fraction(0))
            return out
        out = []
        for k in range(n):
            acc = 0
            for j in range(self.N):
                r = self.row_of[self.coarse[i, k, j]]
                if r >= 0 and y[r] != 0:
                    acc = acc + y[r]
            out.append(acc * self.invN if acc != 0 else Fraction(0))
        return out

    def obj_row_float(self) -> np.ndarray:
        return self.obj_float[self.full]

    def obj_exact_row(self, i: int) -> list:
        return [self.obj_exact[c] for c in self.full[i]]

    def available(self, i: int) -> list[int]:
        return [int(k) for k in np.flatnonzero(self.avail[i])]

    def column(self, i: int, P: Sequence) -> dict:
        col: dict = {}
        if self.rows == "norm":
            return {0: 1}
        for k, p in enumerate(P):
            if p == 0:
                continue
            if self.rows == "inputs":
                col[k] = col.get(k, 0) + p
            elif self.rows == "full":
                r = int(self.row_of[self.full[i, k]])
                if r >= 0:
                    col[r] = col.get(r, 0) + p
            else:
                for j in range(self.N):
                    r = int(self.row_of[self.coarse[i, k, j]])
                    if r >= 0:
                        col[r] = col.get(r, 0) + p * self.invN
        return col

    def cost(self, i: int, P: Sequence):
        """Minimisation cost of a column (negated objective)."""
        if self.obj_exact is None:
            return 0
        acc = 0
        for k, p in enumerate(P):
            c = self.obj_exact[self.full[i, k]]
            if p != 0 and c != 0:
                acc = acc + c * p
        return -acc

    def key(self, i: int, g: GreedyResult):
        return (int(self.table.ids[i]), g.top, g.remainder)

    def vertex(self, key) -> Vertex:
        sid, top, rem = key
        st = decode_strategy(self.scenario, self.table.cls, sid)
        return Vertex(st, pattern_distribution(self.bounds, self.prof, self.scenario, top, rem))

    def oracle(self, limit: int = 40):
        """Pricing callback for ColumnSimplex."""

        def price(y, phase):
            yf = np.array([float(v) for v in y])
            W = np.array(self.dual_float(yf), dtype=float)
            if phase == 2 and self.obj_float is not None:
                W = W + self.obj_row_float()
            V = _greedy_float(W, self.avail, self.bounds, self.prof)
            scale = float(np.abs(W).max()) if W.size else 0.0
            delta = 1e-9 * (1.0 + scale)
            cand = np.flatnonzero(V > -delta)
            if cand.size == 0:
                return []
            order = cand[np.lexsort((self.table.ids[cand], -V[cand]))]
            out = []
            for i in order:
                i = int(i)
                w = self.dual_exact(i, y)
                if phase == 2 and self.obj_exact is not None:
                    w = [a + b for a, b in zip(w, self.obj_exact_row(i))]
                g = _greedy_exact(w, self.available(i), self.bounds, self.prof)
                if g is None or not g.value > 0:
                    continue
                out.append((self.key(i, g), self.column(i, g.assignment), self.cost(i, g.assignment)))
                if len(out) >= limit:
                    break
            return out

        return price


# ---------------------------------------------------------------------------
# membership


def _space_scenario(target: BlockPoint, space: str, scenario: Scenario | None) -> Scenario:
    if space == "full":
        return target.scenario
    if space == "coarse":
        if target.scenario.N != 1:
            raise ValueError("coarse membership takes a single-run target")
        return scenario or target.scenario.with_runs(2)
    raise ValueError(f"unknown space {space!r}")


def membership(target: BlockPoint, bounds: MdlBounds, cls: str, space: str = "full",
               scenario: Scenario | None = None, lift: bool = True, verify: bool = True) -> LpOutcome:
    """Is ``target`` (or, for space="coarse", its preimage under c_N) in MDL_N?

    On success the outcome carries exact convex weights over vertices; on
    failure it carries a separating functional f with f(target) > 0 >= f(v)
    for every compatible vertex (every vertex at all when ``lift`` is set).
    """
    cls = normalise_class(cls)
    scen = _space_scenario(target, space, scenario)
    zm = _zero_mask_from(target, target.scenario.size)
    support = [i for i in range(target.scenario.size) if not zm[i]]
    row_of = np.full(target.scenario.size, -1, dtype=np.int64)
    for r, c in enumerate(support):
        row_of[c] = r
    fam = _Family(scen, cls, bounds, zm, space=space, rows=space, row_of=row_of)
    lp = ColumnSimplex([to_exact(target.entries[c]) for c in support])
    status, _ = lp.solve(fam.oracle(), objective=False)
    if status == OPTIMAL:
        weights = lp.primal()
        verts = {k: fam.vertex(k) for k in weights}
        out = LpOutcome(OPTIMAL, value=Fraction(0), weights=weights, vertices=verts, iterations=lp.iterations)
        if verify and not reconstructs(out, target, space):
            raise AssertionError("membership weights do not reconstruct the target")
        return out
    y = lp.original_duals(lp.duals(1))
    coeffs = {c: y[r] for r, c in enumerate(support) if y[r] != 0}
    tval = sum((y[r] * to_exact(target.entries[c]) for r, c in enumerate(support)), Fraction(0))
    cert = FarkasCertificate(coeffs, Fraction(0), tval)
    if lift:
        cert = _lift_certificate(cert, target, bounds, cls, space, scen)
    return LpOutcome(INFEASIBLE, farkas=cert, iterations=lp.iterations)


def reconstructs(outcome: LpOutcome, target: BlockPoint, space: str = "full") -> bool:
    """Independent check that the weights rebuild the target exactly."""
    acc = [Fraction(0)] * target.scenario.size
    total = Fraction(0)
    for key, w in outcome.weights.items():
        v = outcome.vertices[key]
        p = v.point
        if space == "coarse":
            p = coarse_grain(p)
        total = total + w
        for i in p.support():
            acc[i] = acc[i] + w * to_exact(p.entries[i])
    return total == 1 and all(a == to_exact(t) for a, t in zip(acc, target.entries))


def farkas_max_over_vertices(coeffs: dict, bounds: MdlBounds, cls: str, scen: Scenario, space: str):
    """Exact max of the functional over every vertex of the class (no pruning)."""
    table = StrategyTable(scen, cls)
    target_size = scen.single().size if space == "coarse" else scen.size
    dense = [Fraction(0)] * target_size
    for c, v in coeffs.items():
        dense[c] = to_exact(v)
    f = LinearFunctional(scen.single() if space == "coarse" else scen, {i: v for i, v in enumerate(dense) if v != 0})
    res = maximize_functional(f, bounds, cls, scen, table=table)
    return res.value


def _lift_certificate(cert: FarkasCertificate, target: BlockPoint, bounds: MdlBounds, cls: str,
                      space: str, scen: Scenario) -> FarkasCertificate:
    zeros = [i for i, v in enumerate(target.entries) if v.is_zero()]
    if not zeros:
        return cert
    M = Fraction(1)
    for v in cert.coefficients.values():
        M = max(M, abs(Fraction(float(v)).limit_denominator(1)) + 1)
    for _ in range(200):
        coeffs = dict(cert.coefficients)
        for z in zeros:
            coeffs[z] = -M
        top = farkas_max_over_vertices(coeffs, bounds, cls, scen, space)
        if not top > 0:
            return FarkasCertificate(coeffs, Fraction(0), cert.target_value)
        M *= 2
    raise RuntimeError("could not lift Farkas certificate to a valid inequality")


def certificate_json(outcome: LpOutcome) -> dict:
    """JSON-ready certificate: convex weights or separating functional."""
    if outcome.status == OPTIMAL:
        rows = []
        for key in sorted(outcome.weights, key=lambda k: (k[0], k[1], -1 if k[2] is None else k[2])):
            v = outcome.vertices[key]
            sc = v.strategy.scenario
            codec = IndexCodec(sc)
            assign = {}
            for k, p in enumerate(v.inputs.entries):
                if not p.is_zero():
                    x, y = codec.input_pair(k)
                    lab = "".join(map(str, _digits(x, sc.dX, sc.N))) + "".join(map(str, _digits(y, sc.dY, sc.N)))
                    assign[lab] = str(p)
            rows.append({"strategy": format_strategy(v.strategy), "strategy_id": key[0],
                         "assignment": assign, "weight": str(outcome.weights[key])})
        return {"status": outcome.status, "vertices": rows}
    if outcome.status == INFEASIBLE and outcome.farkas is not None:
        return {"status": outcome.status,
                "functional": {str(k): str(v) for k, v in sorted(outcome.farkas.coefficients.items())},
                "bound": str(outcome.farkas.bound),
                "target_value": str(outcome.farkas.target_value)}
    return {"status": outcome.status}


# ---------------------------------------------------------------------------
# mismatch bounds and thresholds


def mismatch_h_bound(target: BlockPoint, cls: str, space: str = "full", support_filter=None,
                     scenario: Scenario | None = None):
    """1/(n - k0): below this h^N the target cannot be a member."""
    scen = _space_scenario(target, space, scenario)
    rep = mismatch_spectrum(scen, cls, target, space, support_filter)
    if rep.k_min is None or rep.k_min >= scen.n_inputs:
        return None
    return Fraction(1, scen.n_inputs - rep.k_min)


def _coordinate_lower_bound(target: BlockPoint, cls: str, space: str, scen: Scenario):
    """max over positive coordinates r of 1/(n - k_r), k_r the least mismatch able to feed r."""
    table = StrategyTable(scen, cls)
    mism = table.mismatch_mask(target, space)
    ks = mism.sum(axis=1)
    n = scen.n_inputs
    worst = Fraction(1, n)
    if space == "full":
        full = table.full_coords()
    else:
        coarse = table.coarse_coords()
    for r in target.support():
        if space == "full":
            hits = ((full == r) & ~mism).any(axis=1)
        else:
            hits = ((coarse == r).any(axis=2) & ~mism).any(axis=1)
        if not hits.any():
            return None
        kr = int(ks[hits].min())
        worst = max(worst, Fraction(1, n - kr))
    return worst


@dataclass
class ThresholdResult:
    exact: Fraction | None
    lower: Fraction | None        # largest probed non-member (or None)
    upper: Fraction | None        # smallest probed member
    probes: list = field(default_factory=list)

    def __str__(self):
        if self.exact is not None:
            return f"h^N = {self.exact}"
        if self.upper is None:
            return "never a member"
        return f"h^N in ({self.lower}, {self.upper}]"


def threshold_scan(target: BlockPoint, cls: str, space: str = "full", scenario: Scenario | None = None,
                   width=Fraction(1, 10 ** 6)) -> ThresholdResult:
    """Least H = h^N with membership, by probing critical values 1/n then bisecting."""
    scen = _space_scenario(target, space, scenario)
    n = scen.n_inputs
    lb = _coordinate_lower_bound(target, cls, space, scen)
    if lb is None:
        return ThresholdResult(None, None, None, [])
    probes = []

    def member(H):
        ok = membership(target, MdlBounds(0, H), cls, space, scen, lift=False).member
        probes.append((H, ok))
        return ok

    crit = sorted(Fraction(1, j) for j in range(1, n + 1) if Fraction(1, j) >= lb)
    prev = None
    hit = None
    for H in crit:
        if member(H):
            hit = H
            break
        prev = H
    if hit is None:
        return ThresholdResult(None, prev, None, probes)
    if hit == lb:
        return ThresholdResult(hit, None, hit, probes)
    lo, hi = prev, hit
    while hi - lo > width:
        mid = (lo + hi) / 2
        if member(mid):
            hi = mid
        else:
            lo = mid
    return ThresholdResult(None, lo, hi, probes)


# ---------------------------------------------------------------------------
# functional maximisation


@dataclass
class MaxResult:
    value: object
    strategy: Strategy | None
    inputs: InputDistribution | None
    secondary: object = None
    greedy: GreedyResult | None = None

    @property
    def vertex(self) -> Vertex:
        return Vertex(self.strategy, self.inputs)


def _max_chunk(args):
    scen, cls, lo, hi, fb_exact, bounds, sec_exact = args
    table = StrategyTable(scen, cls, lo, hi)
    return _max_over_table(table, scen, fb_exact, bounds, sec_exact)


def _max_over_table(table: StrategyTable, scen: Scenario, fb_exact, bounds: MdlBounds, sec_exact):
    prof = extremal_profile(bounds, scen)
    fb_float = np.array([float(v) for v in fb_exact])
    full = table.full_coords()
    W = fb_float[full]
    V = _greedy_float(W, None, bounds, prof)
    if V.size == 0:
        return None
    scale = float(np.abs(W).max()) if W.size else 0.0
    delta = 1e-9 * (1.0 + scale)
    vmax = V.max()
    cand = np.flatnonzero(V >= vmax - 2 * delta)
    cand = cand[np.argsort(table.ids[cand], kind="stable")]
    best = None
    n = scen.n_inputs
    allin = list(range(n))
    for i in cand:
        w = [fb_exact[c] for c in full[i]]
        g = _greedy_exact(w, allin, bounds, prof, sec_exact)
        sval = None
        if sec_exact is not None:
            sval = 0
            for k in range(n):
                if g.assignment[k] != 0:
                    sval = sval + sec_exact[k] * g.assignment[k]
        sid = int(table.ids[i])
        if best is None or g.value > best[0] or (g.value == best[0] and sec_exact is not None and sval > best[1]):
            best = (g.value, sval, sid, g)
    return best


def _secondary_inputs(scen: Scenario, secondary: str | None):
    if secondary is None:
        return None
    if secondary == "pxy00":
        # coarse P_XY(00): average over runs of the indicator x_j = y_j = 0
        codec = IndexCodec(scen)
        out = []
        for k in range(scen.n_inputs):
            x, y = codec.input_pair(k)
            xd, yd = _digits(x, scen.dX, scen.N), _digits(y, scen.dY, scen.N)
            out.append(Fraction(sum(1 for j in range(scen.N) if xd[j] == 0 and yd[j] == 0), scen.N))
        return out
    raise ValueError(f"unknown secondary objective {secondary!r}")


def maximize_functional(f: LinearFunctional, bounds: MdlBounds, cls: str, scenario: Scenario,
                        secondary: str | None = None, workers: int = 1, table: StrategyTable | None = None) -> MaxResult:
    """B_N: the maximum of f over MDL_N with free inputs.

    Each deterministic strategy turns f into coefficients over the input
    distribution, which the greedy rule maximises exactly.  Ties go to the
    larger ``secondary`` value (if any) and then to the smaller strategy id.
    """
    cls = normalise_class(cls)
    bounds.check(scenario)
    fb = f.on(scenario).dense()
    sec = _secondary_inputs(scenario, secondary)
    if table is not None:
        parts = [_max_over_table(table, scenario, fb, bounds, sec)]
    else:
        from .strategies import _chunks, strategy_count
        jobs = [(scenario, cls, lo, hi, fb, bounds, sec) for lo, hi in _chunks(strategy_count(scenario, cls), workers)]
        if workers > 1:
            with ProcessPoolExecutor(workers) as ex:
                parts = list(ex.map(_max_chunk, jobs))
        else:
            parts = [_max_chunk(j) for j in jobs]
    best = None
    for p in parts:
        if p is None:
            continue
        if best is None or p[0] > best[0] or (p[0] == best[0] and sec is not None and p[1] > best[1]) \
                or (p[0] == best[0] and (sec is None or p[1] == best[1]) and p[2] < best[2]):
            best = p
    val, sval, sid, g = best
    st = decode_strategy(scenario, cls, sid)
    return MaxResult(val, st, InputDistribution(scenario, g.assignment, check=False), sval, g)


def maximize_functional_uniform(f: LinearFunctional, bounds: MdlBounds, cls: str, scenario: Scenario,
                                uniform_value=None) -> LpOutcome:
    """max f over MDL_N intersected with the uniform slice P(x y) = 1/n."""
    cls = normalise_class(cls)
    n = scenario.n_inputs
    u = Fraction(1, n) if uniform_value is None else uniform_value
    fam = _Family(scenario, cls, bounds, None, rows="inputs", objective=f)
    lp = ColumnSimplex([u] * n)
    status, val = lp.solve(fam.oracle(), objective=True)
    if status != OPTIMAL:
        return LpOutcome(status, iterations=lp.iterations)
    weights = lp.primal()
    verts = {k: fam.vertex(k) for k in weights}
    return LpOutcome(OPTIMAL, value=-val, weights=weights, vertices=verts,
                     duals=lp.original_duals(lp.duals(2)), iterations=lp.iterations)


# ---------------------------------------------------------------------------
# zero patterns


@dataclass
class ZeroPatternResult:
    feasible: bool
    optimum: object
    outcome: LpOutcome


def zero_pattern_feasibility(zeros: Sequence[str], positive: str, bounds: MdlBounds, cls: str,
                             scenario: Scenario | None = None, uniform: bool = False) -> ZeroPatternResult:
    """Can an MDL_N point vanish on the coarse ``zeros`` yet be positive on ``positive``?

    Solved as: maximise coarse P(positive) subject to the zeros; the answer
    is yes exactly when the optimum is strictly positive.
    """
    cls = normalise_class(cls)
    scen = scenario or Scenario(N=2)
    single = scen.single()
    codec = IndexCodec(single)
    zm = np.zeros(single.size, dtype=bool)
    for z in zeros:
        zm[codec.coordinate(z)] = True
    obj = LinearFunctional.from_labels(single, {positive: 1})
    if uniform:
        fam = _Family(scen, cls, bounds, zm, space="coarse", rows="inputs", objective=obj)
        b = [Fraction(1, scen.n_inputs)] * scen.n_inputs
    else:
        fam = _Family(scen, cls, bounds, zm, space="coarse", rows="norm", objective=obj)
        b = [Fraction(1)]
    if len(fam) == 0:
        return ZeroPatternResult(False, None, LpOutcome(INFEASIBLE))
    lp = ColumnSimplex(b)
    status, val = lp.solve(fam.oracle(), objective=True)
    if status != OPTIMAL:
        return ZeroPatternResult(False, None, LpOutcome(status, iterations=lp.iterations))
    weights = lp.primal()
    out = LpOutcome(OPTIMAL, value=-val, weights=weights, vertices={k: fam.vertex(k) for k in weights},
                    iterations=lp.iterations)
    return ZeroPatternResult(-val > 0, -val, out)


# ---------------------------------------------------------------------------
# family lower bound


@dataclass
class FamilyBound:
    N: int
    k: int
    h0_power: Fraction            # h0**N
    p0000: Fraction               # coarse P(0000) of the family point
    strategy: Strategy
    inputs: InputDistribution

    @property
    def h0(self):
        """h0 exactly when it is a square root (N <= 2), else a float."""
        if self.N == 1:
            return self.h0_power
        if self.N == 2:
            return QuadraticSurd.sqrt(self.h0_power)
        return float(self.h0_power) ** (1.0 / self.N)

    def value_at(self, h):
        """(1 - 3h) k / (3N), the Putz value of the family point with l = 1 - 3h."""
        return (1 - 3 * h) * self.p0000

    @property
    def value(self):
        return self.value_at(self.h0)

    @property
    def point(self) -> BlockPoint:
        s = self.strategy
        return deterministic_point(s.scenario, s.alice, s.bob, self.inputs)


def family_lower_bound(N: int, k: int, dX: int = 2) -> FamilyBound:
    """Output 1 on runs 1..N-k, 0 on the last k; drop inputs with x_j y_j = 11 there."""
    if not 0 <= k <= N:
        raise ValueError(f"need 0 <= k <= N, got k={k}, N={N}")
    scen = Scenario(N=N)
    ones = [1, 1]
    zeros = [0, 0]
    runs = [ones] * (N - k) + [zeros] * k
    st = independent_strategy(scen, runs, runs)
    codec = IndexCodec(scen)
    H = Fraction(1, 3 ** k * 4 ** (N - k))
    vals = []
    for kk in range(scen.n_inputs):
        x, y = codec.input_pair(kk)
        xd, yd = _digits(x, 2, N), _digits(y, 2, N)
        bad = any(xd[j] == 1 and yd[j] == 1 for j in range(N - k, N))
        vals.append(Fraction(0) if bad else H)
    inputs = InputDistribution(scen, tuple(vals))
    return FamilyBound(N, k, H, Fraction(k, 3 * N), st, inputs)
