"""Vertices of the measurement-dependent-locality polytope.

A vertex is a deterministic strategy joined with an extremal input
distribution: each input probability sits at the lower bound L or the upper
bound H, except possibly a single remainder input that absorbs what is left
of the normalisation.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator

import numpy as np

from .model import BlockPoint, IndexCodec, InputDistribution, Scenario, deterministic_point
from .numerics import FieldScalar
from .strategies import (
    CoarseContributes,
    ResponseFilter,
    Strategy,
    StrategyTable,
    normalise_class,
    strategy_count,
)

__all__ = [
    "MdlBounds",
    "ExtremalProfile",
    "Vertex",
    "extremal_profile",
    "assignment_patterns",
    "enumerate_assignments",
    "vertex_point",
    "enumerate_compatible_vertices",
    "count_vertices",
    "write_vertex_cache",
    "read_vertex_cache",
]


@dataclass(frozen=True)
class MdlBounds:
    """L <= P(x y) <= H for every block input."""

    L: FieldScalar
    H: FieldScalar

    def __post_init__(self):
        L, H = FieldScalar.coerce(self.L), FieldScalar.coerce(self.H)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "H", H)
        if L.sign() < 0 or H < L:
            raise ValueError(f"need 0 <= L <= H, got L={L}, H={H}")

    @classmethod
    def from_h(cls, h, N: int, l=0) -> "MdlBounds":
        """Per-run bounds l, h raised to the N-th power."""
        return cls(FieldScalar.coerce(l) ** N, FieldScalar.coerce(h) ** N)

    def feasible(self, scenario: Scenario) -> bool:
        n = scenario.n_inputs
        return self.L * n <= 1 <= self.H * n

    def check(self, scenario: Scenario) -> None:
        if not self.feasible(scenario):
            n = scenario.n_inputs
            raise ValueError(f"bounds L={self.L}, H={self.H} admit no input distribution over {n} inputs")


@dataclass(frozen=True)
class ExtremalProfile:
    m: int                      # inputs at H
    count_L: int                # inputs at L
    remainder: FieldScalar | None
    count: int                  # number of distinct assignments
    n: int

    @property
    def integral(self) -> bool:
        return self.remainder is None


def _floor(q: FieldScalar) -> int:
    f = math.floor(float(q))
    while FieldScalar(f) > q:
        f -= 1
    while FieldScalar(f + 1) <= q:
        f += 1
    return f


def extremal_profile(bounds: MdlBounds, scenario: Scenario) -> ExtremalProfile:
    bounds.check(scenario)
    n = scenario.n_inputs
    L, H = bounds.L, bounds.H
    if H == L:
        return ExtremalProfile(n, 0, None, 1, n)
    ratio = (1 - L * n) / (H - L)
    m = _floor(ratio)
    if FieldScalar(m) == ratio:
        return ExtremalProfile(m, n - m, None, math.comb(n, m), n)
    rem = 1 - H * m - L * (n - m - 1)
    count = math.factorial(n) // (math.factorial(m) * math.factorial(n - m - 1))
    return ExtremalProfile(m, n - m - 1, rem, count, n)


def assignment_patterns(profile: ExtremalProfile, available=None) -> Iterator[tuple[tuple[int, ...], int | None]]:
    """(inputs at H, remainder input) pairs, restricted to ``available`` inputs.

    Restricting to the available inputs keeps every pattern distinct, so no
    deduplication pass is needed.
    """
    pool = list(range(profile.n)) if available is None else sorted(available)
    for top in combinations(pool, profile.m):
        if profile.remainder is None:
            yield top, None
            continue
        used = set(top)
        for r in pool:
            if r not in used:
                yield top, r


def pattern_distribution(bounds: MdlBounds, profile: ExtremalProfile, scenario: Scenario, top, rem) -> InputDistribution:
    vals = [bounds.L] * profile.n
    for k in top:
        vals[k] = bounds.H
    if rem is not None:
        vals[rem] = profile.remainder
    return InputDistribution(scenario, tuple(vals), check=False)


def enumerate_assignments(bounds: MdlBounds, scenario: Scenario, budget: int | None = None) -> Iterator[InputDistribution]:
    prof = extremal_profile(bounds, scenario)
    if budget is not None and prof.count > budget:
        raise ValueError(f"{prof.count} assignments exceed budget {budget}")
    for top, rem in assignment_patterns(prof):
        yield pattern_distribution(bounds, prof, scenario, top, rem)


@dataclass(frozen=True)
class Vertex:
    strategy: Strategy
    inputs: InputDistribution

    @property
    def point(self) -> BlockPoint:
        return deterministic_point(self.strategy.scenario, self.strategy.alice, self.strategy.bob, self.inputs)


def vertex_point(s: Strategy, inputs: InputDistribution) -> Vertex:
    return Vertex(s, inputs)


def _compatible(table: StrategyTable, target, space, bounds, support_filter):
    mism = table.mismatch_mask(target, space)
    keep = np.ones(len(table), dtype=bool)
    if bounds.L.sign() > 0:
        keep &= ~mism.any(axis=1)
    if support_filter is not None:
        keep &= support_filter.mask(table, mism)
    return keep, mism


def enumerate_compatible_vertices(bounds: MdlBounds, cls: str, target: BlockPoint, space: str = "full",
                                  scenario: Scenario | None = None, support_filter=None,
                                  table: StrategyTable | None = None) -> Iterator[Vertex]:
    """Vertices whose support avoids every zero of ``target``.

    With ``space="coarse"`` the target is a single-run point and the block
    scenario must be given (or implied by ``table``).
    """
    if scenario is None:
        scenario = table.scenario if table is not None else target.scenario
    table = table or StrategyTable(scenario, cls)
    prof = extremal_profile(bounds, scenario)
    keep, mism = _compatible(table, target, space, bounds, support_filter)
    for i in np.flatnonzero(keep):
        avail = [k for k in range(scenario.n_inputs) if not mism[i, k]]
        if len(avail) < prof.m + (0 if prof.integral else 1) and bounds.L.sign() == 0:
            continue
        if bounds.L.sign() == 0:
            pats = assignment_patterns(prof, avail)
        else:
            pats = assignment_patterns(prof)
        st = table.strategy(int(i))
        for top, rem in pats:
            yield Vertex(st, pattern_distribution(bounds, prof, scenario, top, rem))


def count_vertices(bounds: MdlBounds, cls: str, scenario: Scenario) -> int:
    """Vertices of the full polytope (no target restriction)."""
    return strategy_count(scenario, normalise_class(cls)) * extremal_profile(bounds, scenario).count


# ---------------------------------------------------------------------------
# binary cache of compatible vertices
#
# layout (little endian):
#   magic b"MDLV", u16 version, u8 class (0 dependent, 1 independent),
#   u8 N, u8 dX, u8 dY, u8 dA, u8 dB, u32 record count,
#   u16 length + utf-8 text of H, u16 length + utf-8 text of L,
#   then per record: u64 strategy id, u32 input bitmask at H, i16 remainder input (-1 none)

_MAGIC = b"MDLV"
_VERSION = 1
_HEAD = struct.Struct("<4sHBBBBBBI")
_REC = struct.Struct("<QIh")


def write_vertex_cache(path, bounds: MdlBounds, cls: str, scenario: Scenario, vertices) -> int:
    cls = normalise_class(cls)
    recs = []
    for v in vertices:
        top = 0
        rem = -1
        for k, p in enumerate(v.inputs.entries):
            if p == bounds.H and p != bounds.L:
                top |= 1 << k
            elif p != bounds.L:
                rem = k
        recs.append(_REC.pack(v.strategy.id, top, rem))
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(_MAGIC, _VERSION, 0 if cls == "dependent" else 1, scenario.N,
                            scenario.dX, scenario.dY, scenario.dA, scenario.dB, len(recs)))
        for txt in (str(bounds.H), str(bounds.L)):
            raw = txt.encode()
            fh.write(struct.pack("<H", len(raw)) + raw)
        fh.writelines(recs)
    return len(recs)


def read_vertex_cache(path):
    """Returns (bounds, cls, scenario, [(strategy id, H bitmask, remainder)])."""
    from .numerics import parse_scalar
    from .strategies import DEPENDENT, INDEPENDENT

    with open(path, "rb") as fh:
        data = fh.read()
    magic, ver, c, N, dX, dY, dA, dB, count = _HEAD.unpack_from(data, 0)
    if magic != _MAGIC:
        raise ValueError("not a vertex cache file")
    if ver != _VERSION:
        raise ValueError(f"unsupported vertex cache version {ver}")
    off = _HEAD.size
    texts = []
    for _ in range(2):
        (ln,) = struct.unpack_from("<H", data, off)
        off += 2
        texts.append(data[off:off + ln].decode())
        off += ln
    bounds = MdlBounds(parse_scalar(texts[1]), parse_scalar(texts[0]))
    recs = [_REC.unpack_from(data, off + i * _REC.size) for i in range(count)]
    return bounds, (DEPENDENT if c == 0 else INDEPENDENT), Scenario(dX, dY, dA, dB, N), recs
