"""Local deterministic strategies for blocks of N runs.

Two classes are supported.  A *dependent* strategy maps each block input
x (a string of N settings) to an arbitrary block output a; an *independent*
strategy applies a separate single-run function in every run.

Strategy ids
------------
dependent:   Alice's outputs are packed as base-nA digits, digit ``x`` holding
             a(x), in the low positions; Bob's code is multiplied by nA**nX.
             For N = 2 with binary alphabets that is 2 bits per input and
             Alice in the low 8 bits.
independent: each run's single-run function is the integer sum_x a_j(x) dA**x;
             Alice's run 1 is the lowest digit (base dA**dX), then her later
             runs, then Bob's runs.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .model import BlockPoint, IndexCodec, Scenario, _digits, _undigits
from .numerics import FieldScalar

__all__ = [
    "DEPENDENT",
    "INDEPENDENT",
    "Strategy",
    "StrategyTable",
    "MismatchReport",
    "EnumerationTooLarge",
    "ResponseFilter",
    "CoarseContributes",
    "strategy_count",
    "decode_strategy",
    "encode_strategy",
    "independent_strategy",
    "normalise_class",
    "enumerate_strategies",
    "strategy_response",
    "mismatch_count",
    "coarse_mismatch_count",
    "mismatch_spectrum",
    "k_max",
    "parse_strategy",
    "format_strategy",
]

DEPENDENT = "dependent"
INDEPENDENT = "independent"

ENUMERATION_LIMIT = 1 << 20


class EnumerationTooLarge(RuntimeError):
    def __init__(self, count: int):
        super().__init__(f"enumeration too large: {count} strategies")
        self.count = count


def normalise_class(cls: str) -> str:
    c = cls.lower()
    if c in ("dep", "dependent"):
        return DEPENDENT
    if c in ("indep", "independent"):
        return INDEPENDENT
    raise ValueError(f"unknown strategy class {cls!r}")


def strategy_count(scenario: Scenario, cls: str) -> int:
    cls = normalise_class(cls)
    s = scenario
    if cls == DEPENDENT:
        return s.nA ** s.nX * s.nB ** s.nY
    return (s.dA ** s.dX) ** s.N * (s.dB ** s.dY) ** s.N


@dataclass(frozen=True)
class Strategy:
    """Deterministic block response; ``alice[x]`` is the output index for input x."""

    cls: str
    scenario: Scenario
    alice: tuple[int, ...]
    bob: tuple[int, ...]
    runs: tuple | None = field(default=None, compare=False)

    @property
    def id(self) -> int:
        return encode_strategy(self)

    def response(self, x: int, y: int) -> tuple[int, int]:
        return self.alice[x], self.bob[y]

    def as_dependent(self) -> "Strategy":
        return Strategy(DEPENDENT, self.scenario, self.alice, self.bob)

    def __str__(self):
        return format_strategy(self)


def _expand_runs(scenario: Scenario, fa: Sequence[int], fb: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Block maps from per-run function codes."""
    s = scenario
    alice = []
    for x in range(s.nX):
        xd = _digits(x, s.dX, s.N)
        outs = [_digits(fa[j], s.dA, s.dX)[::-1][xd[j]] for j in range(s.N)]
        alice.append(_undigits(outs, s.dA))
    bob = []
    for y in range(s.nY):
        yd = _digits(y, s.dY, s.N)
        outs = [_digits(fb[j], s.dB, s.dY)[::-1][yd[j]] for j in range(s.N)]
        bob.append(_undigits(outs, s.dB))
    return tuple(alice), tuple(bob)


def decode_strategy(scenario: Scenario, cls: str, sid: int) -> Strategy:
    cls = normalise_class(cls)
    s = scenario
    total = strategy_count(s, cls)
    if not 0 <= sid < total:
        raise ValueError(f"strategy id {sid} out of range [0, {total})")
    if cls == DEPENDENT:
        acount = s.nA ** s.nX
        acode, bcode = sid % acount, sid // acount
        alice = _digits(acode, s.nA, s.nX)[::-1]
        bob = _digits(bcode, s.nB, s.nY)[::-1]
        return Strategy(cls, s, tuple(alice), tuple(bob))
    fa_base = s.dA ** s.dX
    fb_base = s.dB ** s.dY
    acount = fa_base ** s.N
    acode, bcode = sid % acount, sid // acount
    fa = _digits(acode, fa_base, s.N)[::-1]
    fb = _digits(bcode, fb_base, s.N)[::-1]
    alice, bob = _expand_runs(s, fa, fb)
    return Strategy(cls, s, alice, bob, runs=(tuple(fa), tuple(fb)))


def encode_strategy(st: Strategy) -> int:
    s = st.scenario
    if st.cls == DEPENDENT:
        acode = _undigits(st.alice[::-1], s.nA)
        bcode = _undigits(st.bob[::-1], s.nB)
        return acode + bcode * s.nA ** s.nX
    if st.runs is None:
        raise ValueError("independent strategy without per-run maps")
    fa, fb = st.runs
    fa_base = s.dA ** s.dX
    fb_base = s.dB ** s.dY
    return _undigits(fa[::-1], fa_base) + _undigits(fb[::-1], fb_base) * fa_base ** s.N


def independent_strategy(scenario: Scenario, alice_runs: Sequence[Sequence[int]], bob_runs: Sequence[Sequence[int]]) -> Strategy:
    """Build from per-run tables: ``alice_runs[j][x]`` is a_j for x_j = x."""
    s = scenario
    fa = tuple(_undigits(list(r)[::-1], s.dA) for r in alice_runs)
    fb = tuple(_undigits(list(r)[::-1], s.dB) for r in bob_runs)
    alice, bob = _expand_runs(s, fa, fb)
    return Strategy(INDEPENDENT, s, alice, bob, runs=(fa, fb))


def enumerate_strategies(scenario: Scenario, cls: str, lo: int = 0, hi: int | None = None,
                         limit: int = ENUMERATION_LIMIT) -> Iterator[Strategy]:
    """Strategies in increasing id order, optionally restricted to ids [lo, hi)."""
    total = strategy_count(scenario, cls)
    if total > limit:
        raise EnumerationTooLarge(total)
    hi = total if hi is None else min(hi, total)
    for sid in range(lo, hi):
        yield decode_strategy(scenario, cls, sid)


def strategy_response(s: Strategy, x, y) -> tuple[int, int]:
    """Block outputs at block inputs; accepts indices or digit strings."""
    sc = s.scenario
    if isinstance(x, str):
        x = _undigits([int(c) for c in x], sc.dX)
    if isinstance(y, str):
        y = _undigits([int(c) for c in y], sc.dY)
    return s.alice[x], s.bob[y]


def format_strategy(s: Strategy) -> str:
    sc = s.scenario

    def fmt(vals, base):
        return ",".join("".join(map(str, _digits(v, base, sc.N))) for v in vals)

    return f"A: {fmt(s.alice, sc.dA)} | B: {fmt(s.bob, sc.dB)}"


def parse_strategy(text: str, scenario: Scenario | None = None) -> Strategy:
    """Parse ``"A: 00,01,10,01 | B: 01,00,00,00"`` or ``"00,01,10,01 ; 01,00,00,00"``."""
    t = text.replace("A:", "").replace("B:", "")
    sep = "|" if "|" in t else ";"
    parts = [p.strip() for p in t.split(sep)]
    if len(parts) != 2:
        raise ValueError(f"cannot parse strategy {text!r}")
    outs = [[o.strip() for o in p.split(",")] for p in parts]
    N = len(outs[0][0])
    scenario = scenario or Scenario(N=N)
    if len(outs[0]) != scenario.nX or len(outs[1]) != scenario.nY:
        raise ValueError(f"strategy {text!r} does not list every block input")
    alice = tuple(_undigits([int(c) for c in o], scenario.dA) for o in outs[0])
    bob = tuple(_undigits([int(c) for c in o], scenario.dB) for o in outs[1])
    return Strategy(DEPENDENT, scenario, alice, bob)


# ---------------------------------------------------------------------------
# vectorised tables


@lru_cache(maxsize=16)
def _party_tables(scenario: Scenario, cls: str):
    """(alice_table, bob_table) indexed by party code -> block output per input."""
    s = scenario
    if cls == DEPENDENT:
        def table(n_out, n_in):
            codes = np.arange(n_out ** n_in, dtype=np.int64)
            out = np.empty((codes.size, n_in), dtype=np.int32)
            c = codes.copy()
            for x in range(n_in):
                out[:, x] = c % n_out
                c //= n_out
            return out
        return table(s.nA, s.nX), table(s.nB, s.nY)

    def table(d_out, d_in, n_in):
        fbase = d_out ** d_in
        codes = np.arange(fbase ** s.N, dtype=np.int64)
        # per-run function codes, run 1 lowest
        f = np.empty((codes.size, s.N), dtype=np.int64)
        c = codes.copy()
        for j in range(s.N):
            f[:, j] = c % fbase
            c //= fbase
        out = np.zeros((codes.size, n_in), dtype=np.int32)
        for x in range(n_in):
            xd = _digits(x, d_in, s.N)
            val = np.zeros(codes.size, dtype=np.int64)
            for j in range(s.N):
                bit = (f[:, j] // d_out ** xd[j]) % d_out
                val = val * d_out + bit
            out[:, x] = val
        return out

    return table(s.dA, s.dX, s.nX), table(s.dB, s.dY, s.nY)


class StrategyTable:
    """All strategies of a class (or an id range) as numpy response arrays."""

    def __init__(self, scenario: Scenario, cls: str, lo: int = 0, hi: int | None = None,
                 ids: np.ndarray | None = None, limit: int = ENUMERATION_LIMIT):
        cls = normalise_class(cls)
        total = strategy_count(scenario, cls)
        if total > limit:
            raise EnumerationTooLarge(total)
        self.scenario = scenario
        self.cls = cls
        at, bt = _party_tables(scenario, cls)
        if ids is None:
            hi = total if hi is None else min(hi, total)
            ids = np.arange(lo, hi, dtype=np.int64)
        self.ids = np.asarray(ids, dtype=np.int64)
        na = at.shape[0]
        self.alice = at[self.ids % na]
        self.bob = bt[self.ids // na]

    def __len__(self):
        return int(self.ids.size)

    def subset(self, mask_or_index) -> "StrategyTable":
        sub = StrategyTable.__new__(StrategyTable)
        sub.scenario = self.scenario
        sub.cls = self.cls
        sub.ids = self.ids[mask_or_index]
        sub.alice = self.alice[mask_or_index]
        sub.bob = self.bob[mask_or_index]
        return sub

    def strategy(self, i: int) -> Strategy:
        return decode_strategy(self.scenario, self.cls, int(self.ids[i]))

    @property
    def input_x(self) -> np.ndarray:
        s = self.scenario
        return np.repeat(np.arange(s.nX), s.nY)

    @property
    def input_y(self) -> np.ndarray:
        s = self.scenario
        return np.tile(np.arange(s.nY), s.nX)

    def full_coords(self) -> np.ndarray:
        """(S, n_inputs) block coordinate hit at each input."""
        s = self.scenario
        xs, ys = self.input_x, self.input_y
        a = self.alice[:, xs]
        b = self.bob[:, ys]
        return ((a * s.nB + b) * s.nX + xs[None, :]) * s.nY + ys[None, :]

    def coarse_coords(self) -> np.ndarray:
        """(S, n_inputs, N) single-run coordinate fed by each input in each run."""
        s = self.scenario
        xs, ys = self.input_x, self.input_y
        a = self.alice[:, xs]
        b = self.bob[:, ys]
        out = np.empty((len(self), s.n_inputs, s.N), dtype=np.int32)
        for j in range(s.N):
            p = s.N - 1 - j
            aj = (a // s.dA ** p) % s.dA
            bj = (b // s.dB ** p) % s.dB
            xj = (xs // s.dX ** p) % s.dX
            yj = (ys // s.dY ** p) % s.dY
            out[:, :, j] = ((aj * s.dB + bj) * s.dX + xj[None, :]) * s.dY + yj[None, :]
        return out

    def mismatch_mask(self, target: BlockPoint, space: str = "full") -> np.ndarray:
        """(S, n_inputs) bool: inputs that must receive probability zero."""
        zero = np.array(target.zero_mask(), dtype=bool)
        if space == "full":
            if target.scenario != self.scenario:
                raise ValueError("target scenario does not match strategy scenario")
            return zero[self.full_coords()]
        if space == "coarse":
            if target.scenario != self.scenario.single():
                raise ValueError("coarse targets must be single-run points of the same alphabets")
            return zero[self.coarse_coords()].any(axis=2)
        raise ValueError(f"unknown space {space!r}")


# ---------------------------------------------------------------------------
# filters


@dataclass(frozen=True)
class ResponseFilter:
    """Conjunction of "response at block input (x, y) equals (a, b)"."""

    conditions: tuple[tuple[int, int, int, int], ...]

    def mask(self, table: StrategyTable, mism: np.ndarray) -> np.ndarray:
        m = np.ones(len(table), dtype=bool)
        for x, y, a, b in self.conditions:
            m &= (table.alice[:, x] == a) & (table.bob[:, y] == b)
        return m

    def accepts(self, s: Strategy) -> bool:
        return all(s.alice[x] == a and s.bob[y] == b for x, y, a, b in self.conditions)

    @classmethod
    def zero_block(cls, scenario: Scenario) -> "ResponseFilter":
        """P(0..0 0..0 | 0..0 0..0) = 1."""
        return cls(((0, 0, 0, 0),))

    @classmethod
    def for_coordinate(cls, scenario: Scenario, idx: int) -> "ResponseFilter":
        a, b, x, y = IndexCodec(scenario).unflat(idx)
        return cls(((x, y, a, b),))


@dataclass(frozen=True)
class CoarseContributes:
    """Some non-mismatched block input feeds single-run coordinate ``coord``."""

    coord: int

    def mask(self, table: StrategyTable, mism: np.ndarray) -> np.ndarray:
        hits = (table.coarse_coords() == self.coord).any(axis=2)
        return (hits & ~mism).any(axis=1)

    @classmethod
    def zero_coordinate(cls) -> "CoarseContributes":
        """Coarse P(0000) > 0."""
        return cls(0)


# ---------------------------------------------------------------------------


@dataclass
class MismatchReport:
    k: int | None = None
    mismatched_inputs: frozenset = frozenset()
    k_min: int | None = None
    spectrum: dict[int, int] = field(default_factory=dict)
    family_size: int = 0

    @property
    def support(self) -> set[int]:
        return set(self.spectrum)


def _input_labels(scenario: Scenario, ks) -> frozenset:
    codec = IndexCodec(scenario)
    out = []
    for k in ks:
        x, y = codec.input_pair(int(k))
        out.append(("".join(map(str, _digits(x, scenario.dX, scenario.N))),
                    "".join(map(str, _digits(y, scenario.dY, scenario.N)))))
    return frozenset(out)


def mismatch_count(s: Strategy, target: BlockPoint) -> MismatchReport:
    """Inputs whose deterministic output lands on a zero of ``target``."""
    sc = s.scenario
    if target.scenario != sc:
        raise ValueError("scenario mismatch")
    codec = IndexCodec(sc)
    bad = []
    for k in range(sc.n_inputs):
        x, y = codec.input_pair(k)
        if target.entries[codec.flat(s.alice[x], s.bob[y], x, y)].is_zero():
            bad.append(k)
    return MismatchReport(k=len(bad), mismatched_inputs=_input_labels(sc, bad))


def coarse_mismatch_count(s: Strategy, target: BlockPoint) -> MismatchReport:
    """Inputs feeding (in any run) a single-run coordinate where ``target`` vanishes.

    Every such input must carry zero probability, because the coarse-grained
    entry is a sum of nonnegative contributions.
    """
    sc = s.scenario
    if target.scenario != sc.single():
        raise ValueError("coarse target must be single-run")
    codec = IndexCodec(sc)
    single = IndexCodec(sc.single())
    bad = []
    for k in range(sc.n_inputs):
        x, y = codec.input_pair(k)
        a, b = s.alice[x], s.bob[y]
        ad, bd = _digits(a, sc.dA, sc.N), _digits(b, sc.dB, sc.N)
        xd, yd = _digits(x, sc.dX, sc.N), _digits(y, sc.dY, sc.N)
        if any(target.entries[single.flat(ad[j], bd[j], xd[j], yd[j])].is_zero() for j in range(sc.N)):
            bad.append(k)
    return MismatchReport(k=len(bad), mismatched_inputs=_input_labels(sc, bad))


def _spectrum_chunk(args):
    scenario, cls, lo, hi, target, space, support_filter = args
    table = StrategyTable(scenario, cls, lo, hi)
    mism = table.mismatch_mask(target, space)
    keep = np.ones(len(table), dtype=bool) if support_filter is None else support_filter.mask(table, mism)
    ks = mism.sum(axis=1)[keep]
    return Counter(int(k) for k in ks)


def _chunks(total: int, workers: int):
    parts = max(1, workers)
    step = -(-total // parts)
    return [(lo, min(total, lo + step)) for lo in range(0, total, step)]


def mismatch_spectrum(scenario: Scenario, cls: str, target: BlockPoint, space: str = "full",
                      support_filter=None, workers: int = 1) -> MismatchReport:
    """Exact histogram of k over a (filtered) strategy class."""
    cls = normalise_class(cls)
    total = strategy_count(scenario, cls)
    if total > ENUMERATION_LIMIT:
        raise EnumerationTooLarge(total)
    jobs = [(scenario, cls, lo, hi, target, space, support_filter) for lo, hi in _chunks(total, workers)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_spectrum_chunk, jobs))
    else:
        parts = [_spectrum_chunk(j) for j in jobs]
    hist: Counter = Counter()
    for p in parts:
        hist.update(p)
    spectrum = dict(sorted(hist.items()))
    return MismatchReport(
        k_min=min(spectrum) if spectrum else None,
        spectrum=spectrum,
        family_size=sum(spectrum.values()),
    )


def k_max(h_power, scenario: Scenario) -> int:
    """Most input probabilities that can vanish when each is at most ``h_power``."""
    H = FieldScalar.coerce(h_power)
    n = scenario.n_inputs
    if H < Fraction(1, n):
        raise ValueError(f"bound {H} below 1/{n}: no normalised input distribution exists")
    if H > 1:
        H = FieldScalar(1)
    inv = H.inverse()
    c = math.floor(float(inv))
    while c < inv:
        c += 1
    while c - 1 >= inv:
        c -= 1
    return n - c
