"""Probability spaces P_N for blocks of N runs of a bipartite Bell test.

Index convention: a flat coordinate enumerates tuples (a, b, x, y) of block
strings with ``a`` most significant; within each block string run 1 is the
most significant digit.  For N = 2 and binary alphabets, ``x = "10"`` means
x_1 = 1, x_2 = 0 and has block index 2.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

from .numerics import FieldScalar, parse_scalar

__all__ = [
    "Scenario",
    "IndexCodec",
    "BlockPoint",
    "SingleRunPoint",
    "InputDistribution",
    "ConditionalTable",
    "ValidationReport",
    "InvalidPointError",
    "ConditionalUndefinedError",
    "validate_point",
    "input_marginal",
    "condition_on_inputs",
    "join_with_inputs",
    "product_point",
    "coarse_grain",
    "check_no_signalling",
    "point_to_json",
    "point_from_json",
    "load_point",
    "save_point",
    "coarse_map",
    "deterministic_point",
]

ZERO = FieldScalar(0)
ONE = FieldScalar(1)


class InvalidPointError(ValueError):
    pass


class ConditionalUndefinedError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    dX: int = 2
    dY: int = 2
    dA: int = 2
    dB: int = 2
    N: int = 1

    def __post_init__(self):
        for name in ("dX", "dY", "dA", "dB", "N"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    @property
    def nX(self) -> int:
        return self.dX ** self.N

    @property
    def nY(self) -> int:
        return self.dY ** self.N

    @property
    def nA(self) -> int:
        return self.dA ** self.N

    @property
    def nB(self) -> int:
        return self.dB ** self.N

    @property
    def n_inputs(self) -> int:
        return self.nX * self.nY

    @property
    def n_outputs(self) -> int:
        return self.nA * self.nB

    @property
    def size(self) -> int:
        return self.n_outputs * self.n_inputs

    def single(self) -> "Scenario":
        return Scenario(self.dX, self.dY, self.dA, self.dB, 1)

    def with_runs(self, N: int) -> "Scenario":
        return Scenario(self.dX, self.dY, self.dA, self.dB, N)

    def to_json(self) -> dict:
        return {"dX": self.dX, "dY": self.dY, "dA": self.dA, "dB": self.dB, "N": self.N}

    @classmethod
    def from_json(cls, d: dict) -> "Scenario":
        return cls(d.get("dX", 2), d.get("dY", 2), d.get("dA", 2), d.get("dB", 2), d.get("N", 1))


def _digits(value: int, base: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        value, r = divmod(value, base)
        out.append(r)
    return tuple(reversed(out))


def _undigits(digits: Sequence[int], base: int) -> int:
    v = 0
    for d in digits:
        v = v * base + d
    return v


class IndexCodec:
    """Bijection between (a, b, x, y) block tuples and flat indices."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario

    def flat(self, a: int, b: int, x: int, y: int) -> int:
        s = self.scenario
        return ((a * s.nB + b) * s.nX + x) * s.nY + y

    def unflat(self, idx: int) -> tuple[int, int, int, int]:
        s = self.scenario
        idx, y = divmod(idx, s.nY)
        idx, x = divmod(idx, s.nX)
        a, b = divmod(idx, s.nB)
        return a, b, x, y

    def input_index(self, x: int, y: int) -> int:
        return x * self.scenario.nY + y

    def input_pair(self, k: int) -> tuple[int, int]:
        return divmod(k, self.scenario.nY)

    def output_index(self, a: int, b: int) -> int:
        return a * self.scenario.nB + b

    def run_digits(self, value: int, base: int) -> tuple[int, ...]:
        return _digits(value, base, self.scenario.N)

    def from_digits(self, digits: Sequence[int], base: int) -> int:
        return _undigits(digits, base)

    def label(self, idx: int) -> tuple[str, str, str, str]:
        """Digit strings of (a, b, x, y), run 1 leftmost."""
        s = self.scenario
        a, b, x, y = self.unflat(idx)
        parts = [
            _digits(a, s.dA, s.N),
            _digits(b, s.dB, s.N),
            _digits(x, s.dX, s.N),
            _digits(y, s.dY, s.N),
        ]
        return tuple("".join(str(d) for d in p) for p in parts)

    def parse_label(self, a: str, b: str, x: str, y: str) -> int:
        s = self.scenario
        vals = []
        for text, base in ((a, s.dA), (b, s.dB), (x, s.dX), (y, s.dY)):
            if len(text) != s.N:
                raise ValueError(f"label {text!r} does not have {s.N} runs")
            digits = [int(ch) for ch in text]
            if any(d >= base for d in digits):
                raise ValueError(f"label {text!r} out of range")
            vals.append(_undigits(digits, base))
        return self.flat(*vals)

    def coordinate(self, abxy: str) -> int:
        """Single-run shorthand: ``"0101"`` -> index of P(a=0 b=1 x=0 y=1)."""
        n = self.scenario.N
        if len(abxy) != 4 * n:
            raise ValueError(f"expected {4 * n} digits, got {abxy!r}")
        return self.parse_label(*(abxy[i * n:(i + 1) * n] for i in range(4)))


@dataclass(frozen=True)
class ValidationReport:
    negative: tuple[tuple[int, FieldScalar], ...] = ()
    total: FieldScalar = ONE
    wrong_length: bool = False

    @property
    def ok(self) -> bool:
        return not self.negative and self.total == ONE and not self.wrong_length

    def describe(self) -> list[str]:
        out = [f"negative entry at {i}: {v}" for i, v in self.negative]
        if self.total != ONE:
            out.append(f"entries sum to {self.total}, not 1")
        if self.wrong_length:
            out.append("wrong number of entries")
        return out


def _validate(scenario: Scenario, entries: Sequence[FieldScalar]) -> ValidationReport:
    if len(entries) != scenario.size:
        return ValidationReport(wrong_length=True, total=ZERO)
    neg = tuple((i, v) for i, v in enumerate(entries) if v.sign() < 0)
    total = sum(entries, ZERO)
    return ValidationReport(neg, total)


@dataclass(frozen=True, eq=False)
class BlockPoint:
    """A distribution P(a b x y) over one block; validated on construction."""

    scenario: Scenario
    entries: tuple[FieldScalar, ...]
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        ent = tuple(FieldScalar.coerce(v) for v in self.entries)
        object.__setattr__(self, "entries", ent)
        if self.check:
            rep = _validate(self.scenario, ent)
            if not rep.ok:
                raise InvalidPointError("; ".join(rep.describe()[:5]))

    @property
    def codec(self) -> IndexCodec:
        return IndexCodec(self.scenario)

    def __getitem__(self, idx: int) -> FieldScalar:
        return self.entries[idx]

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        if not isinstance(other, BlockPoint):
            return NotImplemented
        return self.scenario == other.scenario and self.entries == other.entries

    def __hash__(self):
        return hash((self.scenario, self.entries))

    def at(self, abxy: str) -> FieldScalar:
        return self.entries[self.codec.coordinate(abxy)]

    def support(self) -> list[int]:
        return [i for i, v in enumerate(self.entries) if not v.is_zero()]

    def zero_mask(self) -> list[bool]:
        return [v.is_zero() for v in self.entries]

    def mix(self, other: "BlockPoint", weight) -> "BlockPoint":
        w = FieldScalar.coerce(weight)
        return BlockPoint(
            self.scenario,
            tuple(w * p + (ONE - w) * q for p, q in zip(self.entries, other.entries)),
        )

    @classmethod
    def from_sparse(cls, scenario: Scenario, values: dict) -> "BlockPoint":
        ent = [ZERO] * scenario.size
        for k, v in values.items():
            ent[k] = FieldScalar.coerce(v)
        return cls(scenario, tuple(ent))

    @classmethod
    def uniform(cls, scenario: Scenario) -> "BlockPoint":
        v = FieldScalar(Fraction(1, scenario.size))
        return cls(scenario, (v,) * scenario.size)


SingleRunPoint = BlockPoint


@dataclass(frozen=True, eq=False)
class InputDistribution:
    scenario: Scenario
    entries: tuple[FieldScalar, ...]
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        ent = tuple(FieldScalar.coerce(v) for v in self.entries)
        object.__setattr__(self, "entries", ent)
        if len(ent) != self.scenario.n_inputs:
            raise InvalidPointError("wrong number of input probabilities")
        if self.check:
            if any(v.sign() < 0 for v in ent) or sum(ent, ZERO) != ONE:
                raise InvalidPointError("input distribution must be nonnegative and sum to 1")

    def __eq__(self, other):
        if not isinstance(other, InputDistribution):
            return NotImplemented
        return self.scenario == other.scenario and self.entries == other.entries

    def __hash__(self):
        return hash((self.scenario, self.entries))

    def __getitem__(self, k):
        return self.entries[k]

    @classmethod
    def uniform(cls, scenario: Scenario) -> "InputDistribution":
        v = FieldScalar(Fraction(1, scenario.n_inputs))
        return cls(scenario, (v,) * scenario.n_inputs)


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """P(a b | x y), stored at the flat index of (a, b, x, y)."""

    scenario: Scenario
    entries: tuple[FieldScalar, ...]

    def __post_init__(self):
        ent = tuple(FieldScalar.coerce(v) for v in self.entries)
        object.__setattr__(self, "entries", ent)
        s = self.scenario
        codec = IndexCodec(s)
        for k in range(s.n_inputs):
            x, y = codec.input_pair(k)
            tot = sum((ent[codec.flat(a, b, x, y)] for a in range(s.nA) for b in range(s.nB)), ZERO)
            if tot != ONE:
                raise InvalidPointError(f"conditional slice at input {k} sums to {tot}")

    def __eq__(self, other):
        if not isinstance(other, ConditionalTable):
            return NotImplemented
        return self.scenario == other.scenario and self.entries == other.entries

    def __hash__(self):
        return hash((self.scenario, self.entries))

    def given(self, a: int, b: int, x: int, y: int) -> FieldScalar:
        return self.entries[IndexCodec(self.scenario).flat(a, b, x, y)]


# ---------------------------------------------------------------------------


def validate_point(p) -> ValidationReport:
    """Exact nonnegativity and normalisation report."""
    if isinstance(p, BlockPoint):
        return _validate(p.scenario, p.entries)
    scenario, entries = p
    return _validate(scenario, tuple(FieldScalar.coerce(v) for v in entries))


def input_marginal(p: BlockPoint) -> InputDistribution:
    s = p.scenario
    sums = [ZERO] * s.n_inputs
    ni = s.n_inputs
    for idx, v in enumerate(p.entries):
        if not v.is_zero():
            sums[idx % ni] += v
    return InputDistribution(s, tuple(sums))


def condition_on_inputs(p: BlockPoint) -> ConditionalTable:
    s = p.scenario
    marg = input_marginal(p)
    ni = s.n_inputs
    codec = IndexCodec(s)
    for k, v in enumerate(marg.entries):
        if v.is_zero():
            x, y = codec.input_pair(k)
            raise ConditionalUndefinedError(
                f"conditional undefined at (x, y) = "
                f"({''.join(map(str, codec.run_digits(x, s.dX)))}, "
                f"{''.join(map(str, codec.run_digits(y, s.dY)))})"
            )
    inv = [m.inverse() for m in marg.entries]
    return ConditionalTable(s, tuple(v * inv[i % ni] for i, v in enumerate(p.entries)))


def join_with_inputs(cond: ConditionalTable, inputs: InputDistribution) -> BlockPoint:
    s = cond.scenario
    if inputs.scenario != s:
        raise ValueError("scenario mismatch")
    ni = s.n_inputs
    return BlockPoint(s, tuple(v * inputs.entries[i % ni] for i, v in enumerate(cond.entries)))


def product_point(factors: Sequence[BlockPoint]) -> BlockPoint:
    """P(a b x y) = prod_j P_j(a_j b_j x_j y_j) for single-run factors."""
    if not factors:
        raise ValueError("need at least one factor")
    base = factors[0].scenario
    for f in factors:
        if f.scenario.N != 1:
            raise ValueError("factors must be single-run points")
        if f.scenario != base:
            raise ValueError("factors have mismatched scenarios")
    N = len(factors)
    s = base.with_runs(N)
    single = IndexCodec(base)
    labels = [single.unflat(i) for i in range(base.size)]
    block = IndexCodec(s)
    entries = [ZERO] * s.size
    supports = [f.support() for f in factors]
    for combo in product(*supports):
        val = ONE
        a = b = x = y = 0
        for j, i in zip(range(N), combo):
            val = val * factors[j].entries[i]
            aj, bj, xj, yj = labels[i]
            a = a * base.dA + aj
            b = b * base.dB + bj
            x = x * base.dX + xj
            y = y * base.dY + yj
        entries[block.flat(a, b, x, y)] = val
    return BlockPoint(s, tuple(entries))


@lru_cache(maxsize=None)
def coarse_map(scenario: Scenario) -> tuple[tuple[int, ...], ...]:
    """For every block coordinate, the N single-run coordinates it feeds."""
    s = scenario
    codec = IndexCodec(s)
    single = IndexCodec(s.single())
    out = []
    for idx in range(s.size):
        a, b, x, y = codec.unflat(idx)
        ad = _digits(a, s.dA, s.N)
        bd = _digits(b, s.dB, s.N)
        xd = _digits(x, s.dX, s.N)
        yd = _digits(y, s.dY, s.N)
        out.append(tuple(single.flat(ad[j], bd[j], xd[j], yd[j]) for j in range(s.N)))
    return tuple(out)


def coarse_grain(p: BlockPoint) -> BlockPoint:
    """Average single-run statistics of a block point."""
    s = p.scenario
    cmap = coarse_map(s)
    acc = [ZERO] * s.single().size
    for idx, v in enumerate(p.entries):
        if v.is_zero():
            continue
        for c in cmap[idx]:
            acc[c] += v
    inv_n = FieldScalar(Fraction(1, s.N))
    return BlockPoint(s.single(), tuple(v * inv_n for v in acc))


def check_no_signalling(p: BlockPoint) -> tuple[bool, list[str]]:
    """Marginal-equality constraints on P(a b | x y), at block level for N > 1."""
    cond = condition_on_inputs(p)
    s = p.scenario
    codec = IndexCodec(s)
    ent = cond.entries
    violations = []

    def alice_marg(a, x, y):
        return sum((ent[codec.flat(a, b, x, y)] for b in range(s.nB)), ZERO)

    def bob_marg(b, x, y):
        return sum((ent[codec.flat(a, b, x, y)] for a in range(s.nA)), ZERO)

    for a in range(s.nA):
        for x in range(s.nX):
            ref = alice_marg(a, x, 0)
            for y in range(1, s.nY):
                if alice_marg(a, x, y) != ref:
                    violations.append(f"Alice marginal a={a} x={x} differs between y=0 and y={y}")
    for b in range(s.nB):
        for y in range(s.nY):
            ref = bob_marg(b, 0, y)
            for x in range(1, s.nX):
                if bob_marg(b, x, y) != ref:
                    violations.append(f"Bob marginal b={b} y={y} differs between x=0 and x={x}")
    return not violations, violations


# ---------------------------------------------------------------------------
# JSON point files


def point_to_json(p: BlockPoint) -> dict:
    codec = p.codec
    return {
        "scenario": p.scenario.to_json(),
        "space": "single" if p.scenario.N == 1 else "block",
        "entries": [
            {"abxy": list(codec.label(i)), "value": str(v)}
            for i, v in enumerate(p.entries)
            if not v.is_zero()
        ],
    }


def point_from_json(d: dict) -> BlockPoint:
    s = Scenario.from_json(d.get("scenario", {}))
    if d.get("space") == "single" and s.N != 1:
        raise ValueError("space 'single' requires N = 1")
    codec = IndexCodec(s)
    values = {}
    for e in d["entries"]:
        idx = codec.parse_label(*e["abxy"])
        values[idx] = values.get(idx, ZERO) + parse_scalar(str(e["value"]))
    return BlockPoint.from_sparse(s, values)


def save_point(p: BlockPoint, path) -> None:
    with open(path, "w") as fh:
        json.dump(point_to_json(p), fh, indent=1)


def load_point(path) -> BlockPoint:
    with open(path) as fh:
        return point_from_json(json.load(fh))


def deterministic_point(scenario: Scenario, alice: Iterable[int], bob: Iterable[int], inputs: InputDistribution | None = None) -> BlockPoint:
    """Point of a deterministic response joined with ``inputs`` (default uniform)."""
    alice = list(alice)
    bob = list(bob)
    inputs = inputs or InputDistribution.uniform(scenario)
    codec = IndexCodec(scenario)
    vals = {}
    for k, w in enumerate(inputs.entries):
        if w.is_zero():
            continue
        x, y = codec.input_pair(k)
        vals[codec.flat(alice[x], bob[y], x, y)] = w
    return BlockPoint.from_sparse(scenario, vals)
