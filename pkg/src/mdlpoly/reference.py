"""Named points and functionals: PR boxes, the Hardy point, NS vertices,
the Putz and CHSH expressions, and a two-qubit Born-rule evaluator."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .model import (
    BlockPoint,
    IndexCodec,
    InputDistribution,
    Scenario,
    deterministic_point,
    product_point,
)
from .numerics import FieldScalar
from .optimize import LinearFunctional
from .strategies import parse_strategy

SINGLE = Scenario()
_CODEC = IndexCodec(SINGLE)


def _point(fn) -> BlockPoint:
    """Uniform-input single-run point from a conditional P(ab|xy)."""
    vals = {}
    for a, b, x, y in product(range(2), repeat=4):
        p = fn(a, b, x, y)
        if p:
            vals[_CODEC.flat(a, b, x, y)] = FieldScalar.coerce(p) * Fraction(1, 4)
    return BlockPoint.from_sparse(SINGLE, vals)


def pr_box(alpha: int = 0, beta: int = 0, gamma: int = 0) -> BlockPoint:
    """a xor b = x y xor alpha x xor beta y xor gamma, uniform inputs."""
    return _point(lambda a, b, x, y: Fraction(1, 2) if (a ^ b) == ((x & y) ^ (alpha & x) ^ (beta & y) ^ gamma) else 0)


def local_deterministic(a0: int, a1: int, b0: int, b1: int) -> BlockPoint:
    return deterministic_point(SINGLE, (a0, a1), (b0, b1))


def ns1_vertices() -> list[BlockPoint]:
    """16 local deterministic points followed by the 8 PR-box relabelings."""
    out = [local_deterministic(*bits) for bits in product(range(2), repeat=4)]
    out += [pr_box(al, be, ga) for al, be, ga in product(range(2), repeat=3)]
    return out


# ---------------------------------------------------------------------------
# qubits


@dataclass(frozen=True)
class QubitPairState:
    """Amplitudes of |00>, |01>, |10>, |11> (real)."""

    amplitudes: tuple

    def norm2(self):
        return sum((a * a for a in self.amplitudes), 0 * self.amplitudes[0])

    def normalized_check(self) -> bool:
        return self.norm2() == 1


@dataclass(frozen=True)
class ProjectiveSetting:
    """Outcome-0 direction per input for each party (unnormalised 2-vectors)."""

    alice: tuple
    bob: tuple


def _outcome_vectors(v):
    u0, u1 = v
    return (u0, u1), (-u1, u0)


def quantum_point(state: QubitPairState, settings: ProjectiveSetting,
                  inputs: InputDistribution | None = None, exact: bool = True) -> BlockPoint | list:
    """Born-rule P(ab|xy) = <u_a v_b|psi>^2 / (|u|^2 |v|^2), joined with ``inputs``.

    With ``exact=False`` everything is evaluated in floats and the raw list
    of joint probabilities (in flat index order) is returned instead of a
    validated point, for parameter exploration only.
    """
    psi = state.amplitudes
    if exact:
        psi = tuple(FieldScalar.coerce(a) for a in psi)
        if sum((a * a for a in psi), FieldScalar(0)) != 1:
            raise ValueError("state is not normalised")
    w = inputs.entries if inputs is not None else (Fraction(1, 4),) * 4
    vals = [0] * SINGLE.size
    for x, y in product(range(2), repeat=2):
        ua = _outcome_vectors(settings.alice[x])
        vb = _outcome_vectors(settings.bob[y])
        for a, b in product(range(2), repeat=2):
            u, v = ua[a], vb[b]
            nu = u[0] * u[0] + u[1] * u[1]
            nv = v[0] * v[0] + v[1] * v[1]
            if nu == 0 or nv == 0:
                raise ValueError("zero-norm measurement vector")
            amp = u[0] * v[0] * psi[0] + u[0] * v[1] * psi[1] + u[1] * v[0] * psi[2] + u[1] * v[1] * psi[3]
            p = amp * amp / (nu * nv)
            vals[_CODEC.flat(a, b, x, y)] = p * w[x * 2 + y]
    if not exact:
        return [float(v) for v in vals]
    return BlockPoint(SINGLE, tuple(vals))


def hardy_state() -> QubitPairState:
    alpha = FieldScalar.hardy_alpha()
    s = FieldScalar.beta() ** -3       # sqrt(1 - 2 alpha^2)
    return QubitPairState((FieldScalar(0), alpha, alpha, s))


def hardy_settings() -> ProjectiveSetting:
    alpha = FieldScalar.hardy_alpha()
    s = FieldScalar.beta() ** -3
    a0 = (s, -alpha)
    a1 = (FieldScalar(1), FieldScalar(0))
    return ProjectiveSetting((a0, a1), (a0, a1))


def hardy_point() -> BlockPoint:
    """The two-qubit point maximising P(00|00) under the three Hardy zeros."""
    return quantum_point(hardy_state(), hardy_settings())


def uniform_point(scenario: Scenario = SINGLE) -> BlockPoint:
    return BlockPoint.uniform(scenario)


def block_reference(name: str, N: int = 2) -> BlockPoint:
    base = {"pr2": pr_box, "hardy2": hardy_point}.get(name)
    if base is None:
        raise ValueError(f"unknown block reference {name!r}")
    p = base()
    return product_point([p] * N)


def putz_functional(l, h) -> LinearFunctional:
    """l P(0000) - h (P(0101) + P(1010) + P(0011)), labels abxy."""
    return LinearFunctional.from_labels(SINGLE, {"0000": l, "0101": -h, "1010": -h, "0011": -h})


def chsh_functional() -> LinearFunctional:
    """4 (-1)^(a xor b xor xy) per coordinate: sum of correlators on the uniform slice."""
    coeffs = {}
    for a, b, x, y in product(range(2), repeat=4):
        coeffs[_CODEC.flat(a, b, x, y)] = Fraction(4 if (a ^ b ^ (x & y)) == 0 else -4)
    return LinearFunctional(SINGLE, coeffs)


def builtin_point(name: str) -> BlockPoint:
    """CLI names: pr, hardy, pr2, hardy2, uniform, ld:<strategy text>."""
    if name.startswith("builtin:"):
        name = name[len("builtin:"):]
    if name == "pr":
        return pr_box()
    if name == "hardy":
        return hardy_point()
    if name in ("pr2", "hardy2"):
        return block_reference(name)
    if name == "uniform":
        return uniform_point()
    if name.startswith("uniform"):
        return uniform_point(Scenario(N=int(name[len("uniform"):])))
    if name.startswith("ld:"):
        st = parse_strategy(name[3:])
        return deterministic_point(st.scenario, st.alice, st.bob)
    raise ValueError(f"unknown builtin point {name!r}")


BUILTIN_NAMES = ("pr", "hardy", "pr2", "hardy2", "uniform")
