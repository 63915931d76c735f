import json
import random
from fractions import Fraction
from itertools import product

import pytest

from mdlpoly.model import (
    BlockPoint,
    ConditionalUndefinedError,
    IndexCodec,
    InputDistribution,
    InvalidPointError,
    Scenario,
    _digits,
    _undigits,
    check_no_signalling,
    coarse_grain,
    condition_on_inputs,
    deterministic_point,
    input_marginal,
    join_with_inputs,
    load_point,
    point_from_json,
    point_to_json,
    product_point,
    save_point,
    validate_point,
)
from mdlpoly.numerics import FieldScalar
from mdlpoly.reference import block_reference, hardy_point, ns1_vertices, pr_box

from conftest import random_point

S1 = Scenario()
S2 = Scenario(N=2)


def swap_runs(p: BlockPoint) -> BlockPoint:
    s = p.scenario
    codec = IndexCodec(s)
    out = [FieldScalar(0)] * s.size
    for i, v in enumerate(p.entries):
        a, b, x, y = codec.unflat(i)
        sw = [_undigits(_digits(t, 2, s.N)[::-1], 2) for t in (a, b, x, y)]
        out[codec.flat(*sw)] = v
    return BlockPoint(s, tuple(out))


def test_sizes():
    assert S1.size == 16 and S2.size == 256 and S2.n_inputs == 16
    assert Scenario(N=3).size == 4096


def test_codec_round_trip():
    codec = IndexCodec(S2)
    for i in range(S2.size):
        assert codec.flat(*codec.unflat(i)) == i
        assert codec.coordinate("".join(codec.label(i))) == i
    # run 1 is the most significant digit
    assert codec.coordinate("00001000") == codec.flat(0, 0, 2, 0)


def test_validation_examples():
    assert validate_point(BlockPoint.uniform(S2)).ok
    vals = [Fraction(1, 15)] * 16
    vals[3] = Fraction(-1, 10)
    vals[0] = 1 - sum(vals[1:])
    rep = validate_point((S1, vals))
    assert not rep.ok and rep.negative[0][0] == 3
    with pytest.raises(InvalidPointError):
        BlockPoint(S1, tuple(vals))
    pr2 = block_reference("pr2")
    assert validate_point(pr2).ok
    assert len(pr2.support()) == 64 and all(pr2[i] == Fraction(1, 64) for i in pr2.support())


def test_input_marginal_examples():
    assert input_marginal(block_reference("pr2")) == InputDistribution.uniform(S2)
    det = deterministic_point(S2, [0] * 4, [0] * 4)
    assert all(v == Fraction(1, 16) for v in input_marginal(det).entries)
    ind = [0] * 16
    ind[5] = 1
    p = deterministic_point(S2, [0] * 4, [0] * 4, InputDistribution(S2, tuple(ind)))
    assert input_marginal(p).entries == tuple(FieldScalar(v) for v in ind)


def test_conditionals():
    cond = condition_on_inputs(block_reference("pr2"))
    codec = IndexCodec(S2)
    for i in range(S2.size):
        a, b, x, y = codec.unflat(i)
        ok = all(((a >> j) ^ (b >> j)) & 1 == ((x >> j) & (y >> j) & 1) for j in range(2))
        assert cond.entries[i] == (Fraction(1, 4) if ok else 0)
    u = condition_on_inputs(BlockPoint.uniform(S2))
    assert set(u.entries) == {FieldScalar(Fraction(1, 16))}
    ind = [0] * 16
    ind[0] = 1
    p = deterministic_point(S2, [0] * 4, [0] * 4, InputDistribution(S2, tuple(ind)))
    with pytest.raises(ConditionalUndefinedError):
        condition_on_inputs(p)


def test_join_examples():
    pr = pr_box()
    assert join_with_inputs(condition_on_inputs(pr), InputDistribution.uniform(S1)) == pr
    assert sorted(set(pr.entries)) == [0, Fraction(1, 8)]
    h2 = block_reference("hardy2")
    assert join_with_inputs(condition_on_inputs(h2), input_marginal(h2)) == h2
    ind = [0] * 4
    ind[2] = 1
    p = join_with_inputs(condition_on_inputs(pr), InputDistribution(S1, tuple(ind)))
    assert {IndexCodec(S1).unflat(i)[2:] for i in p.support()} == {(1, 0)}


def test_product_examples():
    assert product_point([pr_box(), pr_box()]) == block_reference("pr2")
    assert product_point([hardy_point()] * 2) == block_reference("hardy2")
    assert product_point([BlockPoint.uniform(S1)] * 2) == BlockPoint.uniform(S2)
    with pytest.raises(ValueError):
        product_point([])


def test_coarse_grain_examples():
    pr = pr_box()
    assert coarse_grain(product_point([pr, pr])) == pr
    zero_det = deterministic_point(S1, [0, 0], [0, 0])
    mixed = coarse_grain(product_point([pr, zero_det]))
    codec = IndexCodec(S1)
    for i in range(16):
        a, b, x, y = codec.unflat(i)
        expect = (pr[i] + (Fraction(1, 4) if a == 0 and b == 0 else 0)) / 2
        assert mixed[i] == expect


def test_coarse_grain_run_permutation(rng):
    for _ in range(5):
        p = random_point(rng, S2, density=0.3)
        assert coarse_grain(swap_runs(p)) == coarse_grain(p)


@pytest.mark.parametrize("N", [2, 3])
def test_proposition_1_repetition(rng, N):
    for _ in range(10):
        p = random_point(rng, S1, density=0.6)
        assert coarse_grain(product_point([p] * N)) == p


def test_coarse_grain_linear(rng):
    for _ in range(10):
        p, q = random_point(rng, S2, 0.2), random_point(rng, S2, 0.2)
        w = Fraction(rng.randint(0, 7), 7)
        lhs = coarse_grain(p.mix(q, w))
        rhs = coarse_grain(p).mix(coarse_grain(q), w)
        assert lhs == rhs


def test_proposition_2_ns_products(rng):
    verts = ns1_vertices()
    for _ in range(10):
        acc = None
        for _ in range(3):
            prod = product_point([rng.choice(verts), rng.choice(verts)])
            acc = prod if acc is None else acc.mix(prod, Fraction(rng.randint(1, 4), 5))
        ok, bad = check_no_signalling(coarse_grain(acc))
        assert ok, bad


def test_no_signalling_examples():
    assert check_no_signalling(pr_box())[0]
    assert check_no_signalling(hardy_point())[0]
    assert check_no_signalling(block_reference("hardy2"))[0]
    third = Fraction(1, 3)
    p = deterministic_point(S1, [0, 1], [0, 0], InputDistribution(S1, (third, third, third, 0)))
    with pytest.raises(ConditionalUndefinedError):
        check_no_signalling(p)
    # a signalling box: Alice outputs y
    sig = BlockPoint.from_sparse(S1, {IndexCodec(S1).flat(y, 0, x, y): Fraction(1, 4)
                                      for x, y in product(range(2), repeat=2)})
    ok, bad = check_no_signalling(sig)
    assert not ok and bad


def test_json_round_trip(tmp_path):
    h2 = block_reference("hardy2")
    assert point_from_json(json.loads(json.dumps(point_to_json(h2)))) == h2
    save_point(pr_box(), tmp_path / "pr.json")
    assert load_point(tmp_path / "pr.json") == pr_box()
