import random

import pytest
from hypothesis import given, strategies as st

from bocslab.errors import IdempotentMismatch, NotInvertible
from bocslab.graded import (GradedSpace, HomMap, block_map, direct_sum, extract_block, hom_inverse, homology_dims,
                            lazy_tensor, shift, sigma, sigma_inv, solve_splitting, tensor, tensor_map)
from bocslab.oracles import gen_bimodule, gen_module, random_hom
from bocslab.scalars import QQ, BaseRing

from conftest import seeds

S1 = BaseRing(1)


def space(rows, base=S1):
    return GradedSpace(base, [(l, d, 0, 0) for l, d in rows])


def brute_tensor(f, g, key):
    """(f⊗g)(x⊗y) = (−1)^{|g||x|} f(x)⊗g(y) evaluated directly."""
    x, y = key
    s = -1 if (g.degree * f.dom.degrees[x]) % 2 else 1
    out = {}
    for (a,), u in f.cols.get((x,), {}).items():
        for (b,), v in g.cols.get((y,), {}).items():
            out[(a, b)] = s * u * v
    return out


@given(st.integers(**seeds))
def test_tensor_sign_rule(seed):
    rng = random.Random(seed)
    base = BaseRing(1 + seed % 2)
    X, Y, Z, W = (gen_bimodule(rng, base, 3, prefix=p) for p in "xyzw")
    df, dg, dh, dt = (rng.randint(-1, 1) for _ in range(4))
    f, g = random_hom(rng, X, Y, df), random_hom(rng, Z, W, dg)
    h, t = random_hom(rng, Y, X, dh), random_hom(rng, W, Z, dt)
    fg = tensor_map(f, g)
    assert fg.degree == df + dg
    for key in tensor(X, Z).keys():
        assert fg.apply(key) == brute_tensor(f, g, key)
    lhs = tensor_map(h, t) @ fg
    rhs = tensor_map(h @ f, t @ g)
    assert lhs == (rhs if (dt * df) % 2 == 0 else -rhs)
    assert lazy_tensor(h, t) @ fg == lhs
    assert tensor_map(HomMap.identity(X), HomMap.identity(Z)) == HomMap.identity(tensor(X, Z))


def test_tensor_sign_example():
    X = space([("x", 1)])
    Y = space([("y", 0)])
    Y1 = space([("y'", 1)])
    g = HomMap(Y, Y1, 1, {(0,): {(0,): QQ(1)}})
    fg = tensor_map(HomMap.identity(X), g)
    assert fg.apply((0, 0)) == {(0, 0): -1}


def test_tensor_over_s_contracts_idempotents():
    base = BaseRing(2)
    X = GradedSpace(base, [("a", 0, 0, 1)])
    Y = GradedSpace(base, [("b", 0, 0, 0)])
    assert list(tensor(X, Y).keys()) == []
    assert list(tensor(Y, X).keys()) == [(0, 0)]


def test_idempotent_range():
    with pytest.raises(IdempotentMismatch):
        GradedSpace(BaseRing(1), [("a", 0, 0, 1)])


@given(st.integers(**seeds))
def test_composition_associative_and_degrees(seed):
    rng = random.Random(seed)
    base = BaseRing(1 + seed % 3)
    X, Y, Z, W = (gen_module(rng, base, 4, prefix=p) for p in "xyzw")
    f = random_hom(rng, X, Y, rng.randint(-1, 1), module=True)
    g = random_hom(rng, Y, Z, rng.randint(-1, 1), module=True)
    h = random_hom(rng, Z, W, rng.randint(-1, 1), module=True)
    assert (h @ g) @ f == h @ (g @ f)
    assert (g @ f).degree == f.degree + g.degree


def test_shift_examples():
    M = space([("a", 0), ("b", 0)])
    M1, s = shift(M)
    assert set(M1.degrees) == {-1}
    assert s.degree == -1 and sigma_inv(M, M1).degree == 1
    assert s @ sigma_inv(M, M1) == HomMap.identity(M1)
    assert sigma_inv(M, M1) @ s == HomMap.identity(M)
    N = space([("a", -1), ("b", 0), ("c", 2)])
    assert N.shift(1).shift(1).degrees == tuple(d - 2 for d in N.degrees)
    assert N.shift(1).shift(1) == N.shift(2)
    assert sigma(N).dom == N


def test_splitting_trivial_cases():
    M = space([("a", 0), ("b", 0), ("c", 1)])
    z = solve_splitting(HomMap.zero(M, M))
    assert len(z.kernel) == M.dim and z.image == []
    one = solve_splitting(HomMap.identity(M))
    assert one.kernel == [] and one.section == HomMap.identity(M)


@given(st.integers(**seeds))
def test_splitting_random_matrix(seed):
    rng = random.Random(seed)
    M = space([(f"m{i}", 0) for i in range(5)])
    N = space([(f"n{i}", 0) for i in range(3)])
    f = random_hom(rng, M, N, 0, density=0.6)
    sp = solve_splitting(f)
    g = sp.section
    assert f @ g @ f == f
    assert g @ f @ g == g
    P = g @ f
    assert P @ P == P
    assert len(sp.kernel) + len(sp.image) == M.dim
    for v in sp.kernel:
        assert f.apply_vec(v) == {}
    for v in sp.image:
        assert (f @ g).apply_vec(v) == v


@given(st.integers(**seeds))
def test_splitting_rank_nullity_graded(seed):
    rng = random.Random(seed)
    base = BaseRing(1 + seed % 2)
    M, N = gen_module(rng, base, 6), gen_module(rng, base, 5, prefix="n")
    f = random_hom(rng, M, N, rng.randint(-1, 1), module=True)
    sp = solve_splitting(f)
    assert len(sp.kernel) + len(sp.image) == M.dim
    assert f @ sp.ginv @ f == f


def test_direct_sum_blocks():
    rng = random.Random(3)
    M, N = gen_module(rng, S1, 3), gen_module(rng, S1, 2, prefix="n")
    S = direct_sum(M, N)
    f = random_hom(rng, M, N, 0, module=True)
    F = block_map(S, S, [[HomMap.identity(M), None], [f, HomMap.identity(N)]], 0)
    assert extract_block(F, S, S, 1, 0) == f
    assert S.proj(1) @ F @ S.inj(0) == f
    assert S.proj(0) @ S.inj(0) == HomMap.identity(M)


def test_hom_inverse():
    rng = random.Random(4)
    M = gen_module(rng, BaseRing(2), 4)
    assert hom_inverse(HomMap.identity(M)) == HomMap.identity(M)
    with pytest.raises(NotInvertible):
        hom_inverse(HomMap.zero(M, M))


def test_homology_dims_examples():
    M = space([("a", 0), ("b", 1)])
    d = HomMap(M, M, 1, {(0,): {(1,): QQ(1)}})
    assert set(homology_dims(M, d).values()) == {0}
    assert sum(homology_dims(M, HomMap.zero(M, M, 1)).values()) == 2
