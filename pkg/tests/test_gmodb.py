import random

import pytest
from hypothesis import given, strategies as st

from bocslab.ainfmod import delta_coderivation, psi_of_morphism
from bocslab.bocs import bar_construct
from bocslab.errors import ModuleMismatch, NotABocsMorphism, NotInvertible
from bocslab.gmodb import (BocsHomotopy, BocsMorphism, GModMorphism, check_bocs_homotopy, check_bocs_morphism,
                           compose, compose_via_tensor, hat_delta, identity_bocs_morphism, invert, local_nilpotence_ok,
                           r_h, restrict)
from bocslab.graded import HomMap
from bocslab.oracles import (brute_gmod_compose, brute_hat_delta, brute_leibniz, gen_gmod_morphism, gen_module,
                             gmod_to_dict, random_component)

from test_ainfty import two_dim
from conftest import algebra, random_alg_homotopy, random_alg_morphism, seeds


def setup(seed, L=3, n=3):
    A = algebra(seed)
    B = bar_construct(A, L)
    rng = random.Random(seed)
    Ms = [gen_module(rng, A.A.base, rng.randint(1, 3), prefix=p) for p in "mnpq"[:n]]
    return A, B, rng, Ms


def sgn(d):
    return -1 if d % 2 else 1


@given(st.integers(**seeds))
def test_composition_laws(seed):
    A, B, rng, (M, N, P) = setup(seed)
    Q = gen_module(rng, A.A.base, 2, prefix="q")
    f = gen_gmod_morphism(rng, B, M, N, rng.randint(-1, 1))
    g = gen_gmod_morphism(rng, B, N, P, rng.randint(-1, 1))
    h = gen_gmod_morphism(rng, B, P, Q, rng.randint(-1, 1))
    assert compose(h, compose(g, f)) == compose(compose(h, g), f)
    assert compose(g, f) == compose_via_tensor(g, f)
    assert compose(f, GModMorphism.identity(B, M)) == f
    assert compose(GModMorphism.identity(B, N), f) == f
    assert brute_gmod_compose(g, f) == gmod_to_dict(compose(g, f))


@given(st.integers(**seeds))
def test_composition_components(seed):
    A, B, rng, (M, N, P) = setup(seed)
    f = gen_gmod_morphism(rng, B, M, N, 0)
    g = gen_gmod_morphism(rng, B, N, P, 1)
    gf = compose(g, f)
    assert gf.f0 == g.f0 @ f.f0
    for c in B.elements(1):
        assert gf.one(c) == g.one(c) @ f.f0 + g.f0 @ f.one(c)
    strict = compose(g.first(), f.first())
    assert strict.f0 == g.f0 @ f.f0 and not strict.f1
    with pytest.raises(ModuleMismatch):
        compose(f, g)


@given(st.integers(**seeds))
def test_differential_laws(seed):
    A, B, rng, (M, N, P) = setup(seed)
    f = gen_gmod_morphism(rng, B, M, N, rng.randint(-1, 1))
    g = gen_gmod_morphism(rng, B, N, P, rng.randint(-1, 1))
    assert hat_delta(GModMorphism.identity(B, M)).is_zero()
    assert hat_delta(hat_delta(f)).is_zero()
    df = hat_delta(f)
    assert df.degree == f.degree + 1 and df.f0.is_zero()
    lhs = hat_delta(compose(g, f))
    rhs = compose(hat_delta(g), f) + compose(g, hat_delta(f)).scale(sgn(g.degree))
    assert lhs == rhs
    assert brute_hat_delta(f) == gmod_to_dict(df)
    assert brute_leibniz(g, f) == {}


@given(st.integers(**seeds))
def test_local_nilpotence(seed):
    A, B, rng, (M, N, P) = setup(seed)
    f = gen_gmod_morphism(rng, B, M, M, 0)
    assert local_nilpotence_ok(f)


@given(st.integers(**seeds))
def test_invert(seed):
    A, B, rng, (M, N, P) = setup(seed, L=4)
    idM = GModMorphism.identity(B, M)
    assert invert(idM) == idM
    k = gen_gmod_morphism(rng, B, M, M, 0)
    f = GModMorphism(B, M, M, 0, HomMap.identity(M), k.f1)
    fi = invert(f)
    assert compose(f, fi) == idM and compose(fi, f) == idM
    sing = GModMorphism(B, M, M, 0, HomMap.zero(M, M), k.f1)
    with pytest.raises(NotInvertible):
        invert(sing)


def test_invert_first_layer_example():
    A, B, rng, (M, N, P) = setup(8, L=3)
    f1 = {c: random_component(rng, B, c, M, M, 0, density=1.0) for c in B.elements(1)}
    f = GModMorphism(B, M, M, 0, HomMap.identity(M), f1)
    assert f.f1
    fi = invert(f)
    for c in B.elements(1):
        assert fi.one(c) == -f.one(c)
    for c in B.elements(2):
        sq = HomMap.zero(M, M, B.degree(c))
        for (x, y), v in B.mu(c).items():
            sq = sq + (f.one(y) @ f.one(x)).scale(v)
        assert fi.one(c) == sq


def test_restrict_identity_bocs_morphism():
    A, B, rng, (M, N, P) = setup(3)
    f = gen_gmod_morphism(rng, B, M, N, 1)
    idB = identity_bocs_morphism(B)
    assert check_bocs_morphism(idB).ok
    assert restrict(idB, f) == f
    assert restrict(idB, GModMorphism.identity(B, M)) == GModMorphism.identity(B, M)
    B2 = bar_construct(two_dim(), 2)
    assert B2.C != B.C
    with pytest.raises(NotABocsMorphism):
        restrict(BocsMorphism(B, B2, HomMap.zero(B.C, B2.C)), f)


@given(st.integers(**seeds))
def test_restriction_functor(seed):
    A, B, rng, (M, N, P) = setup(seed)
    phi = random_alg_morphism(rng, A, B.L)
    psi = psi_of_morphism(phi, B, B)
    assert check_bocs_morphism(psi).ok
    f = gen_gmod_morphism(rng, B, M, N, rng.randint(-1, 1))
    g = gen_gmod_morphism(rng, B, N, P, rng.randint(-1, 1))
    R = lambda x: restrict(psi, x, verify=True)
    assert R(compose(g, f)) == compose(R(g), R(f))
    assert R(GModMorphism.identity(B, M)) == GModMorphism.identity(B, M)
    assert R(hat_delta(f)) == hat_delta(R(f))


@given(st.integers(**seeds))
def test_restriction_along_homotopy(seed):
    A, B, rng, (M, N, P) = setup(seed)
    L = B.L
    f = random_alg_morphism(rng, A, L)
    from bocslab.ainfty import homotopic_morphism
    h = random_alg_homotopy(rng, A, 2)
    g = homotopic_morphism(f, h, L)
    Pf, Pg = psi_of_morphism(f, B, B), psi_of_morphism(g, B, B)
    bh = BocsHomotopy(Pf, Pg, delta_coderivation(h, f, g, B, B, -1))
    assert check_bocs_homotopy(bh).ok
    u = gen_gmod_morphism(rng, B, M, N, rng.randint(-1, 1))
    v = gen_gmod_morphism(rng, B, N, P, rng.randint(-1, 1))
    assert r_h(bh, u, verify=True).f0.is_zero()
    assert restrict(Pf, u) - restrict(Pg, u) == hat_delta(r_h(bh, u)) + r_h(bh, hat_delta(u))
    lhs = r_h(bh, compose(v, u))
    rhs = compose(r_h(bh, v), restrict(Pf, u)) + compose(restrict(Pg, v), r_h(bh, u)).scale(sgn(v.degree))
    assert lhs == rhs
    zero = BocsHomotopy(Pf, Pf, HomMap.zero(B.C, B.C, -1))
    assert r_h(zero, u).is_zero()
