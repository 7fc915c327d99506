import itertools
import random

import pytest
from hypothesis import given, strategies as st

from bocslab.ainfmod import (AInfModMorphism, AInfModule, bridge_morphism, check_mod_homotopy, check_mod_morphism,
                             check_module, compose_mod, delta_coderivation, delta_inf, from_twisted, homology,
                             is_quasi_iso, jfun_mod, mod_homotopy_inverse, module_defect_classical, odot_coderivation,
                             odot_family, psi_of_morphism, restrict_mod, restrict_module, shift_mod, to_twisted,
                             unbridge_morphism)
from bocslab.ainfty import AInfAlgHomotopy, AInfAlgMorphism, homotopic_morphism
from bocslab.bocs import bar_construct
from bocslab.errors import GenerationFailed, NotAComplex, TruncationTooSmall
from bocslab.gmodb import GModMorphism, compose, hat_delta, restrict
from bocslab.graded import GradedSpace, HomMap, identity, lazy_tensor, tensor
from bocslab.oracles import gen_gmod_morphism, gen_quasi_iso, gen_twisted_morphism, random_hom
from bocslab.scalars import QQ, BaseRing
from bocslab.twisted import TwistedMorphism, check_mc, jfun, restrict_twisted, shift

from conftest import algebra, assume, random_alg_homotopy, random_alg_morphism, seeds, twisted_pair
from test_ainfty import two_dim


def setup(seed, L=3):
    A = algebra(seed)
    B = bar_construct(A, L)
    rng = random.Random(seed)
    T, T2 = twisted_pair(B, rng)
    return A, B, rng, from_twisted(T, A), from_twisted(T2, A)


def family(rng, A, B, MM, NN, degree=0):
    """Random degree-d family M -> N with components up to arity L+1 (not a morphism)."""
    F = gen_gmod_morphism(rng, B, MM.M.shift(1), NN.M.shift(1), degree)
    return unbridge_morphism(F, A, MM.M, NN.M)


def regular(nonassoc=False):
    """A = two_dim acting on a copy of itself by m_2."""
    A = two_dim(nonassoc)
    M = GradedSpace(A.base, [("pe", 0, None, 0), ("px", 0, None, 0)])
    m2 = HomMap(tensor(M, A.A), M, 0, {k: dict(v) for k, v in A.op(2).cols.items()})
    return A, M, AInfModule(A, M, {2: m2}, 2)


def pairs(f):
    return {n: c.cols for n, c in f.comps.items()}


# module identities ---------------------------------------------------------------

def test_module_examples():
    A = two_dim()
    M = GradedSpace(A.base, [("a", 0, None, 0), ("b", 1, None, 0), ("c", 2, None, 0)])
    assert check_module(AInfModule(A, M, {}, 2)).ok
    d = HomMap(tensor(M), M, 1, {(0,): {(1,): QQ(1)}, (1,): {(2,): QQ(1)}})
    res = check_module(AInfModule(A, M, {1: d}, 1), 1)
    assert not res.ok
    assert res.items[0][2] == (('a',), ('c',), QQ(1))  # (m_1)² sends a to c
    A, M, Mod = regular()
    assert check_module(Mod).ok
    m2 = Mod.op(2)
    assoc = m2 @ lazy_tensor(m2, identity(A.A)) - m2 @ lazy_tensor(identity(M), A.op(2))
    assert assoc.is_zero()
    A, M, Mod = regular(nonassoc=True)
    m2 = Mod.op(2)
    assoc = m2 @ lazy_tensor(m2, identity(A.A)) - m2 @ lazy_tensor(identity(M), A.op(2))
    defect = module_defect_classical(Mod, 3)
    assert not assoc.is_zero() and (defect == assoc or defect == -assoc)


@given(st.integers(**seeds))
def test_modules_and_mc_correspond(seed):
    A, B, rng, MM, NN = setup(seed)
    assert check_module(MM).ok
    T = to_twisted(MM, B)
    assert check_mc(B, T.M, T.u).ok
    back = from_twisted(T, A, MM.M)
    assert pairs(back.m) == pairs(MM.m)
    # a perturbed family fails on both sides
    bad = MM.m + family(rng, A, B, MM, MM, 1)
    if bad.equals(MM.m):
        return
    Bad = AInfModule(A, MM.M, bad.comps, bad.arity_bound, exact_upto=bad.exact_upto)
    Tb = to_twisted(Bad, B, verify=False)
    assert check_module(Bad).ok == check_mc(B, Tb.M, Tb.u).ok


def test_complex_goes_to_strict_twisted_module():
    A = algebra(11)
    B = bar_construct(A, 2)
    M = GradedSpace(B.base, [("a", 0, None, 0), ("b", 1, None, 0)])
    d = HomMap(tensor(M), M, 1, {(0,): {(1,): QQ(1)}})
    T = to_twisted(AInfModule(A, M, {1: d}, 1), B)
    assert not T.u.f1
    assert T.u0.cols == d.cols


# GMod-A and the bridge ------------------------------------------------------------

@given(st.integers(**seeds))
def test_dg_category_laws(seed):
    A, B, rng, MM, NN = setup(seed)
    n = B.L + 1
    f = family(rng, A, B, MM, NN, rng.choice((-1, 0, 1)))
    g = family(rng, A, B, NN, MM, rng.choice((-1, 0, 1)))
    gf = compose_mod(g, f, n)
    c1 = lambda x: x.comp(1) or x.zero_comp(1)
    assert c1(gf) == c1(g) @ c1(f)
    one_M, one_N = AInfModMorphism.identity(A, MM.M), AInfModMorphism.identity(A, NN.M)
    assert compose_mod(one_N, f, n).equals(f, n) and compose_mod(f, one_M, n).equals(f, n)
    assert delta_inf(one_M, n).is_zero()
    assert delta_inf(delta_inf(f, n), n).is_zero(n)
    lhs = delta_inf(gf, n)
    rhs = compose_mod(delta_inf(g, n), f, n) + compose_mod(g, delta_inf(f, n), n).scale(-1 if g.degree % 2 else 1)
    assert lhs.equals(rhs, n)
    # 𝔾 is a dg functor on stored data
    G = lambda x: bridge_morphism(x, B)
    assert G(gf) == compose(G(g), G(f))
    assert G(delta_inf(f, n)) == hat_delta(G(f))
    assert G(one_M) == GModMorphism.identity(B, MM.M.shift(1))


def test_truncation_too_small():
    A = algebra(12)
    B = bar_construct(A, 2)
    M = GradedSpace(B.base, [("a", 0, None, 0)])
    f = AInfModMorphism(A, M, M, 0, {}, 5)
    with pytest.raises(TruncationTooSmall):
        bridge_morphism(f, B)


@given(st.integers(**seeds))
def test_module_morphisms_through_bridge(seed):
    A, B, rng, MM, NN = setup(seed)
    T1, T2 = to_twisted(MM, B), to_twisted(NN, B)
    try:
        F = gen_twisted_morphism(T1, T2, rng)
    except GenerationFailed:
        assume(False)
    f = unbridge_morphism(F.f, A, MM.M, NN.M)
    assert check_mod_morphism(f, MM, NN).ok
    x = family(rng, A, B, MM, NN)
    chk = check_mod_morphism(x, MM, NN)
    Fx = TwistedMorphism(bridge_morphism(x, B, T1.M, T2.M), T1, T2, verify=False)
    from bocslab.twisted import check_twisted_morphism
    assert chk.ok == check_twisted_morphism(Fx).ok


# shift and J ---------------------------------------------------------------------

@given(st.integers(**seeds))
def test_shift_and_j(seed):
    A, B, rng, MM, NN = setup(seed)
    S = shift_mod(MM)
    if MM.op(1) is not None:
        assert S.op(1).cols == (-MM.op(1)).cols
    assert check_module(S).ok
    SS = shift_mod(S)
    assert pairs(SS.m) == pairs(MM.m)
    J, _ = jfun_mod(MM)
    assert check_module(J).ok
    TS, ST = to_twisted(S, B), shift(to_twisted(MM, B))
    assert TS.u0.cols == ST.u0.cols and {c: x.cols for c, x in TS.u.f1.items()} == {
        c: x.cols for c, x in ST.u.f1.items()}
    TJ, JT = to_twisted(J, B), jfun(to_twisted(MM, B)).module
    assert TJ.u0.cols == JT.u0.cols and {c: x.cols for c, x in TJ.u.f1.items()} == {
        c: x.cols for c, x in JT.u.f1.items()}


def test_shift_of_zero_module():
    A = two_dim()
    Z = AInfModule(A, GradedSpace(A.base, []), {}, 2)
    assert shift_mod(Z).M.dim == 0 and not shift_mod(Z).ops


# homotopies -----------------------------------------------------------------------

def test_homotopy_of_complexes():
    A = two_dim()
    M = GradedSpace(A.base, [("a", 0, None, 0), ("b", 1, None, 0), ("c", 1, None, 0), ("d", 2, None, 0)])
    d = HomMap(tensor(M), M, 1, {(0,): {(1,): QQ(1)}, (2,): {(3,): QQ(1)}})
    Mod = AInfModule(A, M, {1: d}, 1)
    g1 = HomMap(tensor(M), M, 0, {(0,): {(0,): QQ(2)}, (1,): {(1,): QQ(2)}})
    h1 = HomMap(tensor(M), M, -1, {(1,): {(0,): QQ(1)}, (3,): {(2,): QQ(3)}})
    f = AInfModMorphism(A, M, M, 0, {1: g1 + d @ h1 + h1 @ d})
    g = AInfModMorphism(A, M, M, 0, {1: g1})
    h = AInfModMorphism(A, M, M, -1, {1: h1})
    assert check_mod_homotopy(h, f, g, Mod, Mod).ok
    assert check_mod_homotopy(AInfModMorphism.zero(A, M, M, -1), g, g, Mod, Mod).ok
    assert not f.equals(g)
    assert not check_mod_homotopy(AInfModMorphism.zero(A, M, M, -1), f, g, Mod, Mod).ok


@given(st.integers(**seeds))
def test_homotopies_through_bridge(seed):
    A, B, rng, MM, NN = setup(seed)
    T1, T2 = to_twisted(MM, B), to_twisted(NN, B)
    try:
        G = gen_twisted_morphism(T1, T2, rng)
    except GenerationFailed:
        assume(False)
    k = gen_gmod_morphism(rng, B, T1.M, T2.M, -1)
    F = G.f + hat_delta(k) + compose(T2.u, k) + compose(k, T1.u)
    un = lambda x: unbridge_morphism(x, A, MM.M, NN.M)
    assert check_mod_homotopy(un(k), un(F), un(G.f), MM, NN).ok
    assert check_mod_morphism(un(F), MM, NN).ok


# Ψ, Δ and restriction ---------------------------------------------------------------

def test_psi_of_strict_maps():
    A = algebra(13)
    B = bar_construct(A, 3)
    assert psi_of_morphism(AInfAlgMorphism.identity(A), B, B).map == identity(B.C)
    rng = random.Random(13)
    p1 = random_hom(rng, A.A, A.A, 0, 0.7)
    phi = AInfAlgMorphism(A, A, {1: p1}, 1)
    P = psi_of_morphism(phi, B, B, verify=False).map
    for c, w in enumerate(B.words):
        want = {}
        for imgs in itertools.product(*[list(p1.cols.get((a,), {}).items()) for a in w]):
            key = tuple(b[0] for b, _ in imgs)
            v = QQ(1)
            for _, x in imgs:
                v = v * x
            want[(B.word_index[key],)] = want.get((B.word_index[key],), 0) + v
        want = {k: v for k, v in want.items() if v}
        assert P.cols.get((c,), {}) == want


@given(st.integers(**seeds))
def test_delta_identities(seed):
    A, B, rng, MM, NN = setup(seed)
    L = B.L
    f = random_alg_morphism(rng, A, L)
    h = random_alg_homotopy(rng, A, L)
    g = homotopic_morphism(f, h, L)
    Pf, Pg = psi_of_morphism(f, B, B), psi_of_morphism(g, B, B)
    zero = AInfAlgHomotopy(A, A, {}, 1)
    assert delta_coderivation(zero, f, g, B, B, -1).is_zero()
    z = lambda x, n: x.comp(n) or HomMap.zero(A.power(n), A.A, 1 - n)
    diff = {n: z(f, n) - z(g, n) for n in range(1, L + 1)}
    assert delta_coderivation(diff, f, g, B, B, 0) == Pf.map - Pg.map
    Dh = delta_coderivation(h, f, g, B, B, -1)
    assert delta_coderivation(odot_family(h, f, g, L), f, g, B, B, 0) == odot_coderivation(Dh, B, B)
    # homotopic morphisms give homotopic bocs morphisms
    assert Pf.map - Pg.map == odot_coderivation(Dh, B, B)


@given(st.integers(**seeds))
def test_restriction(seed):
    A, B, rng, MM, NN = setup(seed)
    L = B.L
    n = L + 1
    one = AInfAlgMorphism.identity(A)
    f = family(rng, A, B, MM, NN)
    assert restrict_mod(one, f).equals(f)
    phi = random_alg_morphism(rng, A, L)
    P = psi_of_morphism(phi, B, B)
    Rf = restrict_mod(phi, f, n)
    assert bridge_morphism(Rf, B) == restrict(P, bridge_morphism(f, B))
    RM = restrict_module(phi, MM, n)
    assert check_module(RM).ok
    assert to_twisted(RM, B).u == restrict_twisted(P, to_twisted(MM, B)).u
    # null-homotopic stays null-homotopic
    T1, T2 = to_twisted(MM, B), to_twisted(NN, B)
    k = gen_gmod_morphism(rng, B, T1.M, T2.M, -1)
    z = unbridge_morphism(hat_delta(k) + compose(T2.u, k) + compose(k, T1.u), A, MM.M, NN.M)
    kk = unbridge_morphism(k, A, MM.M, NN.M)
    zero = AInfModMorphism.zero(A, MM.M, NN.M)
    RN = restrict_module(phi, NN, n)
    assert check_mod_homotopy(restrict_mod(phi, kk, n), restrict_mod(phi, z, n), zero, RM, RN).ok


def test_strict_restriction():
    A = two_dim()
    rng = random.Random(14)
    M = GradedSpace(A.base, [("a", 0, None, 0), ("b", 0, None, 0)])
    p1 = random_hom(rng, A.A, A.A, 0, 1.0)
    phi = AInfAlgMorphism(A, A, {1: p1}, 1)
    f = AInfModMorphism(A, M, M, 0, {n: random_hom(rng, tensor(M, *[A.A] * (n - 1)), M, 1 - n, 0.8)
                                     for n in (1, 2, 3)}, 3)
    R = restrict_mod(phi, f)
    for n in (2, 3):
        want = (f.comp(n) or f.zero_comp(n)) @ lazy_tensor(identity(M), *[p1] * (n - 1))
        assert (R.comp(n) or R.zero_comp(n)) == want


# homology and quasi-isomorphisms -------------------------------------------------------

def test_homology_examples():
    base = BaseRing(1)
    M = GradedSpace(base, [("a", 0, None, 0), ("b", 1, None, 0)])
    d = HomMap(M, M, 1, {(0,): {(1,): QQ(1)}})
    assert not any(homology(M, d).values())
    N = GradedSpace(base, [("a", 0, None, 0), ("b", 1, None, 0), ("c", 1, None, 0)])
    assert {k: v for k, v in homology(N, HomMap.zero(N, N, 1)).items() if v} == {(0, 0): 1, (1, 0): 2}
    P = GradedSpace(base, [("a", 0, None, 0), ("b", 1, None, 0), ("c", 1, None, 0), ("d", 2, None, 0)])
    d3 = HomMap(P, P, 1, {(0,): {(1,): QQ(1), (2,): QQ(1)}, (1,): {(3,): QQ(1)}, (2,): {(3,): QQ(-1)}})
    assert not any(homology(P, d3).values())
    bad = HomMap(P, P, 1, {(0,): {(1,): QQ(1)}, (1,): {(3,): QQ(1)}})
    with pytest.raises(NotAComplex):
        homology(P, bad)


@given(st.integers(**seeds))
def test_quasi_iso_inverse(seed):
    A = algebra(seed)
    B = bar_construct(A, 3)
    rng = random.Random(seed)
    try:
        F = gen_quasi_iso(rng, B)
    except GenerationFailed:
        assume(False)
    MM, NN = from_twisted(F.src, A), from_twisted(F.tgt, A)
    f = unbridge_morphism(F.f, A, MM.M, NN.M)
    assert is_quasi_iso(f, MM, NN)
    g, h_fg, h_gf = mod_homotopy_inverse(f, MM, NN, B)
    assert check_mod_morphism(g, NN, MM).ok
    assert check_mod_homotopy(h_gf, compose_mod(g, f), AInfModMorphism.identity(A, MM.M), MM, MM).ok
    assert check_mod_homotopy(h_fg, compose_mod(f, g), AInfModMorphism.identity(A, NN.M), NN, NN).ok
    assert not is_quasi_iso(AInfModMorphism.zero(A, MM.M, NN.M), MM, NN) or not any(
        homology(MM.M, MM.differential()).values())
