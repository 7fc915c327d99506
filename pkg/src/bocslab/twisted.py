"""Twisted modules (M, u) over a triangular bocs and their Frobenius toolkit.

u is a degree 1 endomorphism of M in GMod-B with δ̂(u) + u*u = 0.  A
twisted morphism f: (M,u) -> (N,v) of degree d satisfies
δ̂(f) + v*f − (−1)^d f*u = 0, and a homotopy h between degree 0 morphisms
satisfies f − g = δ̂(h) + v*h + h*u.

Shift convention: T(M,u) = (M[1], −σ*u*σ⁻¹) with σ = σ_M the strict degree
−1 identity on labels, and J(M,u) = (M ⊕ M[1], [[u, σ⁻¹], [0, −σ*u*σ⁻¹]]).
"""
from __future__ import annotations

from dataclasses import dataclass

from . import linalg
from .ainfty import CheckResult
from .bocs import TriangularBocs, decompose_cycle, layer_split
from .errors import (ChainMapDefect, InternalError, ModuleMismatch, NotAcyclic, NotATwistedMorphism,
                     NotComposableToZero, NotExactOnComponents, NotIdempotent, NotInvertible,
                     NotQuasiIso)
from .gmodb import (GModMorphism, block_gmod, compose, gmod_block, hat_delta, invert, r_h, restrict)
from .graded import (GradedSpace, HomMap, dense_block, direct_sum, hom_inverse, homology_dims,
                     identity, sigma, sigma_inv, solve_splitting, _blockpairs)


def _sgn(d: int) -> int:
    return -1 if d % 2 else 1


def _layer_defects(res: CheckResult, B: TriangularBocs, defect: GModMorphism):
    """Record a GMod-B identity per layer (0 = first component)."""
    res.add(0, defect.f0)
    for lay in range(1, B.L + 1):
        bad = None
        for c in B.elements(lay):
            x = defect.f1.get(c)
            if x is not None and not x.is_zero():
                bad = (B.C.labels[c],) + tuple(x.witness())
                break
        res.add_flag(lay, bad is None, bad)
    return res


# twisted modules -------------------------------------------------------------

class TwistedModule:
    """(M, u) over the bocs B; MC is checked up to level L on construction."""

    def __init__(self, bocs: TriangularBocs, M: GradedSpace, u: GModMorphism | None = None,
                 verify: bool = True):
        self.bocs = bocs
        self.M = M
        self.u = u if u is not None else GModMorphism(bocs, M, M, 1)
        if self.u.degree != 1 or self.u.dom != M or self.u.cod != M:
            raise ModuleMismatch("u must be a degree 1 endomorphism of M")
        self.mc_verified_level = None
        if verify:
            chk = check_mc(self.bocs, M, self.u)
            if not chk.ok:
                raise NotATwistedMorphism(f"Maurer-Cartan fails: {chk.first_failure}")
            self.mc_verified_level = bocs.L

    @property
    def u0(self) -> HomMap:
        return self.u.f0

    def identity(self) -> "TwistedMorphism":
        return TwistedMorphism(GModMorphism.identity(self.bocs, self.M), self, self, verify=False)

    def __repr__(self):
        return f"TwistedModule(dim={self.M.dim}, L={self.bocs.L})"


def mc_defect(u: GModMorphism) -> GModMorphism:
    return hat_delta(u) + compose(u, u)


def check_mc(B: TriangularBocs, M: GradedSpace, u: GModMorphism) -> CheckResult:
    res = CheckResult("maurer_cartan")
    res.add_flag("degree", u.degree == 1)
    return _layer_defects(res, B, mc_defect(u))


class TwistedMorphism:
    """A GMod-B morphism f between twisted modules, checked on construction."""

    def __init__(self, f: GModMorphism, src: TwistedModule, tgt: TwistedModule, verify: bool = True):
        if f.dom != src.M or f.cod != tgt.M:
            raise ModuleMismatch("morphism endpoints do not match the twisted modules")
        self.f, self.src, self.tgt = f, src, tgt
        if verify:
            chk = check_twisted_morphism(f, src, tgt)
            if not chk.ok:
                raise NotATwistedMorphism(f"not a twisted morphism: {chk.first_failure}")

    @property
    def degree(self):
        return self.f.degree

    def __mul__(self, other: "TwistedMorphism") -> "TwistedMorphism":
        return TwistedMorphism(compose(self.f, other.f), other.src, self.tgt, verify=False)

    def __repr__(self):
        return f"TwistedMorphism({self.f!r})"


def twisted_defect(f: GModMorphism, src: TwistedModule, tgt: TwistedModule) -> GModMorphism:
    return hat_delta(f) + compose(tgt.u, f) - compose(f, src.u).scale(_sgn(f.degree))


def check_twisted_morphism(f, src: TwistedModule | None = None, tgt: TwistedModule | None = None) -> CheckResult:
    if isinstance(f, TwistedMorphism):
        f, src, tgt = f.f, f.src, f.tgt
    res = CheckResult("twisted_morphism")
    return _layer_defects(res, f.bocs, twisted_defect(f, src, tgt))


def homotopy_defect(h: GModMorphism, f: GModMorphism, g: GModMorphism,
                    src: TwistedModule, tgt: TwistedModule) -> GModMorphism:
    """f − g − (δ̂(h) + v*h + h*u)."""
    return f - g - hat_delta(h) - compose(tgt.u, h) - compose(h, src.u)


def check_homotopy(h: GModMorphism, f, g, src: TwistedModule | None = None,
                   tgt: TwistedModule | None = None) -> CheckResult:
    """f − g = δ̂(h) + v*h + h*u, layer by layer."""
    if isinstance(f, TwistedMorphism):
        src, tgt, f = f.src, f.tgt, f.f
    if isinstance(g, TwistedMorphism):
        g = g.f
    res = CheckResult("homotopy")
    res.add_flag("degree", h.degree == -1 or h.is_zero())
    return _layer_defects(res, f.bocs, homotopy_defect(h, f, g, src, tgt))


# transport and shift -----------------------------------------------------------

def transport(h: GModMorphism, T: TwistedModule, verify: bool = True):
    """v = (−1)^{|h|} h*u*h⁻¹ − δ̂(h)*h⁻¹; returns (N, v) and h as a twisted morphism."""
    hinv = invert(h, verify=verify)
    v = compose(compose(h, T.u), hinv).scale(_sgn(h.degree)) - compose(hat_delta(h), hinv)
    N = TwistedModule(T.bocs, h.cod, v, verify=verify)
    return N, TwistedMorphism(h, T, N, verify=verify)


def sigma_gmod(B, M: GradedSpace, M1: GradedSpace | None = None) -> GModMorphism:
    M1 = M1 or M.shift(1)
    return GModMorphism.strict(B, sigma(M, M1))


def sigma_inv_gmod(B, M: GradedSpace, M1: GradedSpace | None = None) -> GModMorphism:
    M1 = M1 or M.shift(1)
    return GModMorphism.strict(B, sigma_inv(M, M1))


def conj_shift(f: GModMorphism, M1=None, N1=None) -> GModMorphism:
    """f[1] = σ_N * f * σ_M⁻¹ (plain conjugation)."""
    B = f.bocs
    M1 = M1 or f.dom.shift(1)
    N1 = N1 or f.cod.shift(1)
    return compose(compose(sigma_gmod(B, f.cod, N1), f), sigma_inv_gmod(B, f.dom, M1))


def shift(T: TwistedModule, verify: bool = True) -> TwistedModule:
    """T(M,u) = (M[1], −u[1])."""
    M1 = T.M.shift(1)
    return TwistedModule(T.bocs, M1, -conj_shift(T.u, M1, M1), verify=verify)


def shift_morphism(f: TwistedMorphism, verify: bool = True) -> TwistedMorphism:
    src, tgt = shift(f.src, False), shift(f.tgt, False)
    return TwistedMorphism(conj_shift(f.f, src.M, tgt.M), src, tgt, verify=verify)


def unshift(T: TwistedModule, M: GradedSpace, verify: bool = True) -> TwistedModule:
    """T⁻¹ for a module of the form (M[1], w): (M, −σ⁻¹*w*σ)."""
    B = T.bocs
    w = compose(compose(sigma_inv_gmod(B, M, T.M), T.u), sigma_gmod(B, M, T.M))
    return TwistedModule(B, M, -w, verify=verify)


# J and the natural isomorphisms η ---------------------------------------------

@dataclass
class JData:
    module: TwistedModule
    sum: object           # DirectSum M ⊕ M[1]
    base: TwistedModule
    shifted: TwistedModule


def jfun(T: TwistedModule, verify: bool = True) -> JData:
    B = T.bocs
    TM = shift(T, verify=False)
    S = direct_sum(T.M, TM.M, tags=("0", "1"))
    w = block_gmod(B, S, S, [[T.u, sigma_inv_gmod(B, T.M, TM.M)], [None, TM.u]], 1)
    return JData(TwistedModule(B, S.space, w, verify=verify), S, T, TM)


def jfun_morphism(f: TwistedMorphism, verify: bool = True) -> TwistedMorphism:
    """J(f) = diag(f, f[1])."""
    JM, JN = jfun(f.src, False), jfun(f.tgt, False)
    g = block_gmod(f.f.bocs, JM.sum, JN.sum,
                   [[f.f, None], [None, conj_shift(f.f, JM.shifted.M, JN.shifted.M)]], f.degree)
    return TwistedMorphism(g, JM.module, JN.module, verify=verify)


def eta1_complete(f1: GModMorphism, src: TwistedModule, tgt: TwistedModule,
                  verify: bool = True) -> TwistedMorphism:
    """η₁⁻¹(f₁) = (f₁, f₂)ᵗ: (M,u) -> J(N,v), f₂ = σ_N*(f₁*u − δ̂(f₁) − v*f₁)."""
    B = f1.bocs
    J = jfun(tgt, verify=False)
    s = sigma_gmod(B, tgt.M, J.shifted.M)
    f2 = compose(s, compose(f1, src.u) - hat_delta(f1) - compose(tgt.u, f1))
    F = block_gmod(B, _single(src.M), J.sum, [[f1], [f2]], f1.degree)
    return TwistedMorphism(F, src, J.module, verify=verify)


def eta2_complete(g2: GModMorphism, src: TwistedModule, tgt: TwistedModule,
                  verify: bool = True) -> TwistedMorphism:
    """η₂⁻¹(g₂) = (g₁, g₂): J(M,u) -> (N,v), g₁ = (δ̂(g₂) + v*g₂ − g₂*u_{M[1]})*σ_M."""
    B = g2.bocs
    J = jfun(src, verify=False)
    s = sigma_gmod(B, src.M, J.shifted.M)
    g1 = compose(hat_delta(g2) + compose(tgt.u, g2) - compose(g2, J.shifted.u), s)
    G = block_gmod(B, J.sum, _single(tgt.M), [[g1, g2]], g2.degree)
    return TwistedMorphism(G, J.module, tgt, verify=verify)


def eta1(F: TwistedMorphism, J: JData) -> GModMorphism:
    """η₁(F) = first block of a morphism into J(N,v)."""
    return gmod_block(F.f, _single(F.src.M), J.sum, 0, 0)


def eta2(G: TwistedMorphism, J: JData) -> GModMorphism:
    """η₂(G) = second block of a morphism out of J(M,u)."""
    return gmod_block(G.f, J.sum, _single(G.tgt.M), 0, 1)


def _single(M: GradedSpace):
    from .graded import DirectSum
    return DirectSum(M, (M,), (0,))


def alpha(T: TwistedModule, verify: bool = True) -> TwistedMorphism:
    """α = η₁⁻¹(𝕀_M): (M,u) -> J(M,u)."""
    return eta1_complete(GModMorphism.identity(T.bocs, T.M), T, T, verify=verify)


def beta(T: TwistedModule, verify: bool = True) -> TwistedMorphism:
    """β = η₂⁻¹(𝕀_{M[1]}): J(M,u) -> T(M,u)."""
    TM = shift(T, verify=False)
    return eta2_complete(GModMorphism.identity(T.bocs, TM.M), T, TM, verify=verify)


def is_conflation(f: TwistedMorphism, g: TwistedMorphism) -> CheckResult:
    """g*f = 0 and 0 -> M -> E -> N -> 0 exact on first components."""
    res = CheckResult("conflation")
    res.add("composite", _flatten(compose(g.f, f.f)))
    res.add_flag("exact", _short_exact(f.f.f0, g.f.f0))
    return res


def _flatten(x: GModMorphism) -> HomMap:
    """All components of x stacked into one HomMap (zero iff x = 0)."""
    if x.is_zero():
        return HomMap.zero(x.dom, x.cod, x.degree)
    if not x.f0.is_zero():
        return x.f0
    return next(iter(x.f1.values()))


def _rank(f: HomMap) -> int:
    r = 0
    for _, didx, cidx in _blockpairs(f):
        if cidx and didx:
            r += linalg.rank(dense_block(f, cidx, didx), len(didx))
    return r


def _short_exact(f0: HomMap, g0: HomMap) -> bool:
    if not (g0 @ f0).is_zero():
        return False
    M, E, N = f0.dom, f0.cod, g0.cod
    return _rank(f0) == M.dim and _rank(g0) == N.dim and E.dim == M.dim + N.dim


# factorization through J ----------------------------------------------------------

def j_contraction(J: JData) -> GModMorphism:
    """k_J = [[0,0],[σ,0]] with 𝕀 = δ̂(k) + w*k + k*w on J(M,u)."""
    B = J.module.bocs
    s = sigma_gmod(B, J.base.M, J.shifted.M)
    return block_gmod(B, J.sum, J.sum, [[None, None], [s, None]], -1)


def factor_nullhomotopic(f: TwistedMorphism, k: GModMorphism, verify: bool = True) -> TwistedMorphism:
    """For f = δ̂(k) + v*k + k*u, return h̃: J(M,u) -> (N,v) with f = h̃*α_M."""
    B = f.f.bocs
    TM = shift(f.src, verify=False)
    h2 = compose(k, sigma_inv_gmod(B, f.src.M, TM.M))
    ht = eta2_complete(h2, f.src, f.tgt, verify=verify)
    if verify:
        if not compose(ht.f, alpha(f.src, verify=False).f) == f.f:
            raise InternalError("factorization through J does not reproduce f")
    return ht


def homotopy_from_factorization(a: TwistedMorphism, b: TwistedMorphism, J: JData) -> GModMorphism:
    """If f = b*a through J(X,x), then b*k_J*a is a null-homotopy of f."""
    return compose(compose(b.f, j_contraction(J)), a.f)


def homotopy_from_alpha_factor(ht: TwistedMorphism, J: JData) -> GModMorphism:
    """k = h₂*σ_M for f = h̃*α_M."""
    B = ht.f.bocs
    h2 = gmod_block(ht.f, J.sum, _single(ht.tgt.M), 0, 1)
    return compose(h2, sigma_gmod(B, J.base.M, J.shifted.M))


# null-homotopies ----------------------------------------------------------------

def homology_witness(M: GradedSpace, d: HomMap):
    """First (degree, idempotent) block with nonzero homology and a cycle there."""
    F = M.field
    dims = homology_dims(M, d)
    for key, dim in dims.items():
        if dim == 0:
            continue
        deg, l, r = key
        idx = M.blocks()[key]
        out_idx = M.blocks().get((deg + d.degree, l, r), [])
        in_idx = M.blocks().get((deg - d.degree, l, r), [])
        A = dense_block(d, out_idx, idx) if out_idx else []
        Z = linalg.nullspace(A, len(idx), F.zero) if out_idx else \
            [[F.one if a == j else F.zero for a in range(len(idx))] for j in range(len(idx))]
        Bd = dense_block(d, idx, in_idx)
        bvecs = [[Bd[i][j] for i in range(len(idx))] for j in range(len(in_idx))]
        base_rank = linalg.rank(bvecs, len(idx)) if bvecs else 0
        for z in Z:
            if linalg.rank(bvecs + [z], len(idx)) > base_rank:
                cyc = {M.labels[idx[a]]: x for a, x in enumerate(z) if x}
                return {"degree": deg, "idempotent": r, "dimension": dim, "cycle": cyc}
    return None


def contraction(M: GradedSpace, d: HomMap) -> HomMap:
    """h with d h + h d = id for an acyclic complex (M, d); NotAcyclic otherwise."""
    wit = homology_witness(M, d)
    if wit is not None:
        raise NotAcyclic(f"homology in degree {wit['degree']} at idempotent {wit['idempotent']}", wit)
    g = solve_splitting(d).ginv
    P = d @ g + g @ d
    try:
        Pinv = hom_inverse(P)
    except NotInvertible as e:
        raise InternalError(f"contraction failed on an acyclic complex: {e}") from None
    h = g @ Pinv
    if not (d @ h + h @ d - identity(M)).is_zero():
        raise InternalError("contraction identity fails")
    return h


def _comp_key_vec(x: GModMorphism, vec: dict, deg: int) -> dict:
    """x¹ evaluated on a sparse vector of C̄ as raw column dicts."""
    acc = {}
    for c, a in vec.items():
        xc = x.f1.get(c)
        if xc is None:
            continue
        for k, col in xc.cols.items():
            t = acc.setdefault(k, {})
            for r, v in col.items():
                t[r] = t.get(r, 0) + a * v
    return acc


def _hm(M, N, deg, acc) -> HomMap:
    return HomMap(M, N, deg, acc)


def nullhomotopy(T: TwistedModule, verify: bool = True) -> GModMorphism:
    """h of degree −1 with 𝕀 = δ̂(h) + u*h + h*u, built layer by layer.

    Each new layer is split as C̄_{i+1} = C̄_i ⊕ V ⊕ W with V made of
    δ-cycles.  For c in V, and then for c in W, the layer equation reads
    u⁰X + Xu⁰ = −R(c) with R(c) already known; R(c) commutes with u⁰ and
    X = −h⁰R(c) solves it.  h¹ on the original basis follows by linearity.
    """
    B, M = T.bocs, T.M
    u = T.u
    h0 = contraction(M, T.u0)
    h1 = {}
    ls = layer_split(B)

    def hvec(vec):
        return _comp_key_vec(GModMorphism(B, M, M, -1, None, h1), vec, -1)

    def R(vec: dict, hd: dict | None, deg: int) -> HomMap:
        Uc = _hm(M, M, 1 + deg, _comp_key_vec(u, vec, 1))
        tot = Uc @ h0 + h0 @ Uc
        quad = {}
        for c, a in vec.items():
            for (x, y), coef in B.mu(c).items():
                for lhs, rhs in ((u.f1.get(y), h1.get(x)), (h1.get(y), u.f1.get(x))):
                    if lhs is None or rhs is None:
                        continue
                    for k, col in (lhs @ rhs).cols.items():
                        t = quad.setdefault(k, {})
                        for r, v in col.items():
                            t[r] = t.get(r, 0) + a * coef * v
        tot = tot + _hm(M, M, deg, quad)
        if hd:
            # δ̂(h)¹(c)[m] = (−1)^{|m|} h¹(δc)[m]
            signed = {}
            for (m,), col in hd.items():
                sg = -1 if M.degrees[m] % 2 else 1
                signed[(m,)] = {r: sg * v for r, v in col.items()}
            tot = tot + _hm(M, M, deg, signed)
        return tot

    def solve_one(vec, hd, deg, what):
        Rc = R(vec, hd, deg)
        if not (T.u0 @ Rc - Rc @ T.u0).is_zero():
            raise ChainMapDefect(f"{what}: obstruction does not commute with u⁰")
        X = -(h0 @ Rc)
        if not (T.u0 @ X + X @ T.u0 + Rc).is_zero():
            raise ChainMapDefect(f"{what}: contraction does not solve the layer equation")
        return X

    for lay in range(1, B.L + 1):
        splits = ls.layers.get(lay, [])
        hV = {}
        for bs in splits:
            hV[bs.key] = [solve_one(v, None, bs.key[0], f"layer {lay} cycle {j}")
                          for j, v in enumerate(bs.V)]
        hW = {}
        for bs in splits:
            out = []
            for w in bs.W:
                hd = None
                dv = B.delta(w)
                if dv:
                    dec = decompose_cycle(B, ls, lay, dv)
                    if dec is None:
                        raise InternalError(f"δ({B.C.labels[w]}) leaves C̄_{lay - 1} ⊕ V_{lay}")
                    rest, coeffs = dec
                    hd = hvec(rest)
                    for (key, j), a in coeffs.items():
                        for k, col in hV[key][j].cols.items():
                            t = hd.setdefault(k, {})
                            for r, v in col.items():
                                t[r] = t.get(r, 0) + a * v
                out.append(solve_one({w: B.field.one}, hd, bs.key[0], f"layer {lay} element {B.C.labels[w]}"))
            hW[bs.key] = out
        new = {}
        for bs in splits:
            deg = bs.key[0]
            for b in bs.new:
                rest, al, be = bs.coords[b]
                acc = hvec(rest)
                for parts, coefs in ((hV[bs.key], al), (hW[bs.key], be)):
                    for j, a in coefs.items():
                        for k, col in parts[j].cols.items():
                            t = acc.setdefault(k, {})
                            for r, v in col.items():
                                t[r] = t.get(r, 0) + a * v
                X = _hm(M, M, deg - 1, acc)
                if not X.is_zero():
                    new[b] = X
        h1.update(new)
    h = GModMorphism(B, M, M, -1, h0, h1)
    if verify:
        chk = check_homotopy(h, GModMorphism.identity(B, M), GModMorphism.zero(B, M, M), T, T)
        if not chk.ok:
            raise InternalError(f"null-homotopy identity fails: {chk.first_failure}")
    return h


# idempotents --------------------------------------------------------------------

@dataclass
class IdempotentSplit:
    iso: TwistedMorphism          # (M,u) -> (M₁⊕M₂, v)
    first: TwistedModule
    second: TwistedModule
    sum: object                   # DirectSum M₁ ⊕ M₂
    module: TwistedModule


def straighten_idempotent(e: GModMorphism) -> GModMorphism:
    """Invertible h with h*e*h⁻¹ strict, for an idempotent e of GMod-B.

    Layer by layer h_i = 𝕀 + x with x¹(c) = e_i¹(c)(1 − 2e⁰) on the new
    elements c of layer i; conjugating by h_i kills e¹ on layer i.
    """
    B, M = e.bocs, e.dom
    one = identity(M)
    f0 = one - e.f0.scale(2)
    h = GModMorphism.identity(B, M)
    cur = e
    for lay in range(1, B.L + 1):
        x1 = {c: cur.f1[c] @ f0 for c in B.elements(lay) if c in cur.f1}
        if not x1:
            continue
        hi = GModMorphism(B, M, M, 0, one, x1)
        cur = compose(compose(hi, cur), invert(hi, verify=False))
        h = compose(hi, h)
    if cur.f1:
        raise InternalError("idempotent straightening left higher components")
    return h


def _idempotent_bases(e0: HomMap):
    """Per block, image vectors of e⁰ and of 1 − e⁰ (pivot order = label order)."""
    M = e0.dom
    f0 = identity(M) - e0
    im, ker = [], []
    for key, idx in M.blocks().items():
        for mat, out in ((e0, im), (f0, ker)):
            A = dense_block(mat, idx, idx)
            cols = [[A[i][j] for i in range(len(idx))] for j in range(len(idx))]
            for p in linalg.independent_subset(cols, len(idx)):
                out.append((key, {(idx[i],): x for i, x in enumerate(cols[p]) if x}))
    return im, ker


def split_idempotent(e: TwistedMorphism, verify: bool = True) -> IdempotentSplit:
    f = e.f
    if f.degree != 0 or f.dom != f.cod or not compose(f, f) == f:
        raise NotIdempotent("e*e ≠ e")
    B, M, T = f.bocs, f.dom, e.src
    h = straighten_idempotent(f)
    e2 = compose(compose(h, f), invert(h, verify=False))
    im, ker = _idempotent_bases(e2.f0)
    base = M.base
    M1 = GradedSpace(base, [(f"i{k}", key[0], None, key[2]) for k, (key, _) in enumerate(im)], name="M1")
    M2 = GradedSpace(base, [(f"k{k}", key[0], None, key[2]) for k, (key, _) in enumerate(ker)], name="M2")
    S = direct_sum(M1, M2, tags=("1", "2"))
    # P⁻¹: M₁ ⊕ M₂ -> M sends basis vectors to the chosen image/kernel vectors
    cols = {}
    for k, (_, v) in enumerate(im + ker):
        cols[(k,)] = dict(v)
    Pinv = HomMap(S.space, M, 0, cols, clean=False)
    P = hom_inverse(Pinv)
    H = compose(GModMorphism.strict(B, P), h)
    N, Htw = transport(H, T, verify=verify)
    v = N.u
    v1 = gmod_block(v, S, S, 0, 0)
    v2 = gmod_block(v, S, S, 1, 1)
    if verify:
        off = _flatten(gmod_block(v, S, S, 0, 1)), _flatten(gmod_block(v, S, S, 1, 0))
        if not (off[0].is_zero() and off[1].is_zero()):
            raise InternalError("transported differential is not block diagonal")
        E = compose(compose(H, f), invert(H, verify=False))
        D = block_gmod(B, S, S, [[GModMorphism.identity(B, M1), None], [None, None]], 0)
        if not E == D:
            raise InternalError("h*e*h⁻¹ ≠ diag(𝕀, 0)")
    return IdempotentSplit(Htw, TwistedModule(B, M1, v1, verify=verify),
                           TwistedModule(B, M2, v2, verify=verify), S, N)


# conflations --------------------------------------------------------------------

@dataclass
class Straightened:
    h: TwistedMorphism            # (E,u_E) -> (E,u'_E)
    f: TwistedMorphism            # strict (f⁰,0)
    g: TwistedMorphism            # strict (g⁰,0)
    middle: TwistedModule


def straighten_conflation(f: TwistedMorphism, g: TwistedMorphism, verify: bool = True) -> Straightened:
    """Automorphism h of E with h*f and g*h⁻¹ strict.

    Step 1: f = (𝕀 + x)*(f⁰,0) for x = (0, f¹)*(p⁰,0), p⁰ a retraction of f⁰.
    Step 2: g*(𝕀 + x) = (g⁰,0)*(𝕀 + y) for y = (s⁰,0)*(0, g'¹), s⁰ a section of g⁰.
    Then h = (𝕀 + y)*(𝕀 + x)⁻¹.
    """
    ff, gg = f.f, g.f
    if not compose(gg, ff).is_zero():
        raise NotComposableToZero("g*f ≠ 0")
    if not _short_exact(ff.f0, gg.f0):
        raise NotExactOnComponents("first components are not short exact")
    B, E = ff.bocs, ff.cod
    one = identity(E)
    p0 = solve_splitting(ff.f0).ginv     # p⁰f⁰ = 1 since f⁰ is injective
    s0 = solve_splitting(gg.f0).ginv     # g⁰s⁰ = 1 since g⁰ is surjective
    x = GModMorphism(B, E, E, 0, one, {c: v @ p0 for c, v in ff.f1.items()})
    h1 = invert(x, verify=verify)
    g1 = compose(gg, x)
    y = GModMorphism(B, E, E, 0, one, {c: s0 @ v for c, v in g1.f1.items()})
    h = compose(y, h1)
    N, htw = transport(h, g.src, verify=verify)
    fs = TwistedMorphism(compose(h, ff), f.src, N, verify=verify)
    gs = TwistedMorphism(compose(gg, invert(h, verify=False)), N, g.tgt, verify=verify)
    if fs.f.f1 or gs.f.f1:
        raise InternalError("straightening left higher components")
    return Straightened(htw, fs, gs, N)


# cones and homotopy inverses -------------------------------------------------------

@dataclass
class Cone:
    module: TwistedModule
    sum: object                   # DirectSum M[1] ⊕ N
    inc: TwistedMorphism          # N -> C_f
    out: TwistedMorphism          # C_f -> M[1]
    shifted: TwistedModule        # T(M,u)


def cone(f: TwistedMorphism, verify: bool = True) -> Cone:
    """C_f = (M[1] ⊕ N, [[−u[1], 0], [f*σ_M⁻¹, v]])."""
    if f.degree != 0:
        raise ValueError("cone of a degree 0 morphism")
    B = f.f.bocs
    TM = shift(f.src, verify=False)
    S = direct_sum(TM.M, f.tgt.M, tags=("1", "0"))
    lower = compose(f.f, sigma_inv_gmod(B, f.src.M, TM.M))
    w = block_gmod(B, S, S, [[TM.u, None], [lower, f.tgt.u]], 1)
    try:
        C = TwistedModule(B, S.space, w, verify=verify)
    except NotATwistedMorphism as e:
        raise InternalError(f"cone differential fails Maurer-Cartan: {e}") from None
    idN = GModMorphism.identity(B, f.tgt.M)
    idT = GModMorphism.identity(B, TM.M)
    inc = TwistedMorphism(block_gmod(B, _single(f.tgt.M), S, [[None], [idN]], 0), f.tgt, C, verify=verify)
    out = TwistedMorphism(block_gmod(B, S, _single(TM.M), [[idT, None]], 0), C, TM, verify=verify)
    return Cone(C, S, inc, out, TM)


def is_quasi_iso_complex(f0: HomMap, dM: HomMap, dN: HomMap) -> tuple:
    """(True, None) or (False, degree) via the acyclicity of the mapping cone."""
    M, N = f0.dom, f0.cod
    M1 = M.shift(1)
    S = direct_sum(M1, N, tags=("1", "0"))
    s_inv = sigma_inv(M, M1)
    dM1 = -(sigma(M, M1) @ dM @ s_inv)
    d = _block_hom(S, [[dM1, None], [f0 @ s_inv, dN]], 1)
    wit = homology_witness(S.space, d)
    if wit is None:
        return True, None
    # cone homology in degree k is H^{k+1}(f) failure, report the M-side degree
    return False, wit["degree"] + 1


def _block_hom(S, blocks, degree):
    from .graded import block_map
    return block_map(S, S, blocks, degree)


@dataclass
class HomotopyInverse:
    g: TwistedMorphism
    h_fg: GModMorphism            # f*g − 𝕀 = δ̂(h_fg) + ...
    h_gf: GModMorphism


def homotopy_inverse(f: TwistedMorphism, verify: bool = True) -> HomotopyInverse:
    """Homotopy inverse of a morphism whose first component is a quasi-isomorphism.

    With H a null-homotopy of C_f, write H = [[H11, H12], [H21, H22]] on
    M[1] ⊕ N.  Then g = σ_M⁻¹*H12, g*f ≃ 𝕀 via σ_M⁻¹*H11*σ_M and
    f*g ≃ 𝕀 via −H22.
    """
    ok, deg = is_quasi_iso_complex(f.f.f0, f.src.u0, f.tgt.u0)
    if not ok:
        raise NotQuasiIso(f"first component is not a quasi-isomorphism (degree {deg})", deg)
    B = f.f.bocs
    Cf = cone(f, verify=verify)
    H = nullhomotopy(Cf.module, verify=verify)
    S = Cf.sum
    M, M1 = f.src.M, Cf.shifted.M
    si = sigma_inv_gmod(B, M, M1)
    s = sigma_gmod(B, M, M1)
    H11 = gmod_block(H, S, S, 0, 0)
    H12 = gmod_block(H, S, S, 0, 1)
    H22 = gmod_block(H, S, S, 1, 1)
    g = TwistedMorphism(compose(si, H12), f.tgt, f.src, verify=verify)
    h_gf = compose(compose(si, H11), s)
    h_fg = -H22
    if verify:
        idM, idN = f.src.identity(), f.tgt.identity()
        c1 = check_homotopy(h_gf, g * f, idM)
        c2 = check_homotopy(h_fg, f * g, idN)
        if not (c1.ok and c2.ok):
            raise InternalError(f"homotopy inverse identities fail: {c1.first_failure or c2.first_failure}")
    return HomotopyInverse(g, h_fg, h_gf)


# restriction along homotopic bocs morphisms ------------------------------------------

def restrict_twisted(psi, T: TwistedModule, verify: bool = True) -> TwistedModule:
    return TwistedModule(psi.src, T.M, restrict(psi, T.u), verify=verify)


def restrict_twisted_morphism(psi, f: TwistedMorphism, src: TwistedModule, tgt: TwistedModule,
                              verify: bool = True) -> TwistedMorphism:
    return TwistedMorphism(restrict(psi, f.f), src, tgt, verify=verify)


def restriction_equivalence_witness(phi, psi, h, T: TwistedModule, verify: bool = True) -> TwistedMorphism:
    """η = 𝕀 + R_h(u): R_φ(M,u) -> R_ψ(M,u), an isomorphism with η⁰ = id."""
    src = restrict_twisted(phi, T, verify=verify)
    tgt = restrict_twisted(psi, T, verify=verify)
    eta = GModMorphism.identity(phi.src, T.M) + r_h(h, T.u, verify=verify)
    return TwistedMorphism(eta, src, tgt, verify=verify)


def naturality_homotopy(phi, psi, h, f: TwistedMorphism, verify: bool = True) -> CheckResult:
    """η_N*R_φ(f) − R_ψ(f)*η_M = δ̂(R_h(f)) + R_ψ(v)*R_h(f) + R_h(f)*R_φ(u)."""
    eM = restriction_equivalence_witness(phi, psi, h, f.src, verify)
    eN = restriction_equivalence_witness(phi, psi, h, f.tgt, verify)
    Rf_phi = restrict(phi, f.f)
    Rf_psi = restrict(psi, f.f)
    k = r_h(h, f.f)
    lhs = compose(eN.f, Rf_phi)
    rhs = compose(Rf_psi, eM.f)
    return check_homotopy(k, lhs, rhs, eM.src, eN.tgt)
