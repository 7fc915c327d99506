"""Right A∞-modules, the dg category GMod-A and the bridge 𝔾 to the bar bocs.

A morphism f: M -> N of degree d in GMod-A is a family f_n: M⊗A^{⊗(n−1)} -> N
of degree d+1−n.  Composition and the differential are

    (g∘f)_n   = Σ_{r+s=n} (−1)^{(|f|+r+1)s} g_{1+s}(f_r ⊗ id^{⊗s})
    δ_∞(f)_n  = Σ_{r+s+t=n, r,s≥1} (−1)^{|f|+r+st+1} f_{r+1+t}(id^{⊗r} ⊗ m_s ⊗ id^{⊗t})

where id^{⊗r} stands for id_M ⊗ id_A^{⊗(r−1)}.  A module structure is a
degree 1 endomorphism m with δ_∞(m) + m∘m = 0.

𝔾 sends M to M[1] and f to the GMod-B morphism with 𝔾(f)⁰ = f_1 and

    𝔾(f)¹(σa_1⊗...⊗σa_n)[σm] = (−1)^{n|m| + Σ_k (n−k)|a_k|} σ f_{n+1}(m⊗a_1⊗...⊗a_n)

(same matrix entries up to that sign).
"""
from __future__ import annotations

from .ainfty import (AInfAlgebra, AInfAlgHomotopy, AInfAlgMorphism, CheckResult, compositions,
                     h_term, hfg_term, sgn, sum_maps)
from .bocs import BarBocs
from .errors import (FormulationMismatch, ModuleMismatch, NotAComplex, NotAnAlgMorphism,
                     TruncationTooSmall)
from .gmodb import BocsHomotopy, BocsMorphism, GModMorphism, check_bocs_morphism
from .graded import GradedSpace, HomMap, direct_sum, homology_dims, identity, lazy_tensor, tensor


def _neg(bit) -> int:
    return -1 if bit % 2 else 1


def _meet(*xs):
    """Smallest finite exact_upto among families (ints are taken as bounds)."""
    vals = [x if isinstance(x, int) else getattr(x, "exact_upto", None) for x in xs]
    vals = [v for v in vals if v is not None]
    return min(vals) if vals else None


# data types --------------------------------------------------------------------

class AInfModMorphism:
    """Family f_n: M⊗A^{⊗(n−1)} -> N of degree d+1−n, zero for n > arity_bound.

    ``exact_upto`` marks data recovered from a truncated bar bocs: only the
    components of arity ≤ exact_upto are known, so checks stop there.
    """

    def __init__(self, A: AInfAlgebra, M: GradedSpace, N: GradedSpace, degree: int, comps: dict,
                 arity_bound: int | None = None, exact_upto: int | None = None):
        self.A, self.M, self.N, self.degree = A, M, N, degree
        self.exact_upto = exact_upto
        comps = {int(n): f for n, f in comps.items()}
        self.arity_bound = arity_bound if arity_bound is not None else max(comps, default=1)
        for n, f in comps.items():
            if n < 1:
                raise ValueError("components start at n = 1")
            if f.is_zero():
                continue
            if f.degree != degree + 1 - n:
                raise ValueError(f"component {n} must have degree {degree + 1 - n}")
            if f.dom != self.dom(n) or f.cod != N:
                raise ModuleMismatch(f"component {n} has the wrong domain or codomain")
        self.comps = {n: f for n, f in comps.items() if not f.is_zero() and n <= self.arity_bound}

    def dom(self, n: int):
        return tensor(self.M, *([self.A.A] * (n - 1)))

    def comp(self, n: int):
        return self.comps.get(n)

    def zero_comp(self, n: int) -> HomMap:
        return HomMap.zero(self.dom(n), self.N, self.degree + 1 - n)

    @classmethod
    def identity(cls, A, M: GradedSpace):
        return cls(A, M, M, 0, {1: identity(M)}, 1)

    @classmethod
    def zero(cls, A, M, N, degree=0):
        return cls(A, M, N, degree, {}, 1)

    def _lin(self, other, s):
        if other.M != self.M or other.N != self.N:
            raise ModuleMismatch("morphisms between different modules")
        if other.degree != self.degree and other.comps and self.comps:
            raise ValueError("adding morphisms of different degrees")
        deg = self.degree if self.comps else other.degree
        comps = dict(self.comps)
        for n, f in other.comps.items():
            g = f if s == 1 else -f
            comps[n] = comps[n] + g if n in comps else g
        return AInfModMorphism(self.A, self.M, self.N, deg, comps, max(self.arity_bound, other.arity_bound),
                               _meet(self, other))

    def __add__(self, other):
        return self._lin(other, 1)

    def __sub__(self, other):
        return self._lin(other, -1)

    def __neg__(self):
        return AInfModMorphism(self.A, self.M, self.N, self.degree,
                               {n: -f for n, f in self.comps.items()}, self.arity_bound, self.exact_upto)

    def scale(self, s):
        return AInfModMorphism(self.A, self.M, self.N, self.degree,
                               {n: f.scale(s) for n, f in self.comps.items()}, self.arity_bound, self.exact_upto)

    def truncate(self, n: int) -> "AInfModMorphism":
        return AInfModMorphism(self.A, self.M, self.N, self.degree,
                               {k: f for k, f in self.comps.items() if k <= n}, n, _meet(self, n))

    def is_zero(self, upto: int | None = None) -> bool:
        return not any(f for k, f in self.comps.items() if upto is None or k <= upto)

    def equals(self, other, upto: int | None = None) -> bool:
        return (self - other).is_zero(upto)

    def __repr__(self):
        return f"AInfModMorphism(deg={self.degree}, comps={sorted(self.comps)})"


ModHomotopy = AInfModMorphism


class AInfModule:
    """M with operations m_n: M⊗A^{⊗(n−1)} -> M of degree 2−n."""

    def __init__(self, A: AInfAlgebra, M: GradedSpace, ops: dict, arity_bound: int | None = None,
                 name: str = "", exact_upto: int | None = None):
        self.A, self.M, self.name = A, M, name
        self.m = AInfModMorphism(A, M, M, 1, ops, arity_bound, exact_upto)

    @property
    def exact_upto(self):
        return self.m.exact_upto

    @property
    def ops(self):
        return self.m.comps

    @property
    def arity_bound(self):
        return self.m.arity_bound

    def op(self, n):
        return self.m.comp(n)

    def differential(self) -> HomMap:
        return self.m.comp(1) or HomMap.zero(self.M, self.M, 1)

    def __repr__(self):
        return f"AInfModule(dim={self.M.dim}, ops={sorted(self.ops)})"


# the dg category GMod-A --------------------------------------------------------

def compose_mod(g: AInfModMorphism, f: AInfModMorphism, upto: int | None = None) -> AInfModMorphism:
    if f.N != g.M:
        raise ModuleMismatch("codomain of f is not the domain of g")
    A = f.A
    top = upto if upto is not None else f.arity_bound + g.arity_bound - 1
    ids = A.ids
    comps = {}
    for n in range(1, top + 1):
        terms = []
        for r in range(1, n + 1):
            s = n - r
            fr, gs = f.comp(r), g.comp(1 + s)
            if fr is None or gs is None:
                continue
            terms.append((_neg((f.degree + r + 1) * s), gs @ lazy_tensor(fr, *ids(s))))
        comps[n] = sum_maps(terms, f.dom(n), g.N, f.degree + g.degree + 1 - n)
    return AInfModMorphism(A, f.M, g.N, f.degree + g.degree, comps, top, _meet(f, g))


def _insertions(f: AInfModMorphism, n: int, sign):
    """Terms f_{r+1+t}(id^{⊗r} ⊗ m_s ⊗ id^{⊗t}) over r,s ≥ 1, r+s+t = n."""
    A = f.A
    idM = identity(f.M)
    terms = []
    for s in range(1, n):
        ms = A.op(s)
        if ms is None:
            continue
        for r in range(1, n - s + 1):
            t = n - r - s
            outer = f.comp(r + 1 + t)
            if outer is None:
                continue
            inner = lazy_tensor(idM, *A.ids(r - 1), ms, *A.ids(t))
            terms.append((_neg(sign(r, s, t)), outer @ inner))
    return terms


def delta_inf(f: AInfModMorphism, upto: int | None = None) -> AInfModMorphism:
    A = f.A
    top = upto if upto is not None else f.arity_bound + A.arity_bound - 1
    comps = {}
    for n in range(2, top + 1):
        terms = _insertions(f, n, lambda r, s, t: f.degree + r + s * t + 1)
        comps[n] = sum_maps(terms, f.dom(n), f.N, f.degree + 2 - n)
    return AInfModMorphism(A, f.M, f.N, f.degree + 1, comps, top, f.exact_upto)


def _check_top(*objs) -> int:
    top = 2 * max(o.arity_bound for o in objs)
    ex = _meet(*objs)
    return top if ex is None else min(top, ex)


def module_defect_dg(Mod: AInfModule, upto: int) -> AInfModMorphism:
    """δ_∞(m) + m∘m."""
    return delta_inf(Mod.m, upto) + compose_mod(Mod.m, Mod.m, upto)


def module_defect_classical(Mod: AInfModule, n: int) -> HomMap:
    """Σ_n^+ + Σ_n^0 with (−1)^{r+st} and (−1)^{st}."""
    m = Mod.m
    terms = _insertions(m, n, lambda r, s, t: r + s * t)
    for s in range(1, n + 1):
        t = n - s
        ms, outer = m.comp(s), m.comp(1 + t)
        if ms is None or outer is None:
            continue
        terms.append((_neg(s * t), outer @ lazy_tensor(ms, *Mod.A.ids(t))))
    return sum_maps(terms, m.dom(n), Mod.M, 3 - n)


def check_module(Mod: AInfModule, n: int | None = None) -> CheckResult:
    top = _check_top(Mod.m, Mod.A)
    ns = [n] if n is not None else list(range(1, top + 1))
    dg = module_defect_dg(Mod, max(ns))
    res = CheckResult("module")
    for k in ns:
        cl = module_defect_classical(Mod, k)
        alt = dg.comp(k) or dg.zero_comp(k)
        if cl != alt:
            raise FormulationMismatch(f"module identity n={k}: classical and dg forms differ")
        res.add(k, cl)
    return res


def morphism_defect_dg(f: AInfModMorphism, MM: AInfModule, NN: AInfModule, upto: int) -> AInfModMorphism:
    """δ_∞(f) + m^N∘f − (−1)^{|f|} f∘m^M."""
    return (delta_inf(f, upto) + compose_mod(NN.m, f, upto)
            - compose_mod(f, MM.m, upto).scale(_neg(f.degree)))


def morphism_defect_classical(f: AInfModMorphism, MM: AInfModule, NN: AInfModule, n: int) -> HomMap:
    """−(Σ^{f+} + Σ^{f0} + Σ^{f−}) in the degree d form."""
    d = f.degree
    A = f.A
    plus = _insertions(f, n, lambda r, s, t: d + r + s * t)
    zero = []
    for s in range(1, n + 1):
        t = n - s
        ms, outer = MM.op(s), f.comp(1 + t)
        if ms is None or outer is None:
            continue
        zero.append((_neg(d + s * t), outer @ lazy_tensor(ms, *A.ids(t))))
    minus = []
    for r in range(1, n + 1):
        s = n - r
        fr, outer = f.comp(r), NN.op(1 + s)
        if fr is None or outer is None:
            continue
        minus.append((_neg((d + r + 1) * s + 1), outer @ lazy_tensor(fr, *A.ids(s))))
    dom, cod, deg = f.dom(n), f.N, d + 2 - n
    return -(sum_maps(plus, dom, cod, deg) + sum_maps(zero, dom, cod, deg) + sum_maps(minus, dom, cod, deg))


def check_mod_morphism(f: AInfModMorphism, MM: AInfModule, NN: AInfModule, n: int | None = None,
                       upto: int | None = None) -> CheckResult:
    """δ_∞(f) + m^N∘f − (−1)^d f∘m^M = 0, cross-checked with the classical sums."""
    top = upto if upto is not None else _check_top(f, MM.m, NN.m, f.A)
    ns = [n] if n is not None else list(range(1, top + 1))
    dg = morphism_defect_dg(f, MM, NN, max(ns))
    res = CheckResult("module_morphism")
    for k in ns:
        cl = morphism_defect_classical(f, MM, NN, k)
        alt = dg.comp(k) or dg.zero_comp(k)
        if cl != alt:
            raise FormulationMismatch(f"morphism identity n={k}: classical and dg forms differ")
        res.add(k, cl)
    return res


def homotopy_terms_classical(h: AInfModMorphism, MM: AInfModule, NN: AInfModule, n: int):
    """(H^(1), H^(2), H^(3)) at arity n."""
    A = h.A
    dom, cod = h.dom(n), h.N
    t1 = []
    for r in range(1, n + 1):
        s = n - r
        hr, outer = h.comp(r), NN.op(1 + s)
        if hr is not None and outer is not None:
            t1.append((_neg(r * s), outer @ lazy_tensor(hr, *A.ids(s))))
    t2 = []
    for s in range(1, n + 1):
        t = n - s
        ms, outer = MM.op(s), h.comp(1 + t)
        if ms is not None and outer is not None:
            t2.append((_neg(s * t), outer @ lazy_tensor(ms, *A.ids(t))))
    t3 = _insertions(h, n, lambda r, s, t: r + s * t)
    return (sum_maps(t1, dom, cod, 1 - n), sum_maps(t2, dom, cod, 1 - n), sum_maps(t3, dom, cod, 1 - n))


def check_mod_homotopy(h: AInfModMorphism, f: AInfModMorphism, g: AInfModMorphism,
                       MM: AInfModule, NN: AInfModule, upto: int | None = None) -> CheckResult:
    """f_n − g_n = H^(1) + H^(2) + H^(3), and the same via δ_∞(h) + m^N∘h + h∘m^M."""
    top = upto if upto is not None else _check_top(h, f, g, MM.m, NN.m, h.A)
    dgsum = delta_inf(h, top) + compose_mod(NN.m, h, top) + compose_mod(h, MM.m, top)
    diff = f - g
    res = CheckResult("module_homotopy")
    for n in range(1, top + 1):
        H1, H2, H3 = homotopy_terms_classical(h, MM, NN, n)
        cl = H1 + H2 + H3
        alt = dgsum.comp(n) or dgsum.zero_comp(n)
        if cl != alt:
            raise FormulationMismatch(f"homotopy identity n={n}: H-sums and dg form differ")
        fn = diff.comp(n) or diff.zero_comp(n)
        res.add(n, fn - cl)
    return res


# the bridge 𝔾 ------------------------------------------------------------------

def _bridge_sign(n: int, mdeg: int, adegs) -> int:
    e = n * mdeg + sum((n - 1 - k) * d for k, d in enumerate(adegs))
    return _neg(e)


def _require_bar(B, A: AInfAlgebra):
    if not isinstance(B, BarBocs) or B.alg.A != A.A:
        raise ModuleMismatch("the bocs must be the bar construction of the algebra")


def bridge_morphism(f: AInfModMorphism, B: BarBocs, M1: GradedSpace | None = None,
                    N1: GradedSpace | None = None, check_level: bool = True) -> GModMorphism:
    """𝔾(f): M[1] -> N[1] over the bar bocs."""
    _require_bar(B, f.A)
    if check_level and f.arity_bound - 1 > B.L:
        raise TruncationTooSmall(f"level {B.L} cannot hold components of arity {f.arity_bound}")
    M, N = f.M, f.N
    M1 = M1 or M.shift(1)
    N1 = N1 or N.shift(1)
    adeg = f.A.A.degrees
    f0 = (f.comp(1) or f.zero_comp(1)).relabel(M1, N1, f.degree)
    f1 = {}
    for n1, comp in f.comps.items():
        n = n1 - 1
        if n < 1 or n > B.L:
            continue
        per = {}
        for key, col in comp.cols.items():
            m, w = key[0], key[1:]
            c = B.word_index[w]
            s = _bridge_sign(n, M.degrees[m], [adeg[a] for a in w])
            per.setdefault(c, {})[(m,)] = {r: (v if s == 1 else -v) for r, v in col.items()}
        for c, cols in per.items():
            f1[c] = HomMap(M1, N1, f.degree + B.degree(c), cols, clean=False)
    return GModMorphism(B, M1, N1, f.degree, f0, f1)


def unbridge_morphism(F: GModMorphism, A: AInfAlgebra, M: GradedSpace, N: GradedSpace) -> AInfModMorphism:
    """Inverse of 𝔾 on stored data: components up to arity L+1."""
    B = F.bocs
    _require_bar(B, A)
    adeg = A.A.degrees
    comps = {1: F.f0.relabel(M, N, F.degree)}
    raw = {}
    for c, X in F.f1.items():
        w = B.words[c]
        n = len(w)
        for (m,), col in X.cols.items():
            s = _bridge_sign(n, M.degrees[m], [adeg[a] for a in w])
            raw.setdefault(n + 1, {})[(m,) + w] = {r: (v if s == 1 else -v) for r, v in col.items()}
    for n1, cols in raw.items():
        comps[n1] = HomMap(tensor(M, *([A.A] * (n1 - 1))), N, F.degree + 1 - n1, cols, clean=False)
    return AInfModMorphism(A, M, N, F.degree, comps, B.L + 1, B.L + 1)


def to_twisted(Mod: AInfModule, B: BarBocs, verify: bool = True):
    """𝔾(M, m) = (M[1], 𝔾(m))."""
    from .twisted import TwistedModule
    M1 = Mod.M.shift(1)
    return TwistedModule(B, M1, bridge_morphism(Mod.m, B, M1, M1), verify=verify)


def from_twisted(T, A: AInfAlgebra, M: GradedSpace | None = None) -> AInfModule:
    """𝔾⁻¹: (M[1], u) -> (M, m) with components up to arity L+1."""
    M = M or T.M.shift(-1)
    m = unbridge_morphism(T.u, A, M, M)
    return AInfModule(A, M, m.comps, m.arity_bound, exact_upto=m.exact_upto)


def bridge_twisted_morphism(f: AInfModMorphism, src, tgt, verify: bool = True):
    from .twisted import TwistedMorphism
    return TwistedMorphism(bridge_morphism(f, src.bocs, src.M, tgt.M), src, tgt, verify=verify)


# shift and J -----------------------------------------------------------------------

def _retarget(f: HomMap, dom, cod, scale=1) -> HomMap:
    g = f.relabel(dom, cod)
    return g if scale == 1 else g.scale(scale)


def shift_mod(Mod: AInfModule) -> AInfModule:
    """m^{M[1]}_n = (−1)^n σ m_n (σ⁻¹ ⊗ id^{⊗(n−1)}): same entries times (−1)^n."""
    A = Mod.A
    M1 = Mod.M.shift(1)
    ops = {n: _retarget(m, tensor(M1, *([A.A] * (n - 1))), M1, _neg(n)) for n, m in Mod.ops.items()}
    return AInfModule(A, M1, ops, Mod.arity_bound, exact_upto=Mod.exact_upto)


def shift_mod_morphism(f: AInfModMorphism) -> AInfModMorphism:
    """f[1]_n = (−1)^{n−1} σ f_n (σ⁻¹ ⊗ id^{⊗(n−1)})."""
    A = f.A
    M1, N1 = f.M.shift(1), f.N.shift(1)
    comps = {n: _retarget(c, tensor(M1, *([A.A] * (n - 1))), N1, _neg(n - 1)) for n, c in f.comps.items()}
    return AInfModMorphism(A, M1, N1, f.degree, comps, f.arity_bound, f.exact_upto)


def _block_diag_tensor(S, parts_ops, A, n, degree):
    """Block diagonal map on (⊕ M_i) ⊗ A^{⊗(n−1)} from maps on M_i ⊗ A^{⊗(n−1)}."""
    dom = tensor(S.space, *([A.A] * (n - 1)))
    cols = {}
    for i, op in enumerate(parts_ops):
        if op is None:
            continue
        o = S.offsets[i]
        for key, col in op.cols.items():
            cols[(key[0] + o,) + key[1:]] = {(r[0] + o,): v for r, v in col.items()}
    return HomMap(dom, S.space, degree, cols, clean=False)


def jfun_mod(Mod: AInfModule):
    """J(M) on M ⊕ M[1]: m_1 = [[m_1, σ⁻¹], [0, m^{M[1]}_1]], m_n = diag(m_n, m^{M[1]}_n)."""
    A = Mod.A
    TM = shift_mod(Mod)
    S = direct_sum(Mod.M, TM.M, tags=("0", "1"))
    ops = {}
    top = Mod.arity_bound
    for n in range(1, top + 1):
        op = _block_diag_tensor(S, [Mod.op(n), TM.op(n)], A, n, 2 - n)
        if n == 1:
            one = A.field.one
            o = S.offsets[1]
            cols = {k: dict(v) for k, v in op.cols.items()}
            for i in range(Mod.M.dim):
                cols.setdefault((i + o,), {})[(i,)] = cols.get((i + o,), {}).get((i,), 0) + one
            op = HomMap(S.space, S.space, 1, cols)
        ops[n] = op
    return AInfModule(A, S.space, ops, top, exact_upto=Mod.exact_upto), S


# restriction along A∞-morphisms, Ψ and Δ -------------------------------------------------

def _hat_sign(adegs) -> int:
    i = len(adegs)
    return _neg(sum((i - 1 - k) * d for k, d in enumerate(adegs)))


def _hat_apply(comp: HomMap, w, adeg, word_index_tgt) -> dict:
    """x̂(σa_1...σa_i) = (−1)^{Σ(i−k)|a_k|} σ x(a_1...a_i) as {target letter: coef}."""
    col = comp.cols.get(w)
    if not col:
        return {}
    s = _hat_sign([adeg[a] for a in w])
    return {r[0]: (v if s == 1 else -v) for r, v in col.items()}


def psi_of_morphism(phi: AInfAlgMorphism, BA: BarBocs, BB: BarBocs, verify: bool = True) -> BocsMorphism:
    """Ψ(φ)(σa_1...σa_n) = Σ_{partitions} φ̂_{i_1} ⊗ ... ⊗ φ̂_{i_r}."""
    if verify:
        chk = _alg_morphism_check_upto(phi, BA.L)
        if not chk.ok:
            raise NotAnAlgMorphism(f"not an A∞-morphism: {chk.first_failure}")
    adeg = phi.source.A.degrees
    cols = {}
    for c, w in enumerate(BA.words):
        acc = {}
        for parts in compositions(len(w)):
            o = 0
            ok = True
            pieces = []
            for i in parts:
                comp = phi.comp(i)
                if comp is None:
                    ok = False
                    break
                img = _hat_apply(comp, w[o:o + i], adeg, None)
                if not img:
                    ok = False
                    break
                pieces.append(img)
                o += i
            if not ok:
                continue
            combos = [((), BA.field.one)]
            for img in pieces:
                combos = [(k + (b,), a * v) for k, a in combos for b, v in img.items()]
            for k, a in combos:
                j = BB.word_index.get(k)
                if j is None:
                    continue
                acc[(j,)] = acc.get((j,), 0) + a
        acc = {k: v for k, v in acc.items() if v}
        if acc:
            cols[(c,)] = acc
    psi = BocsMorphism(BA, BB, HomMap(BA.C, BB.C, 0, cols, clean=False))
    if verify:
        chk = check_bocs_morphism(psi)
        if not chk.ok:
            raise NotAnAlgMorphism(f"Ψ(φ) is not a bocs morphism: {chk.first_failure}")
    return psi


def _alg_morphism_check_upto(phi, n):
    from .ainfty import check_alg_morphism
    res = CheckResult("alg_morphism")
    for k in range(1, n + 1):
        res.merge(check_alg_morphism(phi, k))
    return res


def delta_coderivation(k, f: AInfAlgMorphism, g: AInfAlgMorphism, BA: BarBocs, BB: BarBocs,
                       degree: int = -1) -> HomMap:
    """Δ(k)(σa_1...σa_n) = Σ f̂⊗...⊗f̂ ⊗ k̂ ⊗ ĝ⊗...⊗ĝ with Koszul sign for k̂.

    ``k`` is a family (dict n -> HomMap, or an object with ``comp``) whose
    components have degree degree+1−n, so that k̂ has degree ``degree``.
    """
    comp = k.comp if hasattr(k, "comp") else (lambda n: k.get(n))
    adeg = f.source.A.degrees
    cols = {}
    for c, w in enumerate(BA.words):
        acc = {}
        for parts in compositions(len(w)):
            o = 0
            starts = []
            for i in parts:
                starts.append(o)
                o += i
            for p in range(len(parts)):
                pieces = []
                ok = True
                for q, i in enumerate(parts):
                    fam = f.comp if q < p else (comp if q == p else g.comp)
                    x = fam(i)
                    if x is None:
                        ok = False
                        break
                    img = _hat_apply(x, w[starts[q]:starts[q] + i], adeg, None)
                    if not img:
                        ok = False
                        break
                    pieces.append(img)
                if not ok:
                    continue
                pre = sum(adeg[a] - 1 for a in w[:starts[p]])
                sg = _neg(degree * pre)
                combos = [((), sg)]
                for img in pieces:
                    combos = [(kk + (b,), a * v) for kk, a in combos for b, v in img.items()]
                for kk, a in combos:
                    j = BB.word_index.get(kk)
                    if j is None:
                        continue
                    acc[(j,)] = acc.get((j,), 0) + a
        acc = {kk: v for kk, v in acc.items() if v}
        if acc:
            cols[(c,)] = acc
    return HomMap(BA.C, BB.C, degree, cols, clean=False)


def bocs_homotopy_from(h: AInfAlgHomotopy, f: AInfAlgMorphism, g: AInfAlgMorphism,
                       BA: BarBocs, BB: BarBocs) -> BocsHomotopy:
    return BocsHomotopy(psi_of_morphism(f, BA, BB, verify=False), psi_of_morphism(g, BA, BB, verify=False),
                        delta_coderivation(h, f, g, BA, BB, -1))


def odot_family(h: AInfAlgHomotopy, f: AInfAlgMorphism, g: AInfAlgMorphism, upto: int) -> dict:
    """h^⊙ = H(h) + H_{f,g}(h) arity by arity."""
    return {n: h_term(h, n) + hfg_term(h, f, g, n) for n in range(1, upto + 1)}


def odot_coderivation(xi: HomMap, BA: BarBocs, BB: BarBocs) -> HomMap:
    """ξ^⊙ = δ_B ξ + ξ δ_A."""
    return BB.diff @ xi + xi @ BA.diff


def restrict_mod_morphism(phi: AInfAlgMorphism, f: AInfModMorphism, upto: int | None = None) -> AInfModMorphism:
    """R_φ(f)_n = Σ_{parts of n−1} (−1)^{sgn} f_{r+1}(id_M ⊗ φ_{i_1} ⊗ ... ⊗ φ_{i_r}); R_φ(f)_1 = f_1."""
    A = phi.source
    top = upto if upto is not None else (f.arity_bound - 1) * phi.arity_bound + 1
    idM = identity(f.M)
    comps = {}
    if f.comp(1) is not None:
        comps[1] = f.comp(1).relabel(tensor(f.M), f.N)
    for n in range(2, top + 1):
        terms = []
        for parts in compositions(n - 1):
            outer = f.comp(len(parts) + 1)
            if outer is None:
                continue
            maps = [phi.comp(i) for i in parts]
            if any(x is None for x in maps):
                continue
            terms.append((_neg(sgn(parts)), outer @ lazy_tensor(idM, *maps)))
        comps[n] = sum_maps(terms, tensor(f.M, *([A.A] * (n - 1))), f.N, f.degree + 1 - n)
    return AInfModMorphism(A, f.M, f.N, f.degree, comps, top, f.exact_upto)


def restrict_module(phi: AInfAlgMorphism, Mod: AInfModule, upto: int | None = None) -> AInfModule:
    m = restrict_mod_morphism(phi, Mod.m, upto)
    return AInfModule(phi.source, Mod.M, m.comps, m.arity_bound, exact_upto=m.exact_upto)


def restrict_mod(phi: AInfAlgMorphism, x, upto: int | None = None, verify: bool = False):
    """R_φ on modules or morphisms."""
    if verify:
        from .ainfty import check_alg_morphism
        chk = check_alg_morphism(phi)
        if not chk.ok:
            raise NotAnAlgMorphism(f"not an A∞-morphism: {chk.first_failure}")
    if isinstance(x, AInfModule):
        return restrict_module(phi, x, upto)
    return restrict_mod_morphism(phi, x, upto)


# homology and quasi-isomorphisms --------------------------------------------------

def homology(M: GradedSpace, d: HomMap) -> dict:
    """{(degree, idempotent): dim H} for the complex (M, d)."""
    if not (d @ d).is_zero():
        raise NotAComplex("d² ≠ 0")
    return {(k[0], k[2]): v for k, v in homology_dims(M, d).items()}


def is_quasi_iso(f: AInfModMorphism, MM: AInfModule, NN: AInfModule) -> bool:
    from .twisted import is_quasi_iso_complex
    dM, dN = MM.differential(), NN.differential()
    for d in (dM, dN):
        if not (d @ d).is_zero():
            raise NotAComplex("m_1² ≠ 0")
    f1 = f.comp(1) or f.zero_comp(1)
    return is_quasi_iso_complex(f1.relabel(f.M, f.N), dM, dN)[0]


def mod_homotopy_inverse(f: AInfModMorphism, MM: AInfModule, NN: AInfModule, B: BarBocs, verify: bool = True):
    """(g, h_fg, h_gf) for a quasi-isomorphism f, computed through 𝔾.

    Returned families carry components up to arity L+1.
    """
    from .twisted import homotopy_inverse
    TM, TN = to_twisted(MM, B, verify), to_twisted(NN, B, verify)
    F = bridge_twisted_morphism(f, TM, TN, verify)
    hi = homotopy_inverse(F, verify)
    g = unbridge_morphism(hi.g.f, MM.A, NN.M, MM.M)
    h_fg = unbridge_morphism(hi.h_fg, MM.A, NN.M, NN.M)
    h_gf = unbridge_morphism(hi.h_gf, MM.A, MM.M, MM.M)
    return g, h_fg, h_gf
