"""The dg category GMod-B of a triangular bocs B, in component form.

A morphism f: M -> N of degree d is a map M ⊗ C -> N, C = S ⊕ C̄.  We keep

    f⁰ = f(− ⊗ 1): M -> N              (degree d)
    f¹(c)[m] = f(m ⊗ c)  for c ∈ C̄     (one matrix per basis element c)

so f¹(c) maps M e_t to N e_s when c ∈ e_t C̄ e_s and has degree d + |c|.
With this convention composition has no signs:

    (g*f)⁰ = g⁰f⁰
    (g*f)¹(c) = g¹(c)f⁰ + g⁰f¹(c) + Σ g¹(c²)f¹(c¹),  μ̄(c) = Σ c¹⊗c²

and the differential is δ̂(f)⁰ = 0, δ̂(f)¹(c)[m] = (−1)^{|f|+|m|+1} f¹(δc)[m].
"""
from __future__ import annotations

from .ainfty import CheckResult
from .bocs import TriangularBocs, iterate_comult
from .errors import ModuleMismatch, NotABocsMorphism, NotAHomotopy, NotInvertible, TruncationMismatch
from .graded import GradedSpace, HomMap, hom_inverse, lazy_tensor, identity, tensor


def _madd(acc: dict, f: HomMap, s=1):
    """acc += s*f on raw column dicts."""
    for c, col in f.cols.items():
        a = acc.setdefault(c, {})
        for r, v in col.items():
            w = a.get(r)
            nv = v if s == 1 else s * v
            a[r] = nv if w is None else w + nv


def _clean(acc: dict) -> dict:
    out = {}
    for c, col in acc.items():
        col = {r: v for r, v in col.items() if v}
        if col:
            out[c] = col
    return out


class GModMorphism:
    """Morphism of GMod-B in component form (f⁰, {c: f¹(c)})."""

    __slots__ = ("bocs", "dom", "cod", "degree", "f0", "f1")

    def __init__(self, bocs: TriangularBocs, dom: GradedSpace, cod: GradedSpace, degree: int,
                 f0: HomMap | None = None, f1: dict | None = None):
        self.bocs = bocs
        self.dom, self.cod, self.degree = dom, cod, degree
        self.f0 = f0 if f0 is not None else HomMap.zero(dom, cod, degree)
        self.f1 = {c: v for c, v in (f1 or {}).items() if not v.is_zero()}

    @property
    def L(self):
        return self.bocs.L

    @property
    def field(self):
        return self.dom.field

    def one(self, c) -> HomMap:
        """f¹(c), the zero map when absent."""
        v = self.f1.get(c)
        if v is None:
            return HomMap.zero(self.dom, self.cod, self.degree + self.bocs.degree(c))
        return v

    # construction
    @classmethod
    def identity(cls, bocs, M):
        return cls(bocs, M, M, 0, identity(M), {})

    @classmethod
    def zero(cls, bocs, M, N, degree=0):
        return cls(bocs, M, N, degree)

    @classmethod
    def strict(cls, bocs, f0: HomMap):
        return cls(bocs, f0.dom, f0.cod, f0.degree, f0, {})

    def first(self) -> "GModMorphism":
        """(f⁰, 0)."""
        return GModMorphism(self.bocs, self.dom, self.cod, self.degree, self.f0, {})

    def higher(self) -> "GModMorphism":
        """(0, f¹)."""
        return GModMorphism(self.bocs, self.dom, self.cod, self.degree, None, self.f1)

    # linear structure
    def _check_same(self, other):
        if other.bocs is not self.bocs and other.bocs.C != self.bocs.C:
            raise TruncationMismatch("morphisms over different bocses")
        if other.dom != self.dom or other.cod != self.cod:
            raise ModuleMismatch("morphisms between different modules")

    def __add__(self, other):
        return self._lin(other, 1)

    def __sub__(self, other):
        return self._lin(other, -1)

    def _lin(self, other, s):
        self._check_same(other)
        if self.degree != other.degree and not (self.is_zero() or other.is_zero()):
            raise ValueError("adding morphisms of different degrees")
        deg = self.degree if not self.is_zero() else other.degree
        f0 = self.f0 + other.f0 if s == 1 else self.f0 - other.f0
        f1 = dict(self.f1)
        for c, v in other.f1.items():
            f1[c] = (f1[c] + v if s == 1 else f1[c] - v) if c in f1 else (v if s == 1 else -v)
        return GModMorphism(self.bocs, self.dom, self.cod, deg, f0, f1)

    def __neg__(self):
        return GModMorphism(self.bocs, self.dom, self.cod, self.degree, -self.f0,
                            {c: -v for c, v in self.f1.items()})

    def scale(self, s):
        return GModMorphism(self.bocs, self.dom, self.cod, self.degree, self.f0.scale(s),
                            {c: v.scale(s) for c, v in self.f1.items()})

    def __rmul__(self, s):
        return self.scale(s)

    def __mul__(self, other):
        """g * f (composition in GMod-B)."""
        return compose(self, other)

    def is_zero(self) -> bool:
        return self.f0.is_zero() and not self.f1

    def __eq__(self, other):
        if not isinstance(other, GModMorphism):
            return NotImplemented
        try:
            return (self - other).is_zero()
        except (ModuleMismatch, TruncationMismatch, ValueError):
            return False

    __hash__ = None

    def witness(self):
        if not self.f0.is_zero():
            return ("0", self.f0.witness())
        for c in sorted(self.f1):
            return (self.bocs.C.labels[c], self.f1[c].witness())
        return None

    def __repr__(self):
        return f"GModMorphism(deg={self.degree}, |f1|={len(self.f1)})"


def compose(g: GModMorphism, f: GModMorphism) -> GModMorphism:
    """(g*f)⁰ = g⁰f⁰, (g*f)¹(c) = g¹(c)f⁰ + g⁰f¹(c) + Σ g¹(c²)f¹(c¹)."""
    if g.bocs is not f.bocs and g.bocs.C != f.bocs.C:
        raise TruncationMismatch("morphisms over different bocses or levels")
    if f.cod != g.dom:
        raise ModuleMismatch("codomain of f is not the domain of g")
    B = f.bocs
    deg = f.degree + g.degree
    h0 = g.f0 @ f.f0
    h1 = {}
    keys = set(g.f1) | set(f.f1)
    # the quadratic term can be nonzero on c only if some c¹ ∈ f.f1 and c² ∈ g.f1
    if f.f1 and g.f1:
        for (c,), col in B.comult.cols.items():
            for (x, y) in col:
                if x in f.f1 and y in g.f1:
                    keys.add(c)
                    break
    for c in keys:
        acc = {}
        gc, fc = g.f1.get(c), f.f1.get(c)
        if gc is not None:
            _madd(acc, gc @ f.f0)
        if fc is not None:
            _madd(acc, g.f0 @ fc)
        for (x, y), coef in B.mu(c).items():
            fx, gy = f.f1.get(x), g.f1.get(y)
            if fx is None or gy is None:
                continue
            _madd(acc, gy @ fx, coef)
        acc = _clean(acc)
        if acc:
            h1[c] = HomMap(f.dom, g.cod, deg + B.degree(c), acc, clean=False)
    return GModMorphism(B, f.dom, g.cod, deg, h0, h1)


def hat_delta(f: GModMorphism) -> GModMorphism:
    """δ̂(f): degree |f|+1, zero first component, δ̂(f)¹(c)[m] = (−1)^{|f|+|m|+1} f¹(δc)[m]."""
    B = f.bocs
    M = f.dom
    out = {}
    for (c,), col in B.diff.cols.items():
        acc = {}
        for (x,), coef in col.items():
            fx = f.f1.get(x)
            if fx is not None:
                _madd(acc, fx, coef)
        if not acc:
            continue
        signed = {}
        for (m,), vals in acc.items():
            neg = (f.degree + M.degrees[m] + 1) % 2
            vals = {r: (-v if neg else v) for r, v in vals.items() if v}
            if vals:
                signed[(m,)] = vals
        if signed:
            out[c] = HomMap(M, f.cod, f.degree + 1 + B.degree(c), signed, clean=False)
    return GModMorphism(B, M, f.cod, f.degree + 1, None, out)


def power(x: GModMorphism, n: int) -> GModMorphism:
    out = GModMorphism.identity(x.bocs, x.dom)
    for _ in range(n):
        out = compose(x, out)
    return out


def geometric_inverse(v: GModMorphism) -> GModMorphism:
    """Inverse of 𝕀 + v for v = (0, v¹) of degree 0: Σ_{n=0}^{L} (−v)^{*n}.

    (v^{*n})¹ vanishes on layers < n, so the series is exact through level L.
    """
    B = v.bocs
    x = -v
    term = GModMorphism.identity(B, v.dom)
    total = term
    for _ in range(B.L):
        term = compose(x, term)
        if term.is_zero():
            break
        total = total + term
    return total


def invert(f: GModMorphism, verify: bool = True) -> GModMorphism:
    """Two-sided inverse of a morphism whose first component is invertible."""
    if f.dom.dim != f.cod.dim:
        raise NotInvertible(f"dimensions differ: {f.dom.dim} vs {f.cod.dim}")
    g0 = hom_inverse(f.f0)
    g = GModMorphism.strict(f.bocs, g0)
    w = compose(f, g)            # = (id, v)
    v = w.higher()
    winv = geometric_inverse(v)
    inv = compose(g, winv)
    if verify:
        if not compose(f, inv) == GModMorphism.identity(f.bocs, f.cod):
            raise NotInvertible("series inverse failed on the right")
        if not compose(inv, f) == GModMorphism.identity(f.bocs, f.dom):
            raise NotInvertible("series inverse failed on the left")
    return inv


# M ⊗ C view ----------------------------------------------------------------

def as_tensor_map(f: GModMorphism) -> HomMap:
    """f as a HomMap on M ⊗ C̄ (keys (m, c)) restricted to the C̄ part."""
    B = f.bocs
    MC = tensor(f.dom, B.C)
    cols = {}
    for c, fc in f.f1.items():
        for (m,), col in fc.cols.items():
            cols[(m, c)] = dict(col)
    return HomMap(MC, f.cod, f.degree, cols, clean=False)


def compose_via_tensor(g: GModMorphism, f: GModMorphism) -> GModMorphism:
    """g*f = g(f ⊗ id_C)(id_M ⊗ μ), evaluated on M ⊗ C with Koszul signs.

    Independent of ``compose``: the reduced comultiplication is applied to
    every basis tensor m ⊗ c and the maps f ⊗ id and g are applied as maps
    on tensor spaces.  The result is read back into component form.
    """
    B = f.bocs
    C = B.C
    M = f.dom
    deg = f.degree + g.degree
    ftm, gtm = as_tensor_map(f), as_tensor_map(g)
    idC = identity(C)
    h0 = g.f0 @ f.f0
    h1 = {}
    # f ⊗ id_C on M ⊗ C̄ ⊗ C̄ -> N ⊗ C̄ (Koszul: |id| = 0, no sign)
    fid = lazy_tensor(ftm, idC)
    for c in range(C.dim):
        acc = {}
        # 1 ⊗ c and c ⊗ 1 parts of μ(c)
        fc = f.f1.get(c)
        if fc is not None:
            _madd(acc, g.f0 @ fc)
        gc = g.f1.get(c)
        if gc is not None:
            _madd(acc, gc @ f.f0)
        mu = B.mu(c)
        if mu:
            for m in range(M.dim):
                for (x, y), coef in mu.items():
                    for (n_, y2), a in fid.apply((m, x, y)).items():
                        for r, b in gtm.cols.get((n_, y2), {}).items():
                            acc.setdefault((m,), {})
                            acc[(m,)][r] = acc[(m,)].get(r, 0) + coef * a * b
        acc = _clean(acc)
        if acc:
            h1[c] = HomMap(M, g.cod, deg + C.degrees[c], acc, clean=False)
    return GModMorphism(B, M, g.cod, deg, h0, h1)


# block matrices ---------------------------------------------------------------

def block_gmod(bocs, dom_sum, cod_sum, blocks, degree) -> GModMorphism:
    """Assemble a morphism between direct sums from GModMorphism blocks[i][j]."""
    from .graded import block_map
    f0 = block_map(dom_sum, cod_sum, [[b.f0 if b is not None else None for b in row] for row in blocks], degree)
    cs = set()
    for row in blocks:
        for b in row:
            if b is not None:
                cs |= set(b.f1)
    f1 = {}
    for c in cs:
        mats = [[(b.f1.get(c) if b is not None else None) for b in row] for row in blocks]
        f1[c] = block_map(dom_sum, cod_sum, mats, degree + bocs.degree(c))
    return GModMorphism(bocs, dom_sum.space, cod_sum.space, degree, f0, f1)


def gmod_block(f: GModMorphism, dom_sum, cod_sum, i: int, j: int) -> GModMorphism:
    from .graded import extract_block
    f0 = extract_block(f.f0, dom_sum, cod_sum, i, j)
    f1 = {c: extract_block(v, dom_sum, cod_sum, i, j) for c, v in f.f1.items()}
    return GModMorphism(f.bocs, dom_sum.parts[j], cod_sum.parts[i], f.degree, f0, f1)


def relabel(f: GModMorphism, dom=None, cod=None, degree=None) -> GModMorphism:
    """Same matrices, new endpoint spaces (used for the shift isomorphisms)."""
    dom = dom or f.dom
    cod = cod or f.cod
    d = f.degree if degree is None else degree
    B = f.bocs
    return GModMorphism(B, dom, cod, d, f.f0.relabel(dom, cod, d),
                        {c: v.relabel(dom, cod, d + B.degree(c)) for c, v in f.f1.items()})


# bocs morphisms and restriction ------------------------------------------------

class BocsMorphism:
    """ψ: B₁ -> B₂ of degree 0 given by ψ̄: C̄₁ -> C̄₂, with ψ(1) = 1."""

    def __init__(self, src: TriangularBocs, tgt: TriangularBocs, cbar: HomMap):
        self.src, self.tgt, self.map = src, tgt, cbar

    def image(self, c: int) -> dict:
        return {k[0]: v for k, v in self.map.cols.get((c,), {}).items()}


def check_bocs_morphism(psi: BocsMorphism) -> CheckResult:
    res = CheckResult("bocs_morphism")
    A, B, p = psi.src, psi.tgt, psi.map
    res.add_flag("degree", p.degree == 0 and p.check_homogeneous())
    res.add("comult", (B.comult @ p) - (lazy_tensor(p, p) @ A.comult))
    res.add("differential", (B.diff @ p) - (p @ A.diff))
    bad = None
    for (c,), col in p.cols.items():
        for (x,) in col:
            if B.layer[x] > A.layer[c]:
                bad = (A.C.labels[c], B.C.labels[x])
    res.add_flag("layers", bad is None, bad)
    return res


class BocsHomotopy:
    """h̄: C̄₁ -> C̄₂ of degree −1 between bocs morphisms φ and ψ (h(1) = 0)."""

    def __init__(self, phi: BocsMorphism, psi: BocsMorphism, cbar: HomMap):
        self.phi, self.psi, self.map = phi, psi, cbar

    def image(self, c: int) -> dict:
        return {k[0]: v for k, v in self.map.cols.get((c,), {}).items()}


def check_bocs_homotopy(h: BocsHomotopy) -> CheckResult:
    """μ̄₂ h = (φ̄⊗h + h⊗ψ̄) μ̄₁ and φ̄ − ψ̄ = δ₂ h + h δ₁ (reduced form).

    With μ(x) = 1⊗x + x⊗1 + μ̄(x) and h(1) = 0, the full condition
    μ h = (φ⊗h + h⊗ψ) μ reduces to the displayed reduced one.
    """
    res = CheckResult("bocs_homotopy")
    A, B = h.phi.src, h.phi.tgt
    p, q, hm = h.phi.map, h.psi.map, h.map
    res.add_flag("degree", hm.degree == -1 or hm.is_zero())
    lhs = B.comult @ hm
    rhs = (lazy_tensor(p, hm) @ A.comult) + (lazy_tensor(hm, q) @ A.comult)
    res.add("comult", lhs - rhs)
    res.add("differential", (p - q) - (B.diff @ hm) - (hm @ A.diff))
    return res


def restrict(psi: BocsMorphism, f: GModMorphism, verify: bool = False) -> GModMorphism:
    """R_ψ(f) = f(id_M ⊗ ψ): same first component, R_ψ(f)¹(c) = f¹(ψ̄ c)."""
    if f.bocs is not psi.tgt and f.bocs.C != psi.tgt.C:
        raise NotABocsMorphism("morphism is not over the target bocs of ψ")
    if verify and not check_bocs_morphism(psi).ok:
        raise NotABocsMorphism(f"not a bocs morphism: {check_bocs_morphism(psi).first_failure}")
    A = psi.src
    out = {}
    for (c,), col in psi.map.cols.items():
        acc = {}
        for (x,), coef in col.items():
            fx = f.f1.get(x)
            if fx is not None:
                _madd(acc, fx, coef)
        acc = _clean(acc)
        if acc:
            out[c] = HomMap(f.dom, f.cod, f.degree + A.degree(c), acc, clean=False)
    return GModMorphism(A, f.dom, f.cod, f.degree, f.f0, out)


def r_h(h: BocsHomotopy, u: GModMorphism, verify: bool = False) -> GModMorphism:
    """R_h(u) = (−1)^{|u|} u(id_M ⊗ h): R_h(u)⁰ = 0 and
    R_h(u)¹(c)[m] = (−1)^{|u|+|m|} u¹(h̄c)[m] (Koszul sign of id_M ⊗ h)."""
    if verify:
        chk = check_bocs_homotopy(h)
        if not chk.ok:
            raise NotAHomotopy(f"not a bocs homotopy: {chk.first_failure}")
    A = h.phi.src
    M = u.dom
    out = {}
    for (c,), col in h.map.cols.items():
        acc = {}
        for (x,), coef in col.items():
            ux = u.f1.get(x)
            if ux is not None:
                _madd(acc, ux, coef)
        signed = {}
        for (m,), vals in acc.items():
            neg = (u.degree + M.degrees[m]) % 2
            vals = {r: (-v if neg else v) for r, v in vals.items() if v}
            if vals:
                signed[(m,)] = vals
        if signed:
            out[c] = HomMap(M, u.cod, u.degree - 1 + A.degree(c), signed, clean=False)
    return GModMorphism(A, M, u.cod, u.degree - 1, None, out)


def identity_bocs_morphism(B: TriangularBocs) -> BocsMorphism:
    return BocsMorphism(B, B, identity(B.C))


def local_nilpotence_ok(f: GModMorphism) -> bool:
    """For f = (0, f¹): (f^{*n})¹ vanishes on layer-i elements when n > i."""
    x = f.higher()
    B = f.bocs
    p = x
    for n in range(2, B.L + 2):
        p = compose(x, p) if x.dom == x.cod else None
        if p is None:
            return True
        for c in p.f1:
            if B.layer[c] < n:
                return False
    return True


def iterate_mu(B, n, c):
    return iterate_comult(B, n, c)
