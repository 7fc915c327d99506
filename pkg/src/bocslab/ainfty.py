"""A∞-algebras over S, their morphisms and homotopies.

Every identity is assembled as a sum of HomMaps of the shape
``m_k ∘ (φ_1 ⊗ ... ⊗ φ_k)``; the tensor products are lazy and the
composition pulls back along the nonzero columns of the outer operation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .errors import AlgebraMismatch, EmptyPartition, TranslationDefectMismatch
from .graded import GradedSpace, HomMap, identity, lazy_tensor, tensor


@dataclass
class CheckResult:
    """Outcome of an identity check.

    ``items`` holds one (index, ok, witness) triple per checked identity, the
    witness being (domain labels, codomain labels, value) of the first
    nonzero defect entry.
    """

    name: str
    items: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.items)

    def __bool__(self):
        return self.ok

    def add(self, index, defect: HomMap | None):
        if defect is None or defect.is_zero():
            self.items.append((index, True, None))
        else:
            self.items.append((index, False, defect.witness()))
        return self

    def add_flag(self, index, ok: bool, witness=None):
        self.items.append((index, bool(ok), witness))
        return self

    def merge(self, other: "CheckResult", prefix=None):
        for idx, ok, w in other.items:
            self.items.append(((prefix, idx) if prefix is not None else idx, ok, w))
        return self

    @property
    def first_failure(self):
        return next(((i, w) for i, ok, w in self.items if not ok), None)

    def report(self) -> list:
        return [{"index": _jsonable(i), "ok": ok, "witness": _jsonable(w)} for i, ok, w in self.items]


def _jsonable(x):
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if isinstance(x, (tuple, list)):
        return [_jsonable(y) for y in x]
    return str(x)


def sgn(parts) -> int:
    """Parity of (r−1)(i_1−1) + (r−2)(i_2−1) + ... + (i_{r−1}−1)."""
    parts = list(parts)
    if not parts:
        raise EmptyPartition("sgn needs at least one part")
    if any(p < 1 for p in parts):
        raise ValueError("parts must be positive")
    r = len(parts)
    return sum((r - 1 - k) * (p - 1) for k, p in enumerate(parts)) % 2


@lru_cache(maxsize=None)
def compositions(n: int, max_part: int | None = None) -> tuple:
    """All ordered tuples of positive integers summing to n (parts ≤ max_part)."""
    if n == 0:
        return ((),)
    out = []
    top = n if max_part is None else min(n, max_part)
    for first in range(1, top + 1):
        for rest in compositions(n - first, max_part):
            out.append((first,) + rest)
    return tuple(out)


def sum_maps(terms, dom, cod, degree) -> HomMap:
    """Σ ±term for (sign, HomMap) pairs; sign is +1 or −1."""
    acc = {}
    for s, t in terms:
        for c, col in t.cols.items():
            a = acc.setdefault(c, {})
            for r, v in col.items():
                w = a.get(r)
                nv = v if s > 0 else -v
                a[r] = nv if w is None else w + nv
    return HomMap(dom, cod, degree, acc, clean=True)


class AInfAlgebra:
    """A graded S-S-bimodule A with operations m_n: A^{⊗n} -> A of degree 2−n.

    Operations with n > arity_bound are zero.
    """

    def __init__(self, A: GradedSpace, ops: dict, arity_bound: int | None = None, name: str = ""):
        self.A = A
        self.name = name
        ops = {int(n): m for n, m in ops.items()}
        self.arity_bound = arity_bound if arity_bound is not None else max(ops, default=1)
        for n, m in ops.items():
            if n < 1 or n > self.arity_bound:
                raise ValueError(f"operation m_{n} outside 1..{self.arity_bound}")
            if m.degree != 2 - n and not m.is_zero():
                raise ValueError(f"m_{n} must have degree {2 - n}, got {m.degree}")
            if m.dom != self.power(n) or m.cod != A:
                raise AlgebraMismatch(f"m_{n} has the wrong domain or codomain")
            if not m.check_homogeneous():
                raise ValueError(f"m_{n} does not respect degrees or idempotents")
        self.ops = {n: m for n, m in ops.items() if not m.is_zero()}
        self._id = identity(A)

    @property
    def base(self):
        return self.A.base

    @property
    def field(self):
        return self.A.field

    def power(self, n: int):
        return tensor(*([self.A] * n))

    def op(self, n: int):
        return self.ops.get(n)

    def ids(self, k: int) -> list:
        return [self._id] * k

    def with_ops(self, ops: dict) -> "AInfAlgebra":
        return AInfAlgebra(self.A, ops, self.arity_bound, self.name)

    def __repr__(self):
        return f"AInfAlgebra(dim={self.A.dim}, ops={sorted(self.ops)})"


def insertion_terms(A: AInfAlgebra, outer, n: int, sign_rule):
    """Terms outer_{r+1+t} ∘ (id^r ⊗ m_s ⊗ id^t) over r+s+t = n, s ≥ 1.

    ``outer`` maps an arity k to a HomMap on A^{⊗k} (or None);
    ``sign_rule(r, s, t)`` returns the parity of the sign.
    """
    terms = []
    for s in range(1, n + 1):
        ms = A.op(s)
        if ms is None:
            continue
        for r in range(0, n - s + 1):
            t = n - s - r
            g = outer(r + 1 + t)
            if g is None:
                continue
            inner = lazy_tensor(*A.ids(r), ms, *A.ids(t))
            terms.append((-1 if sign_rule(r, s, t) % 2 else 1, g @ inner))
    return terms


def stasheff_defect(A: AInfAlgebra, n: int) -> HomMap:
    """Z_n = Σ (−1)^{r+st} m_{r+1+t}(id^{⊗r} ⊗ m_s ⊗ id^{⊗t})."""
    terms = insertion_terms(A, A.op, n, lambda r, s, t: r + s * t)
    return sum_maps(terms, A.power(n), A.A, 3 - n)


def translated_defect(A: AInfAlgebra, n: int) -> HomMap:
    """Z'_n = Σ (−1)^{rs+t} m_{r+1+t}(id^{⊗r} ⊗ m_s ⊗ id^{⊗t}) for the given operations."""
    terms = insertion_terms(A, A.op, n, lambda r, s, t: r * s + t)
    return sum_maps(terms, A.power(n), A.A, 3 - n)


def check_stasheff(A: AInfAlgebra, n: int | None = None) -> CheckResult:
    res = CheckResult("stasheff")
    ns = [n] if n is not None else range(1, 2 * A.arity_bound + 1)
    for k in ns:
        res.add(k, stasheff_defect(A, k))
    return res


def _tri(n: int) -> int:
    return n * (n - 1) // 2


def sign_translate(A: AInfAlgebra, verify: bool = True) -> AInfAlgebra:
    """A' with m'_n = (−1)^{n(n−1)/2} m_n, checking Z'_n(A') = (−1)^{n(n−1)/2} Z_n(A)."""
    ops = {n: (-m if _tri(n) % 2 else m) for n, m in A.ops.items()}
    B = A.with_ops(ops)
    if verify:
        for n in range(1, 2 * A.arity_bound + 1):
            z = stasheff_defect(A, n)
            zp = translated_defect(B, n)
            if zp != (-z if _tri(n) % 2 else z):
                raise TranslationDefectMismatch(f"sign translation fails at n={n}")
    return B


class AInfAlgMorphism:
    """Family f_n: A^{⊗n} -> B of degree 1−n, zero for n > arity_bound."""

    def __init__(self, source: AInfAlgebra, target: AInfAlgebra, comps: dict, arity_bound=None):
        if source.base != target.base:
            raise AlgebraMismatch("different base rings")
        self.source, self.target = source, target
        comps = {int(n): f for n, f in comps.items()}
        self.arity_bound = arity_bound if arity_bound is not None else max(comps, default=1)
        for n, f in comps.items():
            if not f.is_zero() and f.degree != 1 - n:
                raise ValueError(f"f_{n} must have degree {1 - n}")
        self.comps = {n: f for n, f in comps.items() if not f.is_zero() and n <= self.arity_bound}

    def comp(self, n):
        return self.comps.get(n)

    @classmethod
    def identity(cls, A: AInfAlgebra):
        return cls(A, A, {1: identity(A.A)}, 1)


class AInfAlgHomotopy:
    """Family h_n: A^{⊗n} -> B of degree −n."""

    def __init__(self, source: AInfAlgebra, target: AInfAlgebra, comps: dict, arity_bound=None):
        self.source, self.target = source, target
        comps = {int(n): f for n, f in comps.items()}
        self.arity_bound = arity_bound if arity_bound is not None else max(comps, default=1)
        for n, f in comps.items():
            if not f.is_zero() and f.degree != -n:
                raise ValueError(f"h_{n} must have degree {-n}")
        self.comps = {n: f for n, f in comps.items() if not f.is_zero()}

    def comp(self, n):
        return self.comps.get(n)


def family_sum(outer_op, parts_maps, sign_bits, dom, cod, degree):
    """Σ_i ± outer(len(maps_i)) ∘ (maps_i[0] ⊗ ...)."""
    terms = []
    for maps, bit in zip(parts_maps, sign_bits):
        terms.append((-1 if bit else 1, outer_op(len(maps)) @ lazy_tensor(*maps)))
    return sum_maps(terms, dom, cod, degree)


def morphism_sides(f: AInfAlgMorphism, n: int):
    """(Σ_n, Σ'_n) of the morphism condition."""
    A, B = f.source, f.target
    left = sum_maps(insertion_terms(A, f.comp, n, lambda r, s, t: r + s * t), A.power(n), B.A, 2 - n)
    terms = []
    for parts in compositions(n, f.arity_bound):
        m = B.op(len(parts))
        if m is None:
            continue
        maps = [f.comp(i) for i in parts]
        if any(x is None for x in maps):
            continue
        terms.append((-1 if sgn(parts) else 1, m @ lazy_tensor(*maps)))
    right = sum_maps(terms, A.power(n), B.A, 2 - n)
    return left, right


def check_alg_morphism(f: AInfAlgMorphism, n: int | None = None) -> CheckResult:
    res = CheckResult("alg_morphism")
    top = 2 * max(f.source.arity_bound, f.target.arity_bound, f.arity_bound)
    for k in ([n] if n is not None else range(1, top + 1)):
        a, b = morphism_sides(f, k)
        res.add(k, a - b)
    return res


def compose_alg_morphisms(g: AInfAlgMorphism, f: AInfAlgMorphism, upto: int | None = None) -> AInfAlgMorphism:
    """(g∘f)_n = Σ (−1)^{sgn(i_1..i_s)} g_s(f_{i_1} ⊗ ... ⊗ f_{i_s})."""
    if f.target is not g.source and (f.target.A != g.source.A or f.target.ops.keys() != g.source.ops.keys()):
        raise AlgebraMismatch("target of f is not the source of g")
    A, C = f.source, g.target
    top = upto if upto is not None else f.arity_bound * g.arity_bound
    comps = {}
    for n in range(1, top + 1):
        terms = []
        for parts in compositions(n, f.arity_bound):
            gs = g.comp(len(parts))
            if gs is None:
                continue
            maps = [f.comp(i) for i in parts]
            if any(x is None for x in maps):
                continue
            terms.append((-1 if sgn(parts) else 1, gs @ lazy_tensor(*maps)))
        comps[n] = sum_maps(terms, A.power(n), C.A, 1 - n)
    return AInfAlgMorphism(A, C, comps, top)


def homotopy_sign(ilist, s, jlist) -> int:
    """Parity r(t+1) + st + Σ_{α≥2,u<α}(1−i_u) + tΣi_u + Σ_{β≥2,v<β}(1−j_v)."""
    r, t = len(ilist), len(jlist)
    e = r * (t + 1) + s * t + t * sum(ilist)
    e += sum((r - 1 - u) * (1 - i) for u, i in enumerate(ilist))
    e += sum((t - 1 - v) * (1 - j) for v, j in enumerate(jlist))
    return e % 2


def h_term(h: AInfAlgHomotopy, n: int) -> HomMap:
    """H(h)_n = Σ (−1)^{r+st} h_{r+1+t}(id^{⊗r} ⊗ m_s ⊗ id^{⊗t})."""
    A, B = h.source, h.target
    return sum_maps(insertion_terms(A, h.comp, n, lambda r, s, t: r + s * t), A.power(n), B.A, 1 - n)


def hfg_term(h: AInfAlgHomotopy, f: AInfAlgMorphism, g: AInfAlgMorphism, n: int) -> HomMap:
    """H_{f,g}(h)_n = Σ (−1)^{sgn} m_{r+1+t}(f_{i_1}⊗...⊗f_{i_r}⊗h_s⊗g_{j_1}⊗...⊗g_{j_t})."""
    A, B = h.source, h.target
    terms = []
    for parts in compositions(n):
        m = B.op(len(parts))
        if m is None:
            continue
        for p in range(len(parts)):
            il, s, jl = parts[:p], parts[p], parts[p + 1:]
            hs = h.comp(s)
            if hs is None:
                continue
            maps = [f.comp(i) for i in il] + [hs] + [g.comp(j) for j in jl]
            if any(x is None for x in maps):
                continue
            terms.append((-1 if homotopy_sign(il, s, jl) else 1, m @ lazy_tensor(*maps)))
    return sum_maps(terms, A.power(n), B.A, 1 - n)


def alg_homotopy_defect(h, f, g, n) -> HomMap:
    A, B = f.source, f.target
    z = HomMap.zero(A.power(n), B.A, 1 - n)
    fn = f.comp(n) or z
    gn = g.comp(n) or z
    return fn - gn - h_term(h, n) - hfg_term(h, f, g, n)


def check_alg_homotopy(h, f, g, n: int | None = None) -> CheckResult:
    res = CheckResult("alg_homotopy")
    top = 2 * max(f.source.arity_bound, f.target.arity_bound, f.arity_bound, g.arity_bound, h.arity_bound)
    for k in ([n] if n is not None else range(1, top + 1)):
        res.add(k, alg_homotopy_defect(h, f, g, k))
    return res


def homotopic_morphism(f: AInfAlgMorphism, h: AInfAlgHomotopy, upto: int) -> AInfAlgMorphism:
    """The morphism g with f − g = H(h) + H_{f,g}(h), built arity by arity.

    H_{f,g}(h)_n only involves g_j with j < n, so each g_n is determined by
    lower data.  The result is truncated at ``upto``.
    """
    A, B = f.source, f.target
    g = AInfAlgMorphism(A, B, {}, upto)
    for n in range(1, upto + 1):
        z = HomMap.zero(A.power(n), B.A, 1 - n)
        gn = (f.comp(n) or z) - h_term(h, n) - hfg_term(h, f, g, n)
        if not gn.is_zero():
            g.comps[n] = gn
    return g
