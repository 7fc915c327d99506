"""Graded S-modules, S-S-bimodules and homogeneous maps between them.

A basis element of a simple space carries (label, degree, left, right).  For
a right module ``left`` is None and ``right`` is the idempotent e_s with
x = x e_s; for a bimodule element x in e_t X e_s we store left=t, right=s.

Keys of basis tensors are tuples of basis indices, one per tensor factor; a
simple space uses 1-tuples.  Tensor products over S = k^n keep only the
tuples in which consecutive idempotents match.

Maps are stored sparsely, column by column: ``cols[domkey] = {codkey: c}``
with no zero entries.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from . import linalg
from .errors import IdempotentMismatch, ModuleMismatch, NotInvertible
from .scalars import BaseRing


class Space:
    """Common interface of simple and tensor spaces."""

    factors: tuple
    base: BaseRing

    @property
    def field(self):
        return self.base.field

    @property
    def arity(self) -> int:
        return len(self.factors)

    def degree(self, key) -> int:
        return sum(f.degrees[i] for f, i in zip(self.factors, key))

    def left(self, key):
        return self.factors[0].lefts[key[0]]

    def right(self, key):
        return self.factors[-1].rights[key[-1]]

    def compatible(self, key) -> bool:
        fs = self.factors
        for a in range(len(key) - 1):
            if fs[a].rights[key[a]] != fs[a + 1].lefts[key[a + 1]]:
                return False
        return True

    def key_labels(self, key) -> tuple:
        return tuple(f.labels[i] for f, i in zip(self.factors, key))

    def key_from_labels(self, labels) -> tuple:
        if len(labels) != len(self.factors):
            raise KeyError(f"expected {len(self.factors)} labels, got {labels!r}")
        return tuple(f.index[l] for f, l in zip(self.factors, labels))


class GradedSpace(Space):
    """A finite graded right S-module or S-S-bimodule with an ordered basis."""

    def __init__(self, base: BaseRing, basis, name: str = ""):
        basis = [tuple(b) for b in basis]
        self.base = base
        self.name = name
        self.labels = tuple(str(b[0]) for b in basis)
        self.degrees = tuple(int(b[1]) for b in basis)
        self.lefts = tuple(None if b[2] is None else int(b[2]) for b in basis)
        self.rights = tuple(int(b[3]) for b in basis)
        self.index = {l: i for i, l in enumerate(self.labels)}
        if len(self.index) != len(self.labels):
            raise ValueError("basis labels must be unique")
        for l, r in zip(self.lefts, self.rights):
            if (l is not None and not 0 <= l < base.n) or not 0 <= r < base.n:
                raise IdempotentMismatch(f"idempotent index out of range for {base}")
        self.factors = (self,)
        self._sig = (base, self.labels, self.degrees, self.lefts, self.rights)
        self._hash = hash(self._sig)

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def is_module(self) -> bool:
        return all(l is None for l in self.lefts)

    def keys(self):
        return [(i,) for i in range(self.dim)]

    def basis(self):
        return list(zip(self.labels, self.degrees, self.lefts, self.rights))

    def __eq__(self, other):
        return isinstance(other, GradedSpace) and self._sig == other._sig

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"GradedSpace({self.name or '?'}, dim={self.dim})"

    def shift(self, k: int = 1) -> "GradedSpace":
        """M[k] with M[k]_i = M_{i+k}: same labels, degrees lowered by k."""
        basis = [(l, d - k, a, b) for l, d, a, b in self.basis()]
        return GradedSpace(self.base, basis, name=f"{self.name}[{k}]" if self.name else "")

    def blocks(self):
        """Basis indices grouped by (degree, left, right), in sorted order."""
        out = {}
        for i in range(self.dim):
            out.setdefault((self.degrees[i], self.lefts[i], self.rights[i]), []).append(i)
        return dict(sorted(out.items(), key=lambda kv: (kv[0][0], -1 if kv[0][1] is None else kv[0][1], kv[0][2])))


class TensorSpace(Space):
    """Tensor product over S of simple spaces (possibly none: the unit S)."""

    def __init__(self, factors):
        self.factors = tuple(factors)
        if not self.factors:
            raise ValueError("use UNIT for the empty tensor product")
        self.base = self.factors[0].base
        self._keys = None
        self._hash = hash(self.factors)

    def keys(self):
        if self._keys is None:
            fs = self.factors
            out = [(i,) for i in range(fs[0].dim)]
            for a in range(1, len(fs)):
                f, prev = fs[a], fs[a - 1]
                by_left = {}
                for j in range(f.dim):
                    by_left.setdefault(f.lefts[j], []).append(j)
                out = [k + (j,) for k in out for j in by_left.get(prev.rights[k[-1]], ())]
            self._keys = out
        return self._keys

    def __eq__(self, other):
        return isinstance(other, TensorSpace) and self.factors == other.factors

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "(" + " ⊗ ".join(f.name or "?" for f in self.factors) + ")"


def tensor(*spaces) -> Space:
    fs = []
    for s in spaces:
        fs.extend(s.factors)
    if len(fs) == 1:
        return fs[0]
    return TensorSpace(fs)


def _same_space(a: Space, b: Space) -> bool:
    return a.factors == b.factors


class HomMap:
    """Homogeneous linear map of a declared degree, stored column-sparse."""

    __slots__ = ("dom", "cod", "degree", "cols", "_rows")

    def __init__(self, dom: Space, cod: Space, degree: int, cols=None, clean: bool = True):
        self.dom = dom
        self.cod = cod
        self.degree = degree
        if cols is None:
            cols = {}
        elif clean:
            cols = {k: {r: v for r, v in col.items() if v} for k, col in cols.items()}
            cols = {k: col for k, col in cols.items() if col}
        self.cols = cols
        self._rows = None

    @property
    def field(self):
        return self.dom.base.field

    # construction helpers
    @classmethod
    def zero(cls, dom, cod, degree=0):
        return cls(dom, cod, degree, {}, clean=False)

    @classmethod
    def identity(cls, space):
        one = space.field.one
        return cls(space, space, 0, {k: {k: one} for k in space.keys()}, clean=False)

    @classmethod
    def from_triples(cls, dom, cod, degree, triples):
        """Build from (rowkey, colkey, scalar) triples; repeated entries add."""
        cols = {}
        for r, c, v in triples:
            col = cols.setdefault(tuple(c), {})
            col[tuple(r)] = col.get(tuple(r), 0) + v
        return cls(dom, cod, degree, cols)

    def triples(self):
        out = []
        for c in sorted(self.cols):
            col = self.cols[c]
            for r in sorted(col):
                out.append((r, c, col[r]))
        return out

    @property
    def rows(self):
        """Transposed view: rows[codkey] = [(domkey, coef), ...]."""
        if self._rows is None:
            rows = {}
            for c, col in self.cols.items():
                for r, v in col.items():
                    rows.setdefault(r, []).append((c, v))
            self._rows = rows
        return self._rows

    def apply(self, key) -> dict:
        return self.cols.get(key, {})

    def apply_vec(self, vec: dict) -> dict:
        out = {}
        for k, a in vec.items():
            for r, b in self.cols.get(k, {}).items():
                out[r] = out.get(r, 0) + a * b
        return {r: v for r, v in out.items() if v}

    # algebra
    def __matmul__(self, other):
        """Composition self ∘ other (no sign: maps compose plainly)."""
        if isinstance(other, TensorMap):
            return other.pullback(self)
        if not isinstance(other, HomMap):
            return NotImplemented
        gcols = self.cols
        out = {}
        for c, col in other.cols.items():
            acc = {}
            for mid, a in col.items():
                gv = gcols.get(mid)
                if gv is None:
                    continue
                for r, b in gv.items():
                    v = acc.get(r)
                    acc[r] = a * b if v is None else v + a * b
            acc = {r: v for r, v in acc.items() if v}
            if acc:
                out[c] = acc
        return HomMap(other.dom, self.cod, self.degree + other.degree, out, clean=False)

    def _combine(self, other, sgn):
        if not isinstance(other, HomMap):
            return NotImplemented
        if other.degree != self.degree and self.cols and other.cols:
            raise ValueError(f"adding maps of degrees {self.degree} and {other.degree}")
        out = {k: dict(v) for k, v in self.cols.items()}
        for c, col in other.cols.items():
            acc = out.setdefault(c, {})
            for r, v in col.items():
                w = acc.get(r)
                nv = (v if sgn > 0 else -v) if w is None else (w + v if sgn > 0 else w - v)
                if nv:
                    acc[r] = nv
                elif w is not None:
                    del acc[r]
            if not acc:
                del out[c]
        deg = self.degree if self.cols or not other.cols else other.degree
        return HomMap(self.dom, self.cod, deg, out, clean=False)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return HomMap(self.dom, self.cod, self.degree,
                      {c: {r: -v for r, v in col.items()} for c, col in self.cols.items()}, clean=False)

    def scale(self, s):
        if not s:
            return HomMap(self.dom, self.cod, self.degree)
        if s == 1:
            return self
        return HomMap(self.dom, self.cod, self.degree,
                      {c: {r: s * v for r, v in col.items()} for c, col in self.cols.items()}, clean=False)

    def __rmul__(self, s):
        return self.scale(s)

    def is_zero(self) -> bool:
        return not self.cols

    def __eq__(self, other):
        if not isinstance(other, HomMap):
            return NotImplemented
        if not (_same_space(self.dom, other.dom) and _same_space(self.cod, other.cod)):
            return False
        if self.cols != other.cols:
            return False
        return self.degree == other.degree or not self.cols

    __hash__ = None

    def witness(self):
        """First nonzero entry in key order as (domain labels, codomain labels, value)."""
        if not self.cols:
            return None
        c = min(self.cols)
        r = min(self.cols[c])
        return (self.dom.key_labels(c), self.cod.key_labels(r), self.cols[c][r])

    def relabel(self, dom=None, cod=None, degree=None) -> "HomMap":
        """Same matrix viewed between other spaces with identical key sets."""
        return HomMap(dom or self.dom, cod or self.cod,
                      self.degree if degree is None else degree, self.cols, clean=False)

    def check_homogeneous(self, linear: bool = True) -> bool:
        for c, col in self.cols.items():
            dc = self.dom.degree(c)
            for r in col:
                if self.cod.degree(r) != dc + self.degree:
                    return False
                if linear and (self.cod.right(r) != self.dom.right(c)
                               or self.cod.left(r) != self.dom.left(c)):
                    return False
        return True

    def restrict_cols(self, keys) -> "HomMap":
        keys = set(keys)
        return HomMap(self.dom, self.cod, self.degree,
                      {c: v for c, v in self.cols.items() if c in keys}, clean=False)

    def __repr__(self):
        n = sum(len(c) for c in self.cols.values())
        return f"HomMap({self.dom!r} -> {self.cod!r}, deg={self.degree}, nnz={n})"


class TensorMap:
    """Lazy f_1 ⊗ ... ⊗ f_k with the Koszul rule

        (f_1⊗...⊗f_k)(x_1⊗...⊗x_k) = (−1)^{Σ_{a<b} |f_b||x_a|} f_1(x_1)⊗...⊗f_k(x_k).

    Composing ``g @ T`` pulls back along the nonzero columns of g, so identity
    sums over huge tensor powers cost only as much as their nonzero terms.
    """

    def __init__(self, *maps):
        self.maps = tuple(maps)
        self.dom = tensor(*[m.dom for m in maps])
        self.cod = tensor(*[m.cod for m in maps])
        self.degree = sum(m.degree for m in maps)
        self._darity = [m.dom.arity for m in maps]
        self._carity = [m.cod.arity for m in maps]

    def _split(self, key, arities):
        out = []
        o = 0
        for a in arities:
            out.append(key[o:o + a])
            o += a
        return out

    def _sign_exps(self):
        # suffix sums of map degrees: |f_{a+1}| + ... + |f_k|
        degs = [m.degree for m in self.maps]
        suf = [0] * len(degs)
        acc = 0
        for a in range(len(degs) - 1, -1, -1):
            suf[a] = acc
            acc += degs[a]
        return suf

    def apply(self, key) -> dict:
        pieces = self._split(key, self._darity)
        suf = self._sign_exps()
        exp = 0
        for m, p, s in zip(self.maps, pieces, suf):
            exp += s * m.dom.degree(p)
        start = {(): (-1 if exp % 2 else 1)}
        for m, p in zip(self.maps, pieces):
            col = m.cols.get(p)
            if not col:
                return {}
            start = {k + r: a * b for k, a in start.items() for r, b in col.items()}
        cod = self.cod
        out = {}
        for k, v in start.items():
            if not cod.compatible(k):
                raise IdempotentMismatch(f"tensor of maps leaves the tensor space at {k}")
            out[k] = v
        return out

    def pullback(self, g: HomMap) -> HomMap:
        """g ∘ self."""
        suf = self._sign_exps()
        dom = self.dom
        out = {}
        for y, gcol in g.cols.items():
            pieces = self._split(y, self._carity)
            pre = [((), 0, 1)]  # (partial dom key, sign exponent, coefficient)
            for m, p, s in zip(self.maps, pieces, suf):
                rows = m.rows.get(p)
                if not rows:
                    pre = []
                    break
                nxt = []
                for k, e, a in pre:
                    for x, b in rows:
                        nxt.append((k + x, e + s * m.dom.degree(x), a * b))
                pre = nxt
            for x, e, a in pre:
                if not dom.compatible(x):
                    continue
                if e % 2:
                    a = -a
                acc = out.setdefault(x, {})
                for r, v in gcol.items():
                    w = acc.get(r)
                    acc[r] = a * v if w is None else w + a * v
        return HomMap(dom, g.cod, g.degree + self.degree, out, clean=True)

    def __matmul__(self, other: HomMap) -> HomMap:
        """self ∘ other, evaluated column by column."""
        out = {}
        for c, col in other.cols.items():
            acc = {}
            for mid, a in col.items():
                for r, b in self.apply(mid).items():
                    acc[r] = acc.get(r, 0) + a * b
            acc = {r: v for r, v in acc.items() if v}
            if acc:
                out[c] = acc
        return HomMap(other.dom, self.cod, self.degree + other.degree, out, clean=False)

    def materialize(self) -> HomMap:
        out = {}
        dom = self.dom
        colsets = [sorted(m.cols) for m in self.maps]
        for combo in product(*colsets):
            k = tuple(i for p in combo for i in p)
            if not dom.compatible(k):
                continue
            v = self.apply(k)
            if v:
                out[k] = v
        return HomMap(dom, self.cod, self.degree, out, clean=False)


def tensor_map(*maps) -> HomMap:
    """Materialized tensor product of maps with the Koszul sign rule."""
    return TensorMap(*maps).materialize()


def lazy_tensor(*maps) -> TensorMap:
    return TensorMap(*maps)


def identity(space) -> HomMap:
    return HomMap.identity(space)


def shift(M: GradedSpace, k: int = 1):
    """Return (M[1], σ_M) with σ_M the degree −1 identity on labels."""
    M1 = M.shift(k)
    return M1, sigma(M, M1)


def sigma(M: GradedSpace, M1: GradedSpace | None = None) -> HomMap:
    M1 = M1 or M.shift(1)
    one = M.field.one
    return HomMap(M, M1, -1, {(i,): {(i,): one} for i in range(M.dim)}, clean=False)


def sigma_inv(M: GradedSpace, M1: GradedSpace | None = None) -> HomMap:
    M1 = M1 or M.shift(1)
    one = M.field.one
    return HomMap(M1, M, 1, {(i,): {(i,): one} for i in range(M.dim)}, clean=False)


# direct sums

@dataclass
class DirectSum:
    space: GradedSpace
    parts: tuple
    offsets: tuple

    def inj(self, a: int) -> HomMap:
        P, o = self.parts[a], self.offsets[a]
        one = self.space.field.one
        return HomMap(P, self.space, 0, {(i,): {(i + o,): one} for i in range(P.dim)}, clean=False)

    def proj(self, a: int) -> HomMap:
        P, o = self.parts[a], self.offsets[a]
        one = self.space.field.one
        return HomMap(self.space, P, 0, {(i + o,): {(i,): one} for i in range(P.dim)}, clean=False)


def direct_sum(*parts: GradedSpace, tags=None) -> DirectSum:
    tags = tags or [str(a) for a in range(len(parts))]
    base = parts[0].base
    basis, offsets, o = [], [], 0
    for t, P in zip(tags, parts):
        offsets.append(o)
        basis.extend((f"{t}:{l}", d, a, b) for l, d, a, b in P.basis())
        o += P.dim
    return DirectSum(GradedSpace(base, basis), tuple(parts), tuple(offsets))


def block_map(dom_sum: DirectSum, cod_sum: DirectSum, blocks, degree: int) -> HomMap:
    """Assemble a map between direct sums from blocks[i][j]: dom part j -> cod part i."""
    out = {}
    for i, row in enumerate(blocks):
        for j, f in enumerate(row):
            if f is None:
                continue
            oi, oj = cod_sum.offsets[i], dom_sum.offsets[j]
            for (c,), col in f.cols.items():
                acc = out.setdefault((c + oj,), {})
                for (r,), v in col.items():
                    acc[(r + oi,)] = acc.get((r + oi,), 0) + v
    return HomMap(dom_sum.space, cod_sum.space, degree, out)


def extract_block(f: HomMap, dom_sum: DirectSum, cod_sum: DirectSum, i: int, j: int) -> HomMap:
    oi, oj = cod_sum.offsets[i], dom_sum.offsets[j]
    P, Q = dom_sum.parts[j], cod_sum.parts[i]
    out = {}
    for (c,), col in f.cols.items():
        if not oj <= c < oj + P.dim:
            continue
        acc = {(r - oi,): v for (r,), v in col.items() if oi <= r < oi + Q.dim}
        if acc:
            out[(c - oj,)] = acc
    return HomMap(P, Q, f.degree, out, clean=False)


# exact linear algebra on homogeneous maps between simple spaces

def _blockpairs(f: HomMap):
    """Yield (dom block key, dom indices, cod indices) for each S-linear block."""
    dblocks = f.dom.blocks()
    cblocks = f.cod.blocks()
    for (d, l, r), idx in dblocks.items():
        yield (d, l, r), idx, cblocks.get((d + f.degree, l, r), [])


def dense_block(f: HomMap, rows_idx, cols_idx):
    zero = f.field.zero
    pos = {r: a for a, r in enumerate(rows_idx)}
    m = [[zero] * len(cols_idx) for _ in rows_idx]
    for j, c in enumerate(cols_idx):
        for (r,), v in f.cols.get((c,), {}).items():
            if r in pos:
                m[pos[r]][j] = v
    return m


@dataclass
class Splitting:
    """Exact data of a homogeneous map f: M -> N.

    ``kernel`` and ``image`` are lists of sparse vectors ({key: scalar});
    ``ginv`` is a generalized inverse N -> M of degree −|f| with
    f∘ginv∘f = f and ginv∘f∘ginv = ginv; ginv∘f is a projection onto a
    complement of the kernel and f∘ginv is the identity on the image.
    """

    kernel: list
    image: list
    ginv: HomMap

    @property
    def section(self):
        return self.ginv

    @property
    def retraction(self):
        return self.ginv


def solve_splitting(f: HomMap) -> Splitting:
    if f.dom.arity != 1 or f.cod.arity != 1:
        raise ModuleMismatch("solve_splitting needs simple spaces")
    F = f.field
    zero, one = F.zero, F.one
    kernel, image, ginv = [], [], {}
    for _, didx, cidx in _blockpairs(f):
        A = dense_block(f, cidx, didx)
        if not cidx:
            kernel.extend({(c,): one} for c in didx)
            continue
        cols = [[A[i][j] for i in range(len(cidx))] for j in range(len(didx))]
        piv = linalg.independent_subset(cols, len(cidx))
        for v in linalg.nullspace(A, len(didx), zero):
            kernel.append({(didx[j],): x for j, x in enumerate(v) if x})
        imvecs = [cols[p] for p in piv]
        for v in imvecs:
            image.append({(cidx[i],): x for i, x in enumerate(v) if x})
        units = linalg.complement_units(imvecs, len(cidx))
        n = len(cidx)
        # basis of the codomain block: image vectors then unit vectors (as columns)
        B = [[zero] * n for _ in range(n)]
        for j, v in enumerate(imvecs):
            for i in range(n):
                B[i][j] = v[i]
        for j, u in enumerate(units):
            B[u][len(imvecs) + j] = one
        Binv = linalg.inverse(B, zero)
        # ginv(y) = Σ_j (Binv y)_j e_{piv_j} for the image part
        for i in range(n):
            acc = {}
            for j, p in enumerate(piv):
                if Binv[j][i]:
                    acc[(didx[p],)] = Binv[j][i]
            if acc:
                ginv[(cidx[i],)] = acc
    return Splitting(kernel, image, HomMap(f.cod, f.dom, -f.degree, ginv, clean=False))


def hom_inverse(f: HomMap) -> HomMap:
    """Inverse of an invertible homogeneous map; NotInvertible names a singular block."""
    F = f.field
    out = {}
    seen = set()
    for (d, l, r), didx, cidx in _blockpairs(f):
        seen.add((d + f.degree, l, r))
        if len(didx) != len(cidx):
            raise NotInvertible(f"block degree={d} idempotent={(l, r)}: {len(didx)} -> {len(cidx)}")
        A = dense_block(f, cidx, didx)
        try:
            Ai = linalg.inverse(A, F.zero)
        except NotInvertible:
            raise NotInvertible(f"singular block at degree={d} idempotent={(l, r)}") from None
        for i, c in enumerate(cidx):
            col = {(didx[j],): Ai[j][i] for j in range(len(didx)) if Ai[j][i]}
            if col:
                out[(c,)] = col
    for (d, l, r), cidx in f.cod.blocks().items():
        if (d, l, r) not in seen and cidx:
            raise NotInvertible(f"codomain block degree={d} idempotent={(l, r)} not hit")
    return HomMap(f.cod, f.dom, -f.degree, out, clean=False)


def homology_dims(M: GradedSpace, d: HomMap) -> dict:
    """Per (degree, idempotent) homology dimensions of the complex (M, d), |d| = 1."""
    ranks = {}
    for (deg, l, r), didx, cidx in _blockpairs(d):
        ranks[(deg, l, r)] = linalg.rank(dense_block(d, cidx, didx), len(didx)) if cidx else 0
    out = {}
    for (deg, l, r), idx in M.blocks().items():
        rk_out = ranks.get((deg, l, r), 0)
        rk_in = ranks.get((deg - d.degree, l, r), 0)
        out[(deg, l, r)] = len(idx) - rk_out - rk_in
    return out


def vec_add(a: dict, b: dict, s=1) -> dict:
    out = dict(a)
    for k, v in b.items():
        w = out.get(k, 0) + s * v
        if w:
            out[k] = w
        else:
            out.pop(k, None)
    return out
