"""Triangular differential graded bocses (normal S-coalgebras C = S ⊕ C̄).

Only the reduced part C̄ is stored: a simple graded bimodule whose basis is
ordered by layer, together with the reduced comultiplication
μ̄: C̄ -> C̄ ⊗ C̄ (degree 0) and the differential δ: C̄ -> C̄ (degree 1).
The unit part S is implicit: ε is the projection, μ(1) = 1⊗1 and δ(1) = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import linalg
from .ainfty import AInfAlgebra, CheckResult
from .errors import StasheffViolation, TriangularityViolation
from .graded import GradedSpace, HomMap, identity, lazy_tensor, tensor


class TriangularBocs:
    """A triangular bocs given by its layered reduced part.

    ``layer[i]`` is the filtration layer (≥ 1) of basis element i, so
    C̄_j is spanned by the elements with layer ≤ j.
    """

    def __init__(self, Cbar: GradedSpace, layer, comult: HomMap, diff: HomMap, name: str = ""):
        self.C = Cbar
        self.layer = tuple(int(x) for x in layer)
        self.comult = comult
        self.diff = diff
        self.name = name
        self.L = max(self.layer, default=0)
        if len(self.layer) != Cbar.dim:
            raise ValueError("one layer index per basis element")
        if any(x < 1 for x in self.layer):
            raise TriangularityViolation("layers start at 1")
        self._by_layer = {}
        for i, x in enumerate(self.layer):
            self._by_layer.setdefault(x, []).append(i)

    @property
    def base(self):
        return self.C.base

    @property
    def field(self):
        return self.C.field

    def elements(self, layer: int | None = None):
        """Basis indices of the given layer (all indices when None)."""
        if layer is None:
            return list(range(self.C.dim))
        return self._by_layer.get(layer, [])

    def upto(self, layer: int):
        return [i for i in range(self.C.dim) if self.layer[i] <= layer]

    def mu(self, c: int) -> dict:
        """μ̄(c) as {(c1, c2): coef}."""
        return self.comult.cols.get((c,), {})

    def delta(self, c: int) -> dict:
        """δ(c) as {c': coef}."""
        return {k[0]: v for k, v in self.diff.cols.get((c,), {}).items()}

    def degree(self, c: int) -> int:
        return self.C.degrees[c]

    def __repr__(self):
        return f"TriangularBocs(dim={self.C.dim}, L={self.L})"


def _word_label(A: GradedSpace, w) -> str:
    return "|".join(A.labels[i] for i in w)


class BarBocs(TriangularBocs):
    """Truncated reduced bar construction T̄_S(A[1]) with words of length ≤ L."""

    def __init__(self, A: AInfAlgebra, L: int, verify: bool = True):
        if L < 1:
            raise ValueError("truncation level must be at least 1")
        self.alg = A
        sp = A.A
        words = []
        for n in range(1, L + 1):
            words.extend(A.power(n).keys())
        self.words = words
        self.word_index = {w: i for i, w in enumerate(words)}
        basis = []
        for w in words:
            deg = sum(sp.degrees[a] - 1 for a in w)
            basis.append((_word_label(sp, w), deg, sp.lefts[w[0]], sp.rights[w[-1]]))
        C = GradedSpace(sp.base, basis, name="Cbar")
        CC = tensor(C, C)
        comult = {}
        for i, w in enumerate(words):
            col = {}
            for k in range(1, len(w)):
                col[(self.word_index[w[:k]], self.word_index[w[k:]])] = sp.field.one
            if col:
                comult[(i,)] = col
        diff = {}
        for i, w in enumerate(words):
            col = self._delta_word(w)
            if col:
                diff[(i,)] = {(j,): v for j, v in col.items()}
        super().__init__(C, [len(w) for w in words], HomMap(C, CC, 0, comult, clean=False),
                         HomMap(C, C, 1, diff, clean=False), name="bar")
        # the requested level, even when longer words happen to be absent
        self.L = L
        if verify:
            dd = self.diff @ self.diff
            if not dd.is_zero():
                raise StasheffViolation(f"δ² ≠ 0 on bar word {dd.witness()[0]}")

    def _delta_word(self, w) -> dict:
        """δ(σa_1⊗...⊗σa_n) = Σ (id^r ⊗ m̂_s ⊗ id^t) on the word.

        Signs: (−1)^{Σ_{i≤r}(|a_i|−1)} from moving m̂_s (degree 1) past the
        first r shifted letters, and (−1)^{Σ_k (s−k)|a_{r+k}|} from
        m̂_s σ^{⊗s} = σ m_s.
        """
        A = self.alg
        degs = A.A.degrees
        out = {}
        n = len(w)
        prefix = [0]
        for a in w:
            prefix.append(prefix[-1] + degs[a] - 1)
        for s in range(1, n + 1):
            ms = A.op(s)
            if ms is None:
                continue
            for r in range(0, n - s + 1):
                mid = w[r:r + s]
                col = ms.cols.get(mid)
                if not col:
                    continue
                e = prefix[r] + sum((s - 1 - k) * degs[a] for k, a in enumerate(mid))
                for (b,), v in col.items():
                    nw = w[:r] + (b,) + w[r + s:]
                    j = self.word_index[nw]
                    val = -v if e % 2 else v
                    out[j] = out.get(j, 0) + val
        return {j: v for j, v in out.items() if v}


def bar_construct(A: AInfAlgebra, L: int) -> BarBocs:
    return BarBocs(A, L, verify=True)


def check_bocs_axioms(B: TriangularBocs) -> CheckResult:
    res = CheckResult("bocs")
    C = B.C
    idC = identity(C)
    mu, d = B.comult, B.diff
    res.add_flag("homogeneous", mu.degree == 0 and d.degree == 1
                 and mu.check_homogeneous() and d.check_homogeneous())
    coassoc = (lazy_tensor(mu, idC) @ mu) - (lazy_tensor(idC, mu) @ mu)
    res.add("coassociativity", coassoc)
    # counit laws: μ = 1⊗x + x⊗1 + μ̄ with μ̄ valued in C̄⊗C̄, so (ε⊗id)μ = id
    # holds as soon as μ̄ has no component in S⊗C̄ or C̄⊗S; the data type
    # guarantees this, we still assert the codomain.
    res.add_flag("counit", mu.cod == tensor(C, C))
    cod = (mu @ d) - (lazy_tensor(idC, d) @ mu) - (lazy_tensor(d, idC) @ mu)
    res.add("coderivation", cod)
    res.add("delta_squared", d @ d)
    res.add_flag("counit_delta", d.cod == C)
    bad = None
    for (c,), col in mu.cols.items():
        lc = B.layer[c]
        for (x, y) in col:
            if B.layer[x] >= lc or B.layer[y] >= lc:
                bad = (C.labels[c], C.labels[x], C.labels[y])
                break
        if bad:
            break
    res.add_flag("triangular_mu", bad is None, bad)
    bad = None
    for (c,), col in d.cols.items():
        for (x,) in col:
            if B.layer[x] > B.layer[c]:
                bad = (C.labels[c], C.labels[x])
    res.add_flag("triangular_delta", bad is None, bad)
    return res


def iterate_comult(B: TriangularBocs, n: int, c) -> dict:
    """μ̄^n(c) = (id ⊗ μ̄^{n−1}) μ̄ (c), as {(c_0, ..., c_n): coef}.

    ``c`` is a basis index or a sparse vector {index: coef}.
    """
    vec = {c: B.field.one} if isinstance(c, int) else dict(c)
    cur = {(k,): v for k, v in vec.items() if v}
    for _ in range(n):
        nxt = {}
        for key, v in cur.items():
            for (x, y), w in B.mu(key[-1]).items():
                k2 = key[:-1] + (x, y)
                nxt[k2] = nxt.get(k2, 0) + v * w
        cur = {k: v for k, v in nxt.items() if v}
    return cur


@dataclass
class BlockSplit:
    """Split of one (degree, left, right) block of a new layer."""

    key: tuple
    new: list            # new basis indices of this block
    V: list              # cycles, sparse vectors over C̄ indices
    W: list              # basis indices spanning the complement
    coords: dict = field(default_factory=dict)  # b -> (old part, {v pos: a}, {w pos: b})


@dataclass
class LayerSplit:
    """C̄_{i+1} = C̄_i ⊕ V_{i+1} ⊕ W_{i+1} for i = 0..L−1, split by blocks."""

    layers: dict  # i+1 -> list[BlockSplit]

    def dims(self, layer: int):
        return {b.key: (len(b.new), len(b.V), len(b.W)) for b in self.layers[layer]}


def _vec_sub(a: dict, b: dict, s) -> dict:
    out = dict(a)
    for k, v in b.items():
        w = out.get(k, 0) - s * v
        if w:
            out[k] = w
        else:
            out.pop(k, None)
    return out


def layer_split(B: TriangularBocs) -> LayerSplit:
    C = B.C
    F = B.field
    zero, one = F.zero, F.one
    blocks = {}
    for i in range(C.dim):
        blocks.setdefault((C.degrees[i], C.lefts[i], C.rights[i]), []).append(i)
    out = {}
    for lay in range(1, B.L + 1):
        splits = []
        for key in sorted(blocks, key=lambda k: (k[0], k[1], k[2])):
            idx = blocks[key]
            new = [i for i in idx if B.layer[i] == lay]
            if not new:
                continue
            cols = [i for i in idx if B.layer[i] <= lay]
            tkey = (key[0] + 1, key[1], key[2])
            rows = [i for i in blocks.get(tkey, []) if B.layer[i] <= lay]
            rpos = {r: a for a, r in enumerate(rows)}
            for c in cols:
                for r in B.delta(c):
                    if r not in rpos:
                        raise TriangularityViolation(f"δ({C.labels[c]}) leaves C̄_{lay}")
            A = [[zero] * len(cols) for _ in rows]
            for j, c in enumerate(cols):
                for r, v in B.delta(c).items():
                    A[rpos[r]][j] = v
            if rows:
                Z = linalg.nullspace(A, len(cols), zero)
            else:
                Z = [[one if a == j else zero for a in range(len(cols))] for j in range(len(cols))]
            newpos = [cols.index(b) for b in new]
            proj = [[z[p] for p in newpos] for z in Z]
            chosen = linalg.independent_subset(proj, len(new))
            V = [{cols[a]: x for a, x in enumerate(Z[j]) if x} for j in chosen]
            Vproj = [proj[j] for j in chosen]
            units = linalg.complement_units(Vproj, len(new))
            W = [new[u] for u in units]
            # change of basis on the new coordinates: columns V projections then units
            m = len(new)
            M = [[zero] * m for _ in range(m)]
            for j, v in enumerate(Vproj):
                for a in range(m):
                    M[a][j] = v[a]
            for j, u in enumerate(units):
                M[u][len(Vproj) + j] = one
            Minv = linalg.inverse(M, zero)
            bs = BlockSplit(key, new, V, W)
            for a, b in enumerate(new):
                alpha = {j: Minv[j][a] for j in range(len(V)) if Minv[j][a]}
                beta = {j: Minv[len(V) + j][a] for j in range(len(W)) if Minv[len(V) + j][a]}
                rest = {b: one}
                for j, x in alpha.items():
                    rest = _vec_sub(rest, V[j], x)
                for j, x in beta.items():
                    rest = _vec_sub(rest, {W[j]: one}, x)
                if any(B.layer[k] >= lay for k in rest):
                    raise TriangularityViolation("layer decomposition failed")
                bs.coords[b] = (rest, alpha, beta)
            splits.append(bs)
        out[lay] = splits
    ls = LayerSplit(out)
    # δ(C̄_{i+1}) ⊆ C̄_i ⊕ V_{i+1}
    for lay, splits in out.items():
        for bs in splits:
            for b in bs.new:
                dv = B.delta(b)
                newpart = {k: v for k, v in dv.items() if B.layer[k] == lay}
                if newpart and decompose_cycle(B, ls, lay, dv) is None:
                    raise TriangularityViolation(f"δ({C.labels[b]}) not in C̄_{lay - 1} ⊕ V_{lay}")
    return ls


def decompose_cycle(B: TriangularBocs, ls: LayerSplit, lay: int, vec: dict):
    """Write vec ∈ C̄_{lay−1} + V_lay as (old part, {(block key, v pos): coef}).

    Returns None when vec has a component outside C̄_{lay−1} ⊕ V_lay.
    """
    rest = dict(vec)
    coeffs = {}
    for bs in ls.layers.get(lay, []):
        for b in bs.new:
            x = vec.get(b)
            if not x:
                continue
            old, alpha, beta = bs.coords[b]
            for j, y in alpha.items():
                coeffs[(bs.key, j)] = coeffs.get((bs.key, j), 0) + x * y
    for (key, j), a in list(coeffs.items()):
        if not a:
            del coeffs[(key, j)]
            continue
        bs = next(s for s in ls.layers[lay] if s.key == key)
        rest = _vec_sub(rest, bs.V[j], a)
    if any(B.layer[k] >= lay for k in rest):
        return None
    return rest, coeffs


def cbar_vector_labels(B: TriangularBocs, vec: dict) -> dict:
    return {B.C.labels[k]: v for k, v in vec.items()}
