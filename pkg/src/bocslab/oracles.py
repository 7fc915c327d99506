"""Seeded random structures and brute-force evaluators.

Generators produce valid inputs (A∞-algebras, Maurer-Cartan elements, ...)
by plain linear algebra over the exact field.  The ``brute_*`` functions
re-evaluate identities by enumerating basis tensors and applying the
operations entry by entry, with Koszul signs computed from element degrees;
they share no code with the HomMap composition engine.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from . import linalg
from .ainfty import AInfAlgebra, AInfAlgHomotopy, AInfAlgMorphism, compositions, homotopy_sign, sgn
from .errors import GenerationFailed
from .graded import DirectSum, GradedSpace, HomMap, direct_sum, tensor
from .scalars import QQ, BaseRing, Field


@dataclass
class GenSpec:
    seed: int = 0
    n_idem: int = 1
    max_dim: int = 6
    arity_bound: int = 3
    max_len: int = 3          # paths longer than this are zero
    density: float = 0.5
    with_m1: bool = True
    with_m3: bool = True
    field: Field = QQ
    degree_range: tuple = (-1, 1)


def _rng(spec_or_seed):
    return random.Random(spec_or_seed.seed if isinstance(spec_or_seed, GenSpec) else spec_or_seed)


# path algebras ---------------------------------------------------------------

class PathData:
    """Basis of a truncated path algebra: paths as tuples of arrow indices.

    All paths of length ≤ K are kept, with K ≤ max_len the largest value for
    which the basis has at most max_dim elements.  The discarded paths then
    span a two-sided ideal stable under any derivation that does not shorten
    paths, so the quotient inherits m_2 and m_1.
    """

    def __init__(self, arrows, max_len, max_dim):
        # arrows: list of (label, degree, left, right); a path x_1...x_k is
        # composable when right(x_i) == left(x_{i+1}).
        self.arrows = arrows
        levels = [[(a,) for a in range(len(arrows))]]
        while len(levels) < max_len:
            nxt = [p + (a,) for p in levels[-1] for a in range(len(arrows))
                   if arrows[p[-1]][3] == arrows[a][2]]
            if not nxt:
                break
            levels.append(nxt)
        paths = []
        K = 0
        for lev in levels:
            if len(paths) + len(lev) > max_dim:
                break
            paths.extend(lev)
            K += 1
        self.paths = paths
        self.index = {p: i for i, p in enumerate(self.paths)}
        self.max_len = K

    def degree(self, p):
        return sum(self.arrows[a][1] for a in p)

    def basis(self):
        out = []
        for p in self.paths:
            lab = "".join(self.arrows[a][0] for a in p)
            out.append((lab, self.degree(p), self.arrows[p[0]][2], self.arrows[p[-1]][3]))
        return out


def _random_quiver(rng, spec: GenSpec, budget: int):
    """Arrows (label, degree, left, right).

    Some arrows copy the endpoints of an earlier arrow with one degree less,
    so that the derivation can send them to that arrow.
    """
    n = spec.n_idem
    narrows = rng.randint(1, max(1, min(3, budget)))
    names = "abcdefgh"
    arrows = []
    for k in range(narrows):
        if k > 0 and spec.with_m1 and rng.random() < 0.5:
            _, d, l, r = arrows[rng.randrange(k)]
            arrows.append((names[k], d - 1, l, r))
        else:
            # mostly start where an earlier arrow ends, so that products exist
            left = arrows[rng.randrange(k)][3] if k and rng.random() < 0.7 else rng.randrange(n)
            arrows.append((names[k], rng.randint(*spec.degree_range), left, rng.randrange(n)))
    return arrows


def _weight_part(rng, spec: GenSpec, budget: int, cap: int):
    """Basis and operation entries of a small A∞-algebra E whose operations
    are nonzero only on inputs of weight one and take values of weight ≥ 2.

    Every composite m_a(... m_b(...) ...) then feeds a weight ≥ 2 element
    into an operation, so all Stasheff identities hold trivially while m_1,
    m_2 and m_3 can all be nonzero.
    """
    n = spec.n_idem
    nx = rng.randint(1, 2) if cap >= 3 else 1
    budget = min(budget, cap - nx)
    xs = [(f"x{i}", rng.randint(*spec.degree_range), rng.randrange(n), rng.randrange(n)) for i in range(nx)]
    if nx == 2 and rng.random() < 0.7:
        xs[1] = (xs[1][0], xs[1][1], xs[0][3], xs[1][3])
    basis = list(xs)
    entries = []  # (arity, input indices, output index)

    def chains(k):
        out = [(i,) for i in range(nx)]
        for _ in range(k - 1):
            out = [c + (j,) for c in out for j in range(nx) if xs[c[-1]][3] == xs[j][2]]
        return out

    wanted = [3, 2, 1] if spec.arity_bound >= 3 else [2, 1]
    for k in wanted:
        if len(basis) >= nx + budget:
            break
        cands = chains(k)
        if not cands:
            continue
        c = rng.choice(cands)
        deg = sum(xs[i][1] for i in c) + 2 - k
        lab = {3: "y", 2: "z", 1: "w"}[k] + str(len(basis))
        basis.append((lab, deg, xs[c[0]][2], xs[c[-1]][3]))
        out = len(basis) - 1
        for cc in cands:
            d = sum(xs[i][1] for i in cc) + 2 - k
            if d == deg and xs[cc[0]][2] == basis[out][2] and xs[cc[-1]][3] == basis[out][3]:
                if cc == c or rng.random() < 0.5:
                    entries.append((k, cc, out))
    return basis, entries, nx


def gen_dg_algebra(spec: GenSpec) -> AInfAlgebra:
    """Random A∞-algebra: a truncated dg path algebra, plus (when m_3 is
    requested) a direct summand carrying genuinely higher operations.  An
    extra m_3 on the path part is solved against S_3 and S_4 when degrees
    allow.  The result satisfies all Stasheff identities.
    """
    rng = _rng(spec)
    F = spec.field
    base = BaseRing(spec.n_idem, F)
    wbudget = 0
    if spec.with_m3 and spec.arity_bound >= 3 and spec.max_dim >= 3:
        wbudget = rng.randint(1, min(3, spec.max_dim - 2))
    wbasis, wentries = [], []
    if wbudget:
        wbasis, wentries, _ = _weight_part(rng, spec, wbudget, spec.max_dim - 1)
        wbasis = wbasis[:spec.max_dim - 1]
        wentries = [e for e in wentries if e[2] < len(wbasis)]
    pbudget = spec.max_dim - len(wbasis)
    # redraw a few times when no path of length two fits, which would leave m_2 = 0
    for _ in range(6):
        arrows = _random_quiver(rng, spec, pbudget)
        pd = PathData(arrows, min(spec.max_len, 4), pbudget)
        if pd.max_len >= 2 or pbudget < 3 or spec.max_len < 2:
            break
    if not pd.paths and not wbasis:
        raise GenerationFailed("empty basis")
    A = GradedSpace(base, pd.basis() + wbasis, name="A")
    off = len(pd.paths)
    m2 = {}
    for p in pd.paths:
        for q in pd.paths:
            if arrows[p[-1]][3] != arrows[q[0]][2]:
                continue
            pq = p + q
            if pq in pd.index:
                m2[(pd.index[p], pd.index[q])] = {(pd.index[pq],): F.one}
    ops = {1: {}, 2: m2, 3: {}}
    # m_1 on the path part: closed arrows (d = 0) and open arrows whose
    # differential is a combination of paths of closed arrows
    if spec.with_m1:
        closed = set()
        for a in range(len(arrows)):
            has_target = any(arrows[b][1] == arrows[a][1] + 1 and arrows[b][2:] == arrows[a][2:]
                             for b in range(len(arrows)) if b != a)
            if not has_target or rng.random() < 0.3:
                closed.add(a)
        dar = {}
        for a in range(len(arrows)):
            if a in closed:
                continue
            _, deg, l, r = arrows[a]
            cands = [p for p in pd.paths if all(x in closed for x in p)
                     and pd.degree(p) == deg + 1 and arrows[p[0]][2] == l and arrows[p[-1]][3] == r]
            vec = {}
            for p in cands:
                if rng.random() < max(spec.density, 0.5):
                    vec[p] = F.random(rng, nonzero=True)
            if vec:
                dar[a] = vec
        for p in pd.paths:
            out = {}
            sign_deg = 0
            for pos, a in enumerate(p):
                if a in dar:
                    s = -1 if sign_deg % 2 else 1
                    for q, c in dar[a].items():
                        np_ = p[:pos] + q + p[pos + 1:]
                        if np_ in pd.index:
                            k = (pd.index[np_],)
                            out[k] = out.get(k, 0) + s * c
                sign_deg += arrows[a][1]
            out = {k: v for k, v in out.items() if v}
            if out:
                ops[1][(pd.index[p],)] = out
    for k, ins, o in wentries:
        if k == 1 and not spec.with_m1:
            continue
        key = tuple(off + i for i in ins)
        ops[k].setdefault(key, {})[(off + o,)] = F.random(rng, nonzero=True)
    top = 3 if spec.arity_bound >= 3 else 2
    maps = {}
    for k in range(1, top + 1):
        if ops[k]:
            maps[k] = HomMap(tensor(*([A] * k)), A, 2 - k, ops[k], clean=False)
    alg = AInfAlgebra(A, maps, top)
    if spec.with_m3 and top >= 3 and pd.paths:
        m3 = _solve_m3(alg, pd, rng, F)
        if m3 is not None:
            allm3 = m3 if 3 not in alg.ops else m3 + alg.ops[3]
            alg = AInfAlgebra(A, dict(alg.ops, **{3: allm3}), 3)
    alg.path_data = pd
    return alg


def _solve_m3(alg: AInfAlgebra, pd: PathData, rng, F):
    from .ainfty import stasheff_defect
    A = alg.A
    A3 = alg.power(3)
    arrows = pd.arrows
    unknowns = []
    for key in A3.keys():
        if any(i >= len(pd.paths) for i in key):
            continue
        ps = [pd.paths[i] for i in key]
        tot = sum(len(p) for p in ps)
        deg = sum(pd.degree(p) for p in ps) - 1
        l, r = arrows[ps[0][0]][2], arrows[ps[-1][-1]][3]
        for q in pd.paths:
            if len(q) >= tot and pd.degree(q) == deg and arrows[q[0]][2] == l and arrows[q[-1]][3] == r:
                unknowns.append((key, pd.index[q]))
    if not unknowns:
        return None
    rng.shuffle(unknowns)
    unknowns = unknowns[:12]
    cols = []
    for key, q in unknowns:
        m3 = HomMap(A3, A, -1, {key: {(q,): F.one}}, clean=False)
        B = AInfAlgebra(A, dict(alg.ops, **{3: m3}), 3)
        d = {}
        for n in (3, 4):
            z = stasheff_defect(B, n)
            for c, col in z.cols.items():
                for rr, v in col.items():
                    d[(n, c, rr)] = v
        cols.append(d)
    keys = sorted(set(k for d in cols for k in d))
    if not keys:
        sol = [[F.one if i == j else F.zero for i in range(len(unknowns))] for j in range(len(unknowns))]
    else:
        rows = [[d.get(k, F.zero) for d in cols] for k in keys]
        sol = linalg.nullspace(rows, len(unknowns), F.zero)
    if not sol:
        return None
    vec = [F.zero] * len(unknowns)
    for s in sol:
        c = F.random(rng)
        vec = [x + c * y for x, y in zip(vec, s)]
    m3 = {}
    for (key, q), v in zip(unknowns, vec):
        if v:
            m3.setdefault(key, {})[(q,)] = v
    if not m3:
        return None
    return HomMap(A3, A, -1, m3, clean=False)


def gen_bimodule(rng, base: BaseRing, dim: int, degrees=(-1, 0, 1), prefix="x") -> GradedSpace:
    basis = []
    for i in range(dim):
        basis.append((f"{prefix}{i}", rng.choice(degrees), rng.randrange(base.n), rng.randrange(base.n)))
    return GradedSpace(base, basis)


def random_hom(rng, dom, cod, degree, density=0.5, field=None, linear=True, module=False) -> HomMap:
    """Random homogeneous (S-linear) map; ``dom`` may be a tensor space."""
    F = field or dom.field
    cols = {}
    cod_keys = cod.keys()
    for c in dom.keys():
        dc = dom.degree(c)
        for r in cod_keys:
            if cod.degree(r) != dc + degree:
                continue
            if linear:
                if cod.right(r) != dom.right(c):
                    continue
                if not module and cod.left(r) != dom.left(c):
                    continue
            if rng.random() < density:
                v = F.random(rng, nonzero=True)
                cols.setdefault(c, {})[r] = v
    return HomMap(dom, cod, degree, cols, clean=False)


def gen_op_family(seed: int, n_idem=1, dim=None, arity=3, density=0.3, field=QQ) -> AInfAlgebra:
    """Random operations m_1..m_arity (degrees 2−n), no identities imposed."""
    rng = random.Random(seed)
    base = BaseRing(n_idem, field)
    dim = dim or rng.randint(1, 4)
    A = gen_bimodule(rng, base, dim, prefix="a")
    ops = {}
    for n in range(1, arity + 1):
        dom = tensor(*([A] * n))
        ops[n] = random_hom(rng, dom, A, 2 - n, density=density, field=field)
    return AInfAlgebra(A, ops, arity)


# brute-force evaluators ------------------------------------------------------

def _words(spaces):
    """All compatible basis tensors of the tensor product of ``spaces``."""
    T = tensor(*spaces)
    return T.keys()


def _ev(m: HomMap | None, key) -> dict:
    if m is None:
        return {}
    return m.cols.get(tuple(key), {})


def brute_stasheff(A: AInfAlgebra, n: int, variant: str = "S") -> dict:
    """Defect of S_n (variant 'S') or of the translated sum (variant 'Z\''), entrywise."""
    degs = A.A.degrees
    out = {}
    for w in _words([A.A] * n):
        acc = {}
        for r in range(n):
            for s in range(1, n - r + 1):
                t = n - r - s
                ms, mo = A.op(s), A.op(r + 1 + t)
                if ms is None or mo is None:
                    continue
                e = (r + s * t) if variant == "S" else (r * s + t)
                # Koszul: m_s passes the first r letters
                e += (2 - s) * sum(degs[a] for a in w[:r])
                inner = _ev(ms, w[r:r + s])
                for (b,), c in inner.items():
                    for y, v in _ev(mo, w[:r] + (b,) + w[r + s:]).items():
                        val = c * v
                        acc[y] = acc.get(y, 0) + (-val if e % 2 else val)
        acc = {k: v for k, v in acc.items() if v}
        if acc:
            out[w] = acc
    return out


def _apply_tensor_of_maps(maps, degs_of, key):
    """Entrywise (f_1 ⊗ ... ⊗ f_k)(x_1 ⊗ ... ⊗ x_k) with explicit Koszul signs.

    ``maps`` is a list of (HomMap, arity); ``degs_of(piece)`` returns the
    degree of a domain piece.  Returns {output tuple: coef}.
    """
    pieces = []
    o = 0
    for m, a in maps:
        pieces.append(key[o:o + a])
        o += a
    e = 0
    for b in range(len(maps)):
        for a in range(b):
            e += maps[b][0].degree * degs_of(pieces[a])
    res = {(): (-1 if e % 2 else 1)}
    for (m, _), p in zip(maps, pieces):
        col = m.cols.get(tuple(p), {})
        if not col:
            return {}
        res = {k + r: v * c for k, v in res.items() for r, c in col.items()}
    return res


def brute_morphism(f: AInfAlgMorphism, n: int) -> dict:
    """Σ_n − Σ'_n entrywise."""
    A, B = f.source, f.target
    degs = A.A.degrees
    dsum = lambda p: sum(degs[a] for a in p)
    out = {}
    for w in _words([A.A] * n):
        acc = {}
        for r in range(n):
            for s in range(1, n - r + 1):
                t = n - r - s
                ms, fo = A.op(s), f.comp(r + 1 + t)
                if ms is None or fo is None:
                    continue
                e = r + s * t + (2 - s) * dsum(w[:r])
                for (b,), c in _ev(ms, w[r:r + s]).items():
                    for y, v in _ev(fo, w[:r] + (b,) + w[r + s:]).items():
                        acc[y] = acc.get(y, 0) + (-(c * v) if e % 2 else c * v)
        for parts in compositions(n):
            m = B.op(len(parts))
            maps = [(f.comp(i), i) for i in parts]
            if m is None or any(x[0] is None for x in maps):
                continue
            for key, c in _apply_tensor_of_maps(maps, dsum, w).items():
                for y, v in _ev(m, key).items():
                    val = c * v
                    acc[y] = acc.get(y, 0) - (-val if sgn(parts) else val)
        acc = {k: v for k, v in acc.items() if v}
        if acc:
            out[w] = acc
    return out


def brute_alg_homotopy(h: AInfAlgHomotopy, f: AInfAlgMorphism, g: AInfAlgMorphism, n: int) -> dict:
    """f_n − g_n − H(h)_n − H_{f,g}(h)_n entrywise."""
    A, B = f.source, f.target
    degs = A.A.degrees
    dsum = lambda p: sum(degs[a] for a in p)
    out = {}
    for w in _words([A.A] * n):
        acc = {}
        for y, v in _ev(f.comp(n), w).items():
            acc[y] = acc.get(y, 0) + v
        for y, v in _ev(g.comp(n), w).items():
            acc[y] = acc.get(y, 0) - v
        for r in range(n):
            for s in range(1, n - r + 1):
                t = n - r - s
                ms, ho = A.op(s), h.comp(r + 1 + t)
                if ms is None or ho is None:
                    continue
                e = r + s * t + (2 - s) * dsum(w[:r])
                for (b,), c in _ev(ms, w[r:r + s]).items():
                    for y, v in _ev(ho, w[:r] + (b,) + w[r + s:]).items():
                        acc[y] = acc.get(y, 0) - (-(c * v) if e % 2 else c * v)
        for parts in compositions(n):
            m = B.op(len(parts))
            if m is None:
                continue
            for p in range(len(parts)):
                il, s, jl = parts[:p], parts[p], parts[p + 1:]
                maps = [(f.comp(i), i) for i in il] + [(h.comp(s), s)] + [(g.comp(j), j) for j in jl]
                if any(x[0] is None for x in maps):
                    continue
                bit = homotopy_sign(il, s, jl)
                for key, c in _apply_tensor_of_maps(maps, dsum, w).items():
                    for y, v in _ev(m, key).items():
                        val = c * v
                        acc[y] = acc.get(y, 0) - (-val if bit else val)
        acc = {k: v for k, v in acc.items() if v}
        if acc:
            out[w] = acc
    return out


def hom_to_dict(f: HomMap) -> dict:
    return {c: dict(col) for c, col in f.cols.items() if col}


# modules and GMod-B morphisms ------------------------------------------------

def gen_module(rng, base: BaseRing, dim: int, degrees=(-1, 0, 1), prefix="m") -> GradedSpace:
    """Random graded right S-module (left idempotent None)."""
    basis = [(f"{prefix}{i}", rng.choice(degrees), None, rng.randrange(base.n)) for i in range(dim)]
    return GradedSpace(base, basis)


def random_component(rng, B, c: int, M: GradedSpace, N: GradedSpace, degree: int, density=0.5, field=None) -> HomMap:
    """Random f¹(c): M e_t -> N e_s for c ∈ e_t C̄ e_s, of degree degree + |c|."""
    F = field or M.field
    C = B.C
    t, s, dc = C.lefts[c], C.rights[c], C.degrees[c]
    cols = {}
    for m in range(M.dim):
        if M.rights[m] != t:
            continue
        for n in range(N.dim):
            if N.rights[n] != s or N.degrees[n] != M.degrees[m] + degree + dc:
                continue
            if rng.random() < density:
                cols.setdefault((m,), {})[(n,)] = F.random(rng, nonzero=True)
    return HomMap(M, N, degree + dc, cols, clean=False)


def gen_gmod_morphism(rng, B, M, N, degree=0, density=0.5, f0=True, layers=None):
    """Random GModMorphism M -> N of the given degree over the bocs B."""
    from .gmodb import GModMorphism
    zero0 = HomMap.zero(M, N, degree)
    g0 = random_hom(rng, M, N, degree, density, module=True) if f0 else zero0
    f1 = {}
    for c in range(B.C.dim):
        if layers is not None and B.layer[c] not in layers:
            continue
        h = random_component(rng, B, c, M, N, degree, density)
        if not h.is_zero():
            f1[c] = h
    return GModMorphism(B, M, N, degree, g0, f1)


# Maurer-Cartan elements ---------------------------------------------------------

def _square_zero(rng, M: GradedSpace, acyclic: bool, F):
    """Random u⁰ with (u⁰)² = 0: a pairing x -> y conjugated by a random
    degree-preserving automorphism.  Acyclic iff every element is paired."""
    free = list(range(M.dim))
    rng.shuffle(free)
    if acyclic:
        free.sort(key=lambda i: M.degrees[i])
    pairs, used = [], set()
    for x in free:
        if x in used:
            continue
        cands = [y for y in free if y not in used and y != x and M.rights[y] == M.rights[x]
                 and M.degrees[y] == M.degrees[x] + 1]
        if cands and (acyclic or rng.random() < 0.6):
            y = rng.choice(cands)
            pairs.append((x, y))
            used |= {x, y}
    if acyclic and len(used) != M.dim:
        raise GenerationFailed("module admits no acyclic pairing")
    d = HomMap(M, M, 1, {(x,): {(y,): F.one} for x, y in pairs}, clean=False)
    P = _random_automorphism(rng, M, F)
    from .graded import hom_inverse
    return P @ d @ hom_inverse(P)


def _random_automorphism(rng, M: GradedSpace, F):
    """Unitriangular (in label order) degree 0 automorphism, blockwise."""
    cols = {}
    for key, idx in M.blocks().items():
        for a, i in enumerate(idx):
            col = {(i,): F.one}
            for j in idx[:a]:
                if rng.random() < 0.5:
                    col[(j,)] = F.random(rng, nonzero=True, small=True)
            cols[(i,)] = col
    return HomMap(M, M, 0, cols, clean=False)


def gen_acyclic_module(rng, base: BaseRing, pairs: int, degrees=(-1, 0, 1), prefix="m") -> GradedSpace:
    basis = []
    for k in range(pairs):
        d, r = rng.choice(degrees), rng.randrange(base.n)
        basis.append((f"{prefix}{2 * k}", d, None, r))
        basis.append((f"{prefix}{2 * k + 1}", d + 1, None, r))
    rng.shuffle(basis)
    return GradedSpace(base, basis)


def gen_mc(B, M: GradedSpace, rng, acyclic: bool = False, density: float = 0.5, u0=None, tries: int = 4):
    """Random twisted module (M, u) over B.

    u⁰ is a random square-zero map (acyclic on request); u¹ is extended layer
    by layer: with u¹ fixed below layer i, Maurer-Cartan on the new elements
    of layer i is linear in their values, so a particular solution plus a
    random element of the solution space is taken.  Random choices can hit
    an obstruction at a later layer; the extension is then redrawn, and the
    last attempt takes particular solutions only (always solvable).
    """
    if isinstance(rng, GenSpec) or isinstance(rng, int):
        rng = _rng(rng)
    if u0 is None:
        u0 = _square_zero(rng, M, acyclic, M.field)
    for k in range(tries):
        try:
            return _extend_mc(B, M, rng, u0, density if k < tries - 1 else 0)
        except GenerationFailed:
            if k == tries - 1:
                raise


def _extend_mc(B, M, rng, u0, density):
    from .gmodb import GModMorphism
    from .twisted import TwistedModule, mc_defect
    u1 = extend_layers(B, M, M, 1, u0, u0, lambda f1: mc_defect(GModMorphism(B, M, M, 1, u0, f1)),
                       rng, density)
    return TwistedModule(B, M, GModMorphism(B, M, M, 1, u0, u1), verify=True)


def extend_layers(B, M, N, d, src0, tgt0, defect_fn, rng, density):
    """Solve defect(f) = 0 for f¹ layer by layer.

    The defect must be affine in the values of f¹ on the newest layer with
    linear part X ↦ δ̂(X) + tgt0∘X − (−1)^d X∘src0, which is the case for
    Maurer-Cartan (d = 1, src0 = tgt0 = u⁰) and for twisted morphisms of
    degree d.  Random elements of the solution space are added with the
    given density; GenerationFailed signals an obstruction.
    """
    F = M.field
    C = B.C
    f1 = {}
    for lay in range(1, B.L + 1):
        new = B.elements(lay)
        if not new:
            continue
        known = defect_fn(f1)
        newset = set(new)
        parent = {b: b for b in new}

        def find(b):
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            return b
        for b in new:
            for x in B.delta(b):
                if x in newset:
                    parent[find(x)] = find(b)
        comps = {}
        for b in new:
            comps.setdefault(find(b), []).append(b)
        raw = {}
        for comp in comps.values():
            var, eqs = {}, {}
            for b in comp:
                for m in range(M.dim):
                    if M.rights[m] != C.lefts[b]:
                        continue
                    for n in range(N.dim):
                        if N.rights[n] != C.rights[b]:
                            continue
                        if N.degrees[n] == M.degrees[m] + d + C.degrees[b]:
                            var[(b, m, n)] = len(var)
                        elif N.degrees[n] == M.degrees[m] + d + 1 + C.degrees[b]:
                            eqs[(b, m, n)] = len(eqs)
            rows = [[F.zero] * len(var) for _ in eqs]
            rhs = [F.zero] * len(eqs)
            for (b, m, n), e in eqs.items():
                kv = known.f1.get(b)
                if kv is not None:
                    rhs[e] = -kv.cols.get((m,), {}).get((n,), F.zero)
                sd = -1 if (d + M.degrees[m] + 1) % 2 else 1
                for x, coef in B.delta(b).items():
                    j = var.get((x, m, n))
                    if j is not None:
                        rows[e][j] += sd * coef
                for (k,), a in _rows_into(tgt0, n):
                    j = var.get((b, m, k))
                    if j is not None:
                        rows[e][j] += a
                su = 1 if d % 2 else -1
                for (k,), a in src0.cols.get((m,), {}).items():
                    j = var.get((b, k, n))
                    if j is not None:
                        rows[e][j] += su * a
            if not var:
                if any(rhs):
                    raise GenerationFailed(f"obstruction at layer {lay}")
                continue
            if eqs:
                x0 = linalg.solve(rows, len(var), rhs, F.zero)
                if x0 is None:
                    raise GenerationFailed(f"obstruction at layer {lay}")
                for v in linalg.nullspace(rows, len(var), F.zero):
                    if rng.random() < density:
                        a = F.random(rng, nonzero=True, small=True)
                        x0 = [p + a * q for p, q in zip(x0, v)]
            else:
                x0 = [F.random(rng, nonzero=True, small=True) if rng.random() < density else F.zero
                      for _ in var]
            for (b, m, n), j in var.items():
                if x0[j]:
                    raw.setdefault(b, {}).setdefault((m,), {})[(n,)] = x0[j]
        for b, cols in raw.items():
            f1[b] = HomMap(M, N, d + C.degrees[b], cols, clean=False)
    return f1


def chain_maps(M, N, d, dM: HomMap, dN: HomMap):
    """Basis of {f of degree d : dN f − (−1)^d f dM = 0} as HomMaps (linear)."""
    F = M.field
    var, eqs = {}, {}
    for m in range(M.dim):
        for n in range(N.dim):
            if M.rights[m] != N.rights[n]:
                continue
            if N.degrees[n] == M.degrees[m] + d:
                var[(m, n)] = len(var)
            elif N.degrees[n] == M.degrees[m] + d + 1:
                eqs[(m, n)] = len(eqs)
    rows = [[F.zero] * len(var) for _ in eqs]
    su = 1 if d % 2 else -1
    for (m, n), e in eqs.items():
        for (k,), a in _rows_into(dN, n):
            j = var.get((m, k))
            if j is not None:
                rows[e][j] += a
        for (k,), a in dM.cols.get((m,), {}).items():
            j = var.get((k, n))
            if j is not None:
                rows[e][j] += su * a
    if not var:
        return []
    basis = linalg.nullspace(rows, len(var), F.zero) if eqs else \
        [[F.one if a == j else F.zero for a in range(len(var))] for j in range(len(var))]
    out = []
    for v in basis:
        cols = {}
        for (m, n), j in var.items():
            if v[j]:
                cols.setdefault((m,), {})[(n,)] = v[j]
        out.append(HomMap(M, N, d, cols, clean=False))
    return out


def gen_twisted_morphism(src, tgt, rng, degree: int = 0, density: float = 0.5, f0=None, tries: int = 4):
    """Random twisted morphism src -> tgt of the given degree."""
    from .gmodb import GModMorphism
    from .twisted import TwistedMorphism, twisted_defect
    B, M, N = src.bocs, src.M, tgt.M
    F = M.field
    if f0 is None:
        f0 = HomMap.zero(M, N, degree)
        for z in chain_maps(M, N, degree, src.u0, tgt.u0):
            if rng.random() < density:
                f0 = f0 + z.scale(F.random(rng, nonzero=True, small=True))
    for k in range(tries):
        dens = density if k < tries - 1 else 0
        try:
            f1 = extend_layers(B, M, N, degree, src.u0, tgt.u0,
                               lambda f1: twisted_defect(GModMorphism(B, M, N, degree, f0, f1), src, tgt),
                               rng, dens)
            return TwistedMorphism(GModMorphism(B, M, N, degree, f0, f1), src, tgt, verify=True)
        except GenerationFailed:
            if k == tries - 1:
                raise


def gen_iso(rng, B, M, density=0.5):
    """Random invertible degree 0 endomorphism (unitriangular first component)."""
    f = gen_gmod_morphism(rng, B, M, M, 0, density, f0=False)
    from .gmodb import GModMorphism
    return GModMorphism(B, M, M, 0, _random_automorphism(rng, M, M.field), f.f1)


def _rows_into(f: HomMap, n: int):
    """Entries (domain key, value) of f landing on codomain index n."""
    return f.rows.get((n,), [])


def twisted_sum(T1, T2, verify: bool = True):
    """(T1 ⊕ T2, DirectSum) with the block diagonal structure."""
    from .gmodb import block_gmod
    from .twisted import TwistedModule
    S = direct_sum(T1.M, T2.M)
    u = block_gmod(T1.bocs, S, S, [[T1.u, None], [None, T2.u]], 1)
    return TwistedModule(T1.bocs, S.space, u, verify=verify), S


def gen_quasi_iso(rng, B, dim: int = 3, pairs: int = 1, density: float = 0.5):
    """A quasi-isomorphism T -> N with N = (T ⊕ K) transported by a random iso.

    K is acyclic, so H(N) = H(T); the first block of f is the identity and the
    second a random twisted morphism into K.
    """
    from .gmodb import GModMorphism, block_gmod
    from .twisted import TwistedMorphism, transport
    base = B.C.base
    T = gen_mc(B, gen_module(rng, base, dim), rng, density=density)
    K = gen_mc(B, gen_acyclic_module(rng, base, pairs, prefix="k"), rng, acyclic=True, density=density)
    S_T, S = twisted_sum(T, K)
    k = gen_twisted_morphism(T, K, rng, 0, density)
    single = DirectSum(T.M, (T.M,), (0,))
    f = block_gmod(B, single, S, [[GModMorphism.identity(B, T.M)], [k.f]], 0)
    f = TwistedMorphism(f, T, S_T, verify=True)
    N, h = transport(gen_iso(rng, B, S_T.M, density), S_T)
    return TwistedMorphism(h.f * f.f, T, N, verify=True)


def gen_idempotent(rng, T1, T2, density: float = 0.5):
    """Idempotent e on a twisted module isomorphic to T1 ⊕ T2 with image T1.

    e = H*diag(𝕀,0)*H⁻¹ for a random iso H, so both e⁰ and e¹ are generic.
    """
    from .gmodb import GModMorphism, block_gmod, compose, invert
    from .twisted import TwistedMorphism, transport
    X, S = twisted_sum(T1, T2)
    Y, H = transport(gen_iso(rng, X.bocs, X.M, density), X)
    D = block_gmod(X.bocs, S, S, [[GModMorphism.identity(X.bocs, T1.M), None], [None, None]], 0)
    return TwistedMorphism(compose(compose(H.f, D), invert(H.f)), Y, Y, verify=True)


def gen_conflation(rng, T1, T2, density: float = 0.5):
    """Pair T1 -f-> E -g-> T2 with g*f = 0 and short exact first components.

    E is T1 ⊕ T2 twisted by a random degree 1 morphism T2 -> T1 (an
    extension class, when one exists) and then transported along a random
    iso, so that f and g have nonzero higher components in general.
    """
    from .gmodb import GModMorphism, block_gmod, compose, invert
    from .twisted import TwistedModule, TwistedMorphism, transport
    B = T1.bocs
    S = direct_sum(T1.M, T2.M)
    try:
        c = gen_twisted_morphism(T2, T1, rng, degree=1, density=density).f
    except GenerationFailed:
        c = None
    X = TwistedModule(B, S.space, block_gmod(B, S, S, [[T1.u, c], [None, T2.u]], 1))
    one1, one2 = GModMorphism.identity(B, T1.M), GModMorphism.identity(B, T2.M)
    fi = block_gmod(B, DirectSum(T1.M, (T1.M,), (0,)), S, [[one1], [None]], 0)
    gp = block_gmod(B, S, DirectSum(T2.M, (T2.M,), (0,)), [[None, one2]], 0)
    Y, H = transport(gen_iso(rng, B, X.M, density), X)
    f = TwistedMorphism(compose(H.f, fi), T1, Y, verify=True)
    g = TwistedMorphism(compose(gp, invert(H.f)), Y, T2, verify=True)
    return f, g


# brute-force evaluators for modules, bocses and GMod-B -------------------------------

def _acc_add(acc, vec, coef=1):
    for y, v in vec.items():
        acc[y] = acc.get(y, 0) + coef * v


def _nonzero(out):
    return {k: {y: v for y, v in col.items() if v} for k, col in out.items()
            if any(v for v in col.values())}


def _mod_insert(acc, outer, A, mdeg, adeg, key, sign_of):
    """Σ ± outer(m, a.., m_s(..), ..) over insertions of m_s into the algebra letters."""
    m, w = key[0], key[1:]
    k = len(w)
    for s in range(1, k + 1):
        ms = A.op(s)
        if ms is None:
            continue
        for r in range(1, k - s + 2):
            t = k - (r - 1) - s
            o = outer(r + 1 + t)
            if o is None:
                continue
            mid = w[r - 1:r - 1 + s]
            koszul = (2 - s) * (mdeg[m] + sum(adeg[a] for a in w[:r - 1]))
            bit = sign_of(r, s, t) + koszul
            for (b,), c in _ev(ms, mid).items():
                nk = (m,) + w[:r - 1] + (b,) + w[r - 1 + s:]
                _acc_add(acc, _ev(o, nk), -c if bit % 2 else c)


def _first_slot(acc, outer_op, inner, key, sign_of):
    """Σ_{r} ± outer_{1+s}(inner_r(m, a_1..a_{r−1}), a_r..) with s = n − r."""
    n = len(key)
    for r in range(1, n + 1):
        s = n - r
        inn, out = inner(r), outer_op(1 + s)
        if inn is None or out is None:
            continue
        for (b,), c in _ev(inn, key[:r]).items():
            bit = sign_of(r, s)
            _acc_add(acc, _ev(out, (b,) + key[r:]), -c if bit % 2 else c)


def brute_module(Mod, n: int) -> dict:
    """Σ_n^+ + Σ_n^0 entrywise on M ⊗ A^{⊗(n−1)}."""
    A, M = Mod.A, Mod.M
    out = {}
    for key in _words([M] + [A.A] * (n - 1)):
        acc = {}
        _mod_insert(acc, Mod.op, A, M.degrees, A.A.degrees, key, lambda r, s, t: r + s * t)
        _first_slot(acc, Mod.op, Mod.op, key, lambda r, s: r * s)
        out[key] = acc
    return _nonzero(out)


def brute_mod_morphism(f, MM, NN, n: int) -> dict:
    """Σ_n^{f+} + Σ_n^{f0} + Σ_n^{f−} entrywise (zero iff f is a module morphism)."""
    A, d = f.A, f.degree
    out = {}
    for key in _words([f.M] + [A.A] * (n - 1)):
        acc = {}
        _mod_insert(acc, f.comp, A, f.M.degrees, A.A.degrees, key, lambda r, s, t: d + r + s * t)
        _first_slot(acc, f.comp, MM.op, key, lambda r, s: d + r * s)
        _first_slot(acc, NN.op, f.comp, key, lambda r, s: (d + r + 1) * s + 1)
        out[key] = acc
    return _nonzero(out)


def brute_mod_homotopy(h, f, g, MM, NN, n: int) -> dict:
    """f_n − g_n − H^(1) − H^(2) − H^(3) entrywise."""
    A = h.A
    out = {}
    for key in _words([h.M] + [A.A] * (n - 1)):
        acc = {}
        _acc_add(acc, _ev(f.comp(n), key))
        _acc_add(acc, _ev(g.comp(n), key), -1)
        neg = {}
        _first_slot(neg, NN.op, h.comp, key, lambda r, s: r * s)
        _first_slot(neg, h.comp, MM.op, key, lambda r, s: r * s)
        _mod_insert(neg, h.comp, A, h.M.degrees, A.A.degrees, key, lambda r, s, t: r + s * t)
        _acc_add(acc, neg, -1)
        out[key] = acc
    return _nonzero(out)


def _hat_bit(adeg, letters) -> int:
    s = len(letters)
    return sum((s - 1 - k) * adeg[a] for k, a in enumerate(letters))


def brute_bar_delta(A, word) -> dict:
    """δ on one bar word, as {word: coef}, straight from the operations."""
    adeg = A.A.degrees
    out = {}
    n = len(word)
    for r in range(n):
        for s in range(1, n - r + 1):
            ms = A.op(s)
            if ms is None:
                continue
            mid = word[r:r + s]
            bit = sum(adeg[a] - 1 for a in word[:r]) + _hat_bit(adeg, mid)
            for (b,), c in _ev(ms, mid).items():
                nw = word[:r] + (b,) + word[r + s:]
                out[nw] = out.get(nw, 0) + (-c if bit % 2 else c)
    return {w: v for w, v in out.items() if v}


def brute_bar_dd(B) -> dict:
    """δ² on every stored word; also compares brute δ with the stored one."""
    out = {}
    for w in B.words:
        d1 = brute_bar_delta(B.alg, w)
        stored = {B.words[j]: v for j, v in B.delta(B.word_index[w]).items()}
        diff = dict(d1)
        _acc_add(diff, stored, -1)
        acc = {}
        for x, c in d1.items():
            _acc_add(acc, brute_bar_delta(B.alg, x), c)
        out[w] = {("dd",) + k: v for k, v in acc.items()}
        out[w].update({("stored",) + k: v for k, v in diff.items()})
    return _nonzero(out)


def brute_bar_coderivation(B) -> dict:
    """μ̄δ − (δ⊗1 + 1⊗δ)μ̄ on every word, with splittings computed from the words."""
    adeg = B.alg.A.degrees
    out = {}
    for w in B.words:
        acc = {}
        for x, c in brute_bar_delta(B.alg, w).items():
            for k in range(1, len(x)):
                _acc_add(acc, {(x[:k], x[k:]): c})
        for k in range(1, len(w)):
            left, right = w[:k], w[k:]
            for x, c in brute_bar_delta(B.alg, left).items():
                _acc_add(acc, {(x, right): c}, -1)
            sh = sum(adeg[a] - 1 for a in left)
            for x, c in brute_bar_delta(B.alg, right).items():
                _acc_add(acc, {(left, x): c}, -1 if sh % 2 == 0 else 1)
        out[w] = acc
    return _nonzero(out)


def gmod_to_dict(f) -> dict:
    """{(c, m): {n: v}} with c = None for the first component."""
    out = {}
    for (m,), col in f.f0.cols.items():
        out[(None, m)] = dict(col)
    for c, X in f.f1.items():
        for (m,), col in X.cols.items():
            out[(c, m)] = dict(col)
    return _nonzero(out)


def _bocs_split(B, c):
    if hasattr(B, "words"):
        w = B.words[c]
        return {(B.word_index[w[:k]], B.word_index[w[k:]]): 1 for k in range(1, len(w))}
    return {(x, y): v for (x, y), v in B.mu(c).items()}


def _bocs_delta(B, c):
    if hasattr(B, "words"):
        return {B.word_index[x]: v for x, v in brute_bar_delta(B.alg, B.words[c]).items()}
    return B.delta(c)


def brute_gmod_compose(g, f) -> dict:
    """(g*f)(m ⊗ c) = Σ g(f(m ⊗ c₍₁₎) ⊗ c₍₂₎) entrywise, c ∈ {1} ∪ basis of C̄."""
    B = f.bocs
    fe, ge = gmod_to_dict(f), gmod_to_dict(g)
    out = {}
    for c in [None] + list(range(B.C.dim)):
        if c is None:
            splits = [((None, None), 1)]
        else:
            splits = [((c, None), 1), ((None, c), 1)] + list(_bocs_split(B, c).items())
        for m in range(f.dom.dim):
            acc = {}
            for (c1, c2), coef in splits:
                for y, v in fe.get((c1, m), {}).items():
                    _acc_add(acc, ge.get((c2, y[0]), {}), coef * v)
            out[(c, m)] = acc
    return _nonzero(out)


def brute_hat_delta(f) -> dict:
    B = f.bocs
    fe = gmod_to_dict(f)
    out = {}
    for c in range(B.C.dim):
        dc = _bocs_delta(B, c)
        for m in range(f.dom.dim):
            acc = {}
            bit = f.degree + f.dom.degrees[m] + 1
            for x, v in dc.items():
                _acc_add(acc, fe.get((x, m), {}), -v if bit % 2 else v)
            out[(c, m)] = acc
    return _nonzero(out)


def _gm_lin(*terms) -> dict:
    out = {}
    for coef, ent in terms:
        for k, col in ent.items():
            acc = out.setdefault(k, {})
            _acc_add(acc, col, coef)
    return _nonzero(out)


def _gm_from_entries(ent, B, M, N, degree):
    from .gmodb import GModMorphism
    f0 = HomMap(M, N, degree, {(m,): col for (c, m), col in ent.items() if c is None})
    f1 = {}
    for (c, m), col in ent.items():
        if c is not None:
            f1.setdefault(c, {})[(m,)] = col
    return GModMorphism(B, M, N, degree, f0,
                        {c: HomMap(M, N, degree + B.degree(c), cols) for c, cols in f1.items()})


def brute_leibniz(g, f) -> dict:
    """δ̂(g*f) − δ̂(g)*f − (−1)^{|g|} g*δ̂(f) entrywise."""
    B = f.bocs
    gf = _gm_from_entries(brute_gmod_compose(g, f), B, f.dom, g.cod, f.degree + g.degree)
    dg = _gm_from_entries(brute_hat_delta(g), B, g.dom, g.cod, g.degree + 1)
    df = _gm_from_entries(brute_hat_delta(f), B, f.dom, f.cod, f.degree + 1)
    s = -1 if g.degree % 2 else 1
    return _gm_lin((1, brute_hat_delta(gf)), (-1, brute_gmod_compose(dg, f)), (-s, brute_gmod_compose(g, df)))


def brute_mc(T) -> dict:
    """δ̂(u) + u*u entrywise."""
    return _gm_lin((1, brute_hat_delta(T.u)), (1, brute_gmod_compose(T.u, T.u)))


def brute_twisted_morphism(f, src, tgt) -> dict:
    """δ̂(f) + v*f − (−1)^{|f|} f*u entrywise."""
    s = -1 if f.degree % 2 else 1
    return _gm_lin((1, brute_hat_delta(f)), (1, brute_gmod_compose(tgt.u, f)),
                   (-s, brute_gmod_compose(f, src.u)))


BRUTE = {
    "stasheff": brute_stasheff,
    "alg_morphism": brute_morphism,
    "alg_homotopy": brute_alg_homotopy,
    "module": brute_module,
    "mod_morphism": brute_mod_morphism,
    "mod_homotopy": brute_mod_homotopy,
    "bar_dd": brute_bar_dd,
    "bar_coderivation": brute_bar_coderivation,
    "gmod_compose": brute_gmod_compose,
    "hat_delta": brute_hat_delta,
    "leibniz": brute_leibniz,
    "mc": brute_mc,
    "twisted_morphism": brute_twisted_morphism,
}


def brute_expand(identity: str, *structures, **kw) -> dict:
    """Evaluate one identity family by enumerating basis tensors.

    Returns the exact defect as a sparse dict {input basis tensor: {output: coef}}.
    For 'gmod_compose' and 'hat_delta' the value itself is returned.
    """
    return BRUTE[identity](*structures, **kw)
