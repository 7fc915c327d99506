"""Reading and writing workspaces (JSON documents with "format": 1).

A document looks like

    {"format": 1, "field": "q", "idempotents": 1, "level": 3,
     "structures": {"A": {"kind": "algebra", ...}, ...}}

Sparse maps are lists of triples [input, output, coefficient]; the input of
an operation of arity n is a list of n basis labels, the output a single
label, and coefficients are strings such as "3", "-1/2" or integers.
Kinds: algebra, alg_morphism, alg_homotopy, module, module_morphism,
module_homotopy, twisted, twisted_morphism, twisted_homotopy; bar bocses are
rebuilt from their algebra and the level, and "bocs" entries are written for
inspection only.
"""
from __future__ import annotations

import json

from .ainfmod import AInfModMorphism, AInfModule
from .ainfty import AInfAlgebra, AInfAlgHomotopy, AInfAlgMorphism
from .bocs import BarBocs
from .errors import BocsLabError, ParseError, UnknownTarget
from .gmodb import GModMorphism
from .graded import GradedSpace, HomMap, tensor
from .scalars import BaseRing, Field
from .twisted import TwistedModule, TwistedMorphism

FORMAT = 1


class Workspace:
    """Parsed structures of one document, resolved lazily by name."""

    def __init__(self, doc: dict, field: str | None = None, level: int | None = None):
        if not isinstance(doc, dict) or doc.get("format") != FORMAT:
            raise ParseError(f"expected a document with \"format\": {FORMAT}")
        fname = doc.get("field")
        if field is not None and fname is not None and Field(field) != Field(fname):
            raise ParseError(f"--field {field} contradicts the document field {fname}")
        self.field = Field(field or fname or "q")
        try:
            self.base = BaseRing(int(doc.get("idempotents", 1)), self.field)
        except (TypeError, ValueError) as e:
            raise ParseError(f"bad idempotent count: {e}") from None
        self.level = level if level is not None else doc.get("level")
        self.raw = doc.get("structures", {})
        if not isinstance(self.raw, dict):
            raise ParseError("\"structures\" must be an object")
        self.cache = {}
        self.bars = {}

    @classmethod
    def load(cls, path: str, field=None, level=None) -> "Workspace":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ParseError(f"cannot read {path}: {e}") from None
        return cls(doc, field, level)

    def kind(self, name: str) -> str:
        return self._spec(name).get("kind", "")

    def _spec(self, name):
        if name not in self.raw:
            raise UnknownTarget(f"no structure named {name!r}")
        s = self.raw[name]
        if not isinstance(s, dict) or "kind" not in s:
            raise ParseError(f"structure {name!r} has no kind")
        return s

    def get(self, name: str):
        if name not in self.cache:
            s = self._spec(name)
            reader = READERS.get(s["kind"])
            if reader is None:
                raise ParseError(f"unknown kind {s['kind']!r} for {name!r}")
            try:
                self.cache[name] = reader(self, s)
            except (KeyError, TypeError, ValueError, IndexError) as e:
                if isinstance(e, BocsLabError):
                    raise
                raise ParseError(f"malformed structure {name!r}: {e!r}") from None
        return self.cache[name]

    def bar(self, alg_name: str, level: int | None = None) -> BarBocs:
        L = level if level is not None else self.level
        if L is None:
            raise ParseError("a truncation level is required (document \"level\" or --level)")
        key = (alg_name, int(L))
        if key not in self.bars:
            self.bars[key] = BarBocs(self.get(alg_name), int(L))
        return self.bars[key]


# readers ------------------------------------------------------------------------

def _space(ws, basis, module=False, name=""):
    rows = []
    for b in basis:
        if module:
            lab, deg, right = b
            rows.append((str(lab), int(deg), None, int(right)))
        else:
            lab, deg, left, right = b
            rows.append((str(lab), int(deg), int(left), int(right)))
    return GradedSpace(ws.base, rows, name=name)


def _index(space, lab):
    try:
        return space.index[str(lab)]
    except KeyError:
        raise ParseError(f"unknown basis label {lab!r}") from None


def _triples(ws, entries, dom, cod, degree, factors):
    """HomMap from triples; ``factors`` lists the spaces of the input tuple."""
    cols = {}
    for ent in entries:
        inp, out, coef = ent
        inp = inp if isinstance(inp, list) else [inp]
        if len(inp) != len(factors):
            raise ParseError(f"input {inp} should have {len(factors)} labels")
        key = tuple(_index(S, l) for S, l in zip(factors, inp))
        val = ws.field(coef)
        col = cols.setdefault(key, {})
        o = (_index(cod, out),)
        col[o] = col.get(o, 0) + val
    f = HomMap(dom, cod, degree, cols)
    if not f.check_homogeneous():
        raise ParseError("map entries do not respect degrees or idempotents")
    return f


def _family(ws, spec, first, A, cod, deg_of):
    comps = {}
    for n, entries in spec.get("comps", spec.get("ops", {})).items():
        n = int(n)
        factors = [first] + [A.A] * (n - 1)
        comps[n] = _triples(ws, entries, tensor(*factors), cod, deg_of(n), factors)
    return comps


def read_algebra(ws, s):
    sp = _space(ws, s["basis"], name="A")
    ops = {}
    for n, entries in s.get("ops", {}).items():
        n = int(n)
        ops[n] = _triples(ws, entries, tensor(*([sp] * n)), sp, 2 - n, [sp] * n)
    if "arity_bound" not in s:
        raise ParseError("an algebra needs an explicit \"arity_bound\"")
    return AInfAlgebra(sp, ops, int(s["arity_bound"]))


def read_alg_morphism(ws, s):
    A, B = ws.get(s["source"]), ws.get(s["target"])
    comps = _family(ws, s, A.A, A, B.A, lambda n: 1 - n)
    return AInfAlgMorphism(A, B, comps, s.get("arity_bound"))


def read_alg_homotopy(ws, s):
    A, B = ws.get(s["source"]), ws.get(s["target"])
    comps = _family(ws, s, A.A, A, B.A, lambda n: -n)
    return AInfAlgHomotopy(A, B, comps, s.get("arity_bound"))


def read_module(ws, s):
    A = ws.get(s["algebra"])
    M = _space(ws, s["basis"], module=True, name="M")
    ops = _family(ws, s, M, A, M, lambda n: 2 - n)
    return AInfModule(A, M, ops, s.get("arity_bound"), exact_upto=s.get("exact_upto"))


def read_module_morphism(ws, s):
    MM, NN = ws.get(s["source"]), ws.get(s["target"])
    d = int(s.get("degree", 0))
    comps = _family(ws, s, MM.M, MM.A, NN.M, lambda n: d + 1 - n)
    return AInfModMorphism(MM.A, MM.M, NN.M, d, comps, s.get("arity_bound"), s.get("exact_upto"))


def read_twisted(ws, s):
    B = ws.bar(s["algebra"], s.get("level"))
    M = _space(ws, s["basis"], module=True, name="M")
    u = _gmod(ws, s, B, M, M, 1, "u0", "u1")
    return TwistedModule(B, M, u, verify=False)


def _gmod(ws, s, B, M, N, d, k0, k1):
    f0 = _triples(ws, s.get(k0, []), M, N, d, [M])
    f1 = {}
    for word, entries in s.get(k1, {}).items():
        c = _index(B.C, word)
        f1[c] = _triples(ws, entries, M, N, d + B.degree(c), [M])
    return GModMorphism(B, M, N, d, f0, f1)


def read_twisted_morphism(ws, s):
    T1, T2 = ws.get(s["source"]), ws.get(s["target"])
    d = int(s.get("degree", 0))
    f = _gmod(ws, s, T1.bocs, T1.M, T2.M, d, "f0", "f1")
    return TwistedMorphism(f, T1, T2, verify=False)


def read_twisted_homotopy(ws, s):
    T1, T2 = ws.get(s["source"]), ws.get(s["target"])
    return _gmod(ws, s, T1.bocs, T1.M, T2.M, int(s.get("degree", -1)), "f0", "f1")


READERS = {
    "algebra": read_algebra,
    "alg_morphism": read_alg_morphism,
    "alg_homotopy": read_alg_homotopy,
    "module": read_module,
    "module_morphism": read_module_morphism,
    "module_homotopy": read_module_morphism,
    "twisted": read_twisted,
    "twisted_morphism": read_twisted_morphism,
    "twisted_homotopy": read_twisted_homotopy,
}


# writers ------------------------------------------------------------------------

def _labels(key, spaces):
    return [S.labels[i] for S, i in zip(spaces, key)]


def write_map(field: Field, f: HomMap, factors) -> list:
    out = []
    for key in sorted(f.cols):
        for o, v in sorted(f.cols[key].items()):
            if v:
                inp = _labels(key, factors)
                outl = _labels(o, f.cod.factors)
                out.append([inp if len(inp) > 1 else inp[0], outl if len(outl) > 1 else outl[0],
                            field.format(v)])
    return out


def _basis(S: GradedSpace, module: bool):
    if module:
        return [[l, d, r] for l, d, r in zip(S.labels, S.degrees, S.rights)]
    return [[l, d, a, b] for l, d, a, b in zip(S.labels, S.degrees, S.lefts, S.rights)]


def write_algebra(field, A: AInfAlgebra) -> dict:
    return {"kind": "algebra", "basis": _basis(A.A, False), "arity_bound": A.arity_bound,
            "ops": {str(n): write_map(field, m, [A.A] * n) for n, m in sorted(A.ops.items())}}


def write_module(field, Mod: AInfModule, alg_name: str) -> dict:
    A = Mod.A
    out = {"kind": "module", "algebra": alg_name, "basis": _basis(Mod.M, True),
           "arity_bound": Mod.arity_bound,
           "ops": {str(n): write_map(field, m, [Mod.M] + [A.A] * (n - 1)) for n, m in sorted(Mod.ops.items())}}
    if Mod.exact_upto is not None:
        out["exact_upto"] = Mod.exact_upto
    return out


def write_module_morphism(field, f: AInfModMorphism, src: str, tgt: str, kind="module_morphism") -> dict:
    out = {"kind": kind, "source": src, "target": tgt, "degree": f.degree, "arity_bound": f.arity_bound,
           "comps": {str(n): write_map(field, c, [f.M] + [f.A.A] * (n - 1)) for n, c in sorted(f.comps.items())}}
    if f.exact_upto is not None:
        out["exact_upto"] = f.exact_upto
    return out


def _write_gmod(field, f: GModMorphism, k0, k1) -> dict:
    B = f.bocs
    return {k0: write_map(field, f.f0, [f.dom]),
            k1: {B.C.labels[c]: write_map(field, X, [f.dom]) for c, X in sorted(f.f1.items()) if not X.is_zero()}}


def write_twisted(field, T: TwistedModule, alg_name: str) -> dict:
    out = {"kind": "twisted", "algebra": alg_name, "level": T.bocs.L, "basis": _basis(T.M, True)}
    out.update(_write_gmod(field, T.u, "u0", "u1"))
    return out


def write_twisted_morphism(field, f: GModMorphism, src: str, tgt: str, kind="twisted_morphism") -> dict:
    out = {"kind": kind, "source": src, "target": tgt, "degree": f.degree}
    out.update(_write_gmod(field, f, "f0", "f1"))
    return out


def write_bocs(field, B: BarBocs, alg_name: str) -> dict:
    C = B.C
    return {"kind": "bocs", "algebra": alg_name, "level": B.L, "basis": _basis(C, False),
            "layers": list(B.layer),
            "comult": write_map(field, B.comult, [C, C]),
            "diff": write_map(field, B.diff, [C])}


def dump(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=False) + "\n"
