"""Command line front end.

    bocslab check --input ws.json --target A --what stasheff
    bocslab construct nullhomotopy --input ws.json --target T --output out.json

Exit codes: 0 all identities hold, 1 an identity fails, 2 a precondition or
parse error.
"""
from __future__ import annotations

import copy
import json
import sys

import click

from . import ainfmod, fileformat as ff, gmodb, twisted
from .ainfty import CheckResult, check_alg_homotopy, check_alg_morphism, check_stasheff
from .bocs import check_bocs_axioms
from .errors import BocsLabError, ParseError

WHAT = ("stasheff", "bocs", "mc", "morphism", "homotopy", "module")
OPS = ("bar", "invert", "split-idem", "nullhomotopy", "cone", "homotopy-inverse",
       "shift", "jfun", "restrict", "transport")


class IdentityFailure(Exception):
    """A constructed structure failed its closed-loop re-check."""

    def __init__(self, results):
        super().__init__("re-verification failed")
        self.results = results


def _emit(results, fmt: str, extra: dict | None = None):
    ok = all(r.ok for r in results)
    if fmt == "json":
        doc = {"ok": ok, "checks": [{"name": r.name, "ok": r.ok, "items": r.report()} for r in results]}
        if extra:
            doc.update(extra)
        click.echo(json.dumps(doc, sort_keys=True, ensure_ascii=False))
    else:
        for r in results:
            for item in r.report():
                line = f"{r.name} {item['index']}: {'pass' if item['ok'] else 'FAIL'}"
                if not item["ok"] and item["witness"] is not None:
                    line += f"  witness={json.dumps(item['witness'], ensure_ascii=False)}"
                click.echo(line)
        for k, v in sorted((extra or {}).items()):
            click.echo(f"{k}: {v}")
        click.echo("ok" if ok else "FAILED")
    return ok


def _fail(msg: str, fmt: str):
    if fmt == "json":
        click.echo(json.dumps({"ok": False, "error": msg}, sort_keys=True, ensure_ascii=False))
    else:
        click.echo(f"error: {msg}", err=True)
    sys.exit(2)


def _common(f):
    f = click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False),
                     help="workspace document (JSON, format 1)")(f)
    f = click.option("--target", required=True, help="name of the structure to act on")(f)
    f = click.option("--level", type=int, default=None, help="truncation level L of bar bocses")(f)
    f = click.option("--field", default=None, help="q or fp:P; must agree with the document")(f)
    f = click.option("--report", "fmt", type=click.Choice(["text", "json"]), default="text")(f)
    return f


@click.group()
def main():
    """Exact computations with A∞-algebras, bocses and twisted modules."""


# check -----------------------------------------------------------------------------

def run_check(ws: ff.Workspace, target: str, what: str) -> list:
    kind = ws.kind(target)
    spec = ws.raw[target]
    obj = ws.get(target)
    if what == "stasheff":
        _need(kind, "algebra", what)
        return [check_stasheff(obj)]
    if what == "bocs":
        _need(kind, "algebra", what)
        return [check_bocs_axioms(ws.bar(target))]
    if what == "mc":
        _need(kind, "twisted", what)
        return [twisted.check_mc(obj.bocs, obj.M, obj.u)]
    if what == "module":
        _need(kind, "module", what)
        return [ainfmod.check_module(obj)]
    if what == "morphism":
        if kind == "alg_morphism":
            return [check_alg_morphism(obj)]
        if kind == "module_morphism":
            return [ainfmod.check_mod_morphism(obj, ws.get(spec["source"]), ws.get(spec["target"]))]
        if kind == "twisted_morphism":
            return [twisted.check_twisted_morphism(obj.f, obj.src, obj.tgt)]
        raise ParseError(f"{target!r} ({kind}) is not a morphism")
    if what == "homotopy":
        try:
            f, g = ws.get(spec["from"]), ws.get(spec["to"])
        except KeyError:
            raise ParseError("a homotopy needs \"from\" and \"to\" morphisms") from None
        if kind == "alg_homotopy":
            return [check_alg_homotopy(obj, f, g)]
        if kind == "module_homotopy":
            return [ainfmod.check_mod_homotopy(obj, f, g, ws.get(spec["source"]), ws.get(spec["target"]))]
        if kind == "twisted_homotopy":
            return [twisted.check_homotopy(obj, f, g)]
        raise ParseError(f"{target!r} ({kind}) is not a homotopy")
    raise ParseError(f"unknown check {what!r}")


def _need(kind, want, what):
    if kind != want:
        raise ParseError(f"check {what} needs a structure of kind {want}, got {kind}")


@main.command()
@_common
@click.option("--what", type=click.Choice(WHAT), required=True)
def check(input_path, target, level, field, fmt, what):
    """Verify the defining identities of a structure."""
    try:
        ws = ff.Workspace.load(input_path, field, level)
        results = run_check(ws, target, what)
    except BocsLabError as e:
        _fail(f"{type(e).__name__}: {e}", fmt)
    sys.exit(0 if _emit(results, fmt) else 1)


# construct -------------------------------------------------------------------------

def _verify(*results):
    bad = [r for r in results if not r.ok]
    if bad:
        raise IdentityFailure(list(results))
    return list(results)


def run_construct(ws: ff.Workspace, op: str, target: str, along: str | None = None):
    """Returns ({name: structure spec}, [CheckResult]) for the new structures."""
    F = ws.field
    kind = ws.kind(target)
    obj = ws.get(target)
    new = {}
    if op == "bar":
        if kind != "algebra":
            raise ParseError("bar needs an algebra")
        B = ws.bar(target)
        checks = _verify(check_bocs_axioms(B))
        new[f"{target}.bar"] = ff.write_bocs(F, B, target)
        return new, checks
    if op == "transport":
        if kind == "module":
            if ws.level is None:
                raise ParseError("transport to twisted modules needs --level")
            B = ws.bar(ws.raw[target]["algebra"])
            T = ainfmod.to_twisted(obj, B, verify=False)
            checks = _verify(twisted.check_mc(B, T.M, T.u))
            new[f"{target}.twisted"] = ff.write_twisted(F, T, ws.raw[target]["algebra"])
            return new, checks
        if kind == "twisted":
            alg = ws.raw[target]["algebra"]
            Mod = ainfmod.from_twisted(obj, ws.get(alg))
            checks = _verify(ainfmod.check_module(Mod))
            new[f"{target}.module"] = ff.write_module(F, Mod, alg)
            return new, checks
        raise ParseError("transport needs a module or a twisted module")
    if op in ("shift", "jfun"):
        if kind == "module":
            alg = ws.raw[target]["algebra"]
            Mod = ainfmod.shift_mod(obj) if op == "shift" else ainfmod.jfun_mod(obj)[0]
            checks = _verify(ainfmod.check_module(Mod))
            new[f"{target}.{op}"] = ff.write_module(F, Mod, alg)
            return new, checks
        if kind == "twisted":
            _verify(twisted.check_mc(obj.bocs, obj.M, obj.u))
            T = twisted.shift(obj, verify=False) if op == "shift" else twisted.jfun(obj, verify=False).module
            checks = _verify(twisted.check_mc(T.bocs, T.M, T.u))
            new[f"{target}.{op}"] = ff.write_twisted(F, T, ws.raw[target]["algebra"])
            return new, checks
        raise ParseError(f"{op} needs a module or a twisted module")
    if op == "nullhomotopy":
        if kind != "twisted":
            raise ParseError("nullhomotopy needs a twisted module")
        _verify(twisted.check_mc(obj.bocs, obj.M, obj.u))
        h = twisted.nullhomotopy(obj, verify=False)
        idT = gmodb.GModMorphism.identity(obj.bocs, obj.M)
        zero = gmodb.GModMorphism.zero(obj.bocs, obj.M, obj.M, 0)
        checks = _verify(twisted.check_homotopy(h, idT, zero, obj, obj))
        name = f"{target}.nullhomotopy"
        new[f"{target}.id"] = ff.write_twisted_morphism(F, idT, target, target)
        new[f"{target}.zero"] = ff.write_twisted_morphism(F, zero, target, target)
        spec = ff.write_twisted_morphism(F, h, target, target, kind="twisted_homotopy")
        spec.update({"from": f"{target}.id", "to": f"{target}.zero"})
        new[name] = spec
        return new, checks
    if kind in ("twisted_morphism",):
        src, tgt = ws.raw[target]["source"], ws.raw[target]["target"]
        _verify(twisted.check_twisted_morphism(obj.f, obj.src, obj.tgt))
        if op == "invert":
            g = gmodb.invert(obj.f)
            checks = _verify(twisted.check_twisted_morphism(g, obj.tgt, obj.src),
                             _equal("left inverse", gmodb.compose(g, obj.f), obj.src),
                             _equal("right inverse", gmodb.compose(obj.f, g), obj.tgt))
            new[f"{target}.inverse"] = ff.write_twisted_morphism(F, g, tgt, src)
            return new, checks
        if op == "split-idem":
            sp = twisted.split_idempotent(obj)
            alg = ws.raw[src]["algebra"]
            checks = _verify(twisted.check_mc(sp.first.bocs, sp.first.M, sp.first.u),
                             twisted.check_mc(sp.second.bocs, sp.second.M, sp.second.u),
                             twisted.check_twisted_morphism(sp.iso.f, sp.iso.src, sp.iso.tgt))
            new[f"{target}.image"] = ff.write_twisted(F, sp.first, alg)
            new[f"{target}.kernel"] = ff.write_twisted(F, sp.second, alg)
            new[f"{target}.sum"] = ff.write_twisted(F, sp.iso.tgt, alg)
            new[f"{target}.iso"] = ff.write_twisted_morphism(F, sp.iso.f, src, f"{target}.sum")
            return new, checks
        if op == "cone":
            C = twisted.cone(obj)
            alg = ws.raw[src]["algebra"]
            cname = f"{target}.cone"
            checks = _verify(twisted.check_mc(C.module.bocs, C.module.M, C.module.u),
                             twisted.check_twisted_morphism(C.inc.f, C.inc.src, C.inc.tgt),
                             twisted.check_twisted_morphism(C.out.f, C.out.src, C.out.tgt))
            new[cname] = ff.write_twisted(F, C.module, alg)
            new[f"{target}.cone.shifted_source"] = ff.write_twisted(F, C.shifted, alg)
            new[f"{target}.cone.inc"] = ff.write_twisted_morphism(F, C.inc.f, tgt, cname)
            new[f"{target}.cone.out"] = ff.write_twisted_morphism(F, C.out.f, cname,
                                                                  f"{target}.cone.shifted_source")
            return new, checks
        if op == "homotopy-inverse":
            hi = twisted.homotopy_inverse(obj)
            fg = gmodb.compose(obj.f, hi.g.f)
            gf = gmodb.compose(hi.g.f, obj.f)
            checks = _verify(twisted.check_twisted_morphism(hi.g.f, obj.tgt, obj.src),
                             twisted.check_homotopy(hi.h_fg, fg, gmodb.GModMorphism.identity(obj.f.bocs, obj.tgt.M),
                                                    obj.tgt, obj.tgt),
                             twisted.check_homotopy(hi.h_gf, gf, gmodb.GModMorphism.identity(obj.f.bocs, obj.src.M),
                                                    obj.src, obj.src))
            new[f"{target}.inverse"] = ff.write_twisted_morphism(F, hi.g.f, tgt, src)
            new[f"{target}.h_fg"] = ff.write_twisted_morphism(F, hi.h_fg, tgt, tgt, kind="twisted_homotopy")
            new[f"{target}.h_gf"] = ff.write_twisted_morphism(F, hi.h_gf, src, src, kind="twisted_homotopy")
            return new, checks
    if op == "homotopy-inverse" and kind == "module_morphism":
        src, tgt = ws.raw[target]["source"], ws.raw[target]["target"]
        MM, NN = ws.get(src), ws.get(tgt)
        if ws.level is None:
            raise ParseError("homotopy-inverse of module morphisms needs --level")
        B = ws.bar(ws.raw[src]["algebra"])
        g, h_fg, h_gf = ainfmod.mod_homotopy_inverse(obj, MM, NN, B)
        idM = ainfmod.AInfModMorphism.identity(MM.A, MM.M)
        idN = ainfmod.AInfModMorphism.identity(MM.A, NN.M)
        checks = _verify(ainfmod.check_mod_morphism(g, NN, MM),
                         ainfmod.check_mod_homotopy(h_fg, ainfmod.compose_mod(obj, g), idN, NN, NN),
                         ainfmod.check_mod_homotopy(h_gf, ainfmod.compose_mod(g, obj), idM, MM, MM))
        new[f"{target}.inverse"] = ff.write_module_morphism(F, g, tgt, src)
        new[f"{target}.h_fg"] = ff.write_module_morphism(F, h_fg, tgt, tgt, kind="module_homotopy")
        new[f"{target}.h_gf"] = ff.write_module_morphism(F, h_gf, src, src, kind="module_homotopy")
        return new, checks
    if op == "restrict":
        if along is None:
            raise ParseError("restrict needs --along PHI")
        if ws.kind(along) != "alg_morphism":
            raise ParseError("--along must name an alg_morphism")
        phi = ws.get(along)
        chk = check_alg_morphism(phi)
        if not chk.ok:
            from .errors import NotAnAlgMorphism
            raise NotAnAlgMorphism(f"{along} is not an A∞-morphism: {chk.first_failure}")
        alg = ws.raw[along]["source"]
        if kind == "module":
            Mod = ainfmod.restrict_module(phi, obj)
            checks = _verify(ainfmod.check_module(Mod))
            new[f"{target}.restricted"] = ff.write_module(F, Mod, alg)
            return new, checks
        if kind == "twisted":
            BA = ws.bar(alg, obj.bocs.L)
            psi = ainfmod.psi_of_morphism(phi, BA, obj.bocs)
            T = twisted.restrict_twisted(psi, obj, verify=False)
            checks = _verify(twisted.check_mc(BA, T.M, T.u))
            new[f"{target}.restricted"] = ff.write_twisted(F, T, alg)
            return new, checks
        raise ParseError("restrict needs a module or a twisted module")
    raise ParseError(f"{op} does not apply to {target!r} ({kind})")


def _equal(name, f, T):
    res = CheckResult(name)
    res.add_flag("identity", f == gmodb.GModMorphism.identity(T.bocs, T.M))
    return res


@main.command()
@click.argument("op", type=click.Choice(OPS))
@_common
@click.option("--output", "output_path", required=True, type=click.Path(dir_okay=False))
@click.option("--along", default=None, help="A∞-morphism to restrict along")
def construct(op, input_path, target, level, field, fmt, output_path, along):
    """Build a new structure, re-verify it and write it to the output file."""
    try:
        ws = ff.Workspace.load(input_path, field, level)
        new, checks = run_construct(ws, op, target, along)
    except IdentityFailure as e:
        _emit(e.results, fmt)
        sys.exit(1)
    except BocsLabError as e:
        _fail(f"{type(e).__name__} while constructing {op} on {target!r}: {e}", fmt)
    with open(input_path) as fh:
        doc = json.load(fh)
    doc = copy.deepcopy(doc)
    doc["field"] = ws.field.name
    if ws.level is not None:
        doc["level"] = ws.level
    doc.setdefault("structures", {}).update(new)
    with open(output_path, "w") as fh:
        fh.write(ff.dump(doc))
    _emit(checks, fmt, {"written": sorted(new)})
    sys.exit(0)


if __name__ == "__main__":
    main()
