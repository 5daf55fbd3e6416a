"""Command-line entry point.

Exit codes: 0 clean, 1 law violation or counterexample found, 2 malformed
input or unmet precondition, 3 size cap exceeded.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys

from .builtins import VCategory, doctrine_from_spec, walters_completion
from .completion import (cauchy_reflector, check_ruc_idempotent, check_sruc_section, check_three_way,
                         find_singletons, map_category, ruc_doctrine)
from .doctrine import (Doctrine, Relation, TableDoctrine, check_doctrine_laws, check_graph_functoriality,
                       check_reindex_adjunction, is_extensional)
from .monads import (IdentityMonad, TSpace, check_compactification_equivalence, check_monad,
                     check_spfun_properties, compactify, em_closed_doctrine, monad_from_json, tspaces)
from .quantale import Quantale, check_quantale_laws, parse_builtin
from .quotients import check_quotient_flavors, equivalences, quotient_arrow
from .relprops import find_ruc_counterexample, functional_total, is_cauchy_complete, profile
from .report import CapExceeded, PreconditionError, StructuralError

OK, FOUND, BAD_INPUT, CAP = 0, 1, 2, 3
COMMANDS = ("laws", "analyze", "complete", "singletons", "quotient", "compactify", "counterexample", "builtin")


class Failure(Exception):
    def __init__(self, code, kind, message, problems=()):
        super().__init__(message)
        self.code, self.kind, self.problems = code, kind, list(problems)


# loading

def load(data, cap=1 << 20, hom_cap=1 << 20):
    """Classify a parsed JSON document and build the object it describes.

    Returns ("quantale" | "doctrine" | "monad", value).
    """
    if isinstance(data, str):
        return "quantale", parse_builtin(data)
    if not isinstance(data, dict):
        raise StructuralError("input must be a JSON object")
    if "monad" in data:
        R = load_doctrine(data["doctrine"], cap, hom_cap) if "doctrine" in data else None
        return "monad", monad_from_json(data["monad"], R)
    if "builtin" in data or "base" in data:
        return "doctrine", load_doctrine(data, cap, hom_cap)
    return "quantale", Quantale.from_json(data)


def load_doctrine(data, cap=1 << 20, hom_cap=1 << 20) -> Doctrine:
    if not isinstance(data, dict):
        raise StructuralError("doctrine must be a JSON object")
    if "builtin" in data:
        return doctrine_from_spec(data, cap=cap, hom_cap=hom_cap)
    return TableDoctrine.from_json(data)


def _read(path):
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as e:
        raise Failure(BAD_INPUT, "io", str(e)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise Failure(BAD_INPUT, "json", f"invalid JSON: {e}") from None


def _load_path(args):
    return load(_read(args.input), cap=args.cap_fibre)


def _need(kind, value, *wanted):
    if kind not in wanted:
        raise Failure(BAD_INPUT, "input", f"this command needs a {' or '.join(wanted)}, got a {kind}")
    return value


def _object(R, name):
    for X in R.base.objects:
        if R.obj_label(X) == name or X == name:
            return X
    raise Failure(BAD_INPUT, "input", f"unknown object {name!r}")


def _relation_arg(R, X, Y, text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        obj = text
    return R.parse(X, Y, obj)


# builtin specs

def _discrete(q, n, extent=None):
    points = tuple(str(i) for i in range(n))
    dist = tuple(tuple(q.unit if i == j else q.bottom for j in range(n)) for i in range(n))
    return VCategory(points, dist, None if extent is None else (extent,) * n)


def build_builtin(kind, params, cap=1 << 20, hom_cap=1 << 20):
    """A builtin doctrine or quantale from constructor parameters."""
    params = dict(params)
    if kind == "quantale":
        return Quantale.from_json(params.get("quantale", "boolean"))
    q = Quantale.from_json(params.get("quantale", "boolean"))
    if kind == "vrel":
        spec = {"builtin": "vrel", "quantale": q.to_json(), "carriers": params.get("carriers", [1])}
        if "include_all_functions" in params:
            spec["include_all_functions"] = params["include_all_functions"]
        if "arrows" in params:
            spec["arrows"] = params["arrows"]
        return doctrine_from_spec(spec, cap=cap, hom_cap=hom_cap)
    if kind in ("vcat", "walters"):
        cats = params.get("categories")
        if cats is None:
            sizes = params.get("points", [1])
            extent = q.top if kind == "walters" else None
            cats = {f"X{i}": _discrete(q, n, extent).to_json(q) for i, n in enumerate(sizes)}
        elif isinstance(cats, list):
            cats = {f"X{i}": c for i, c in enumerate(cats)}
        if kind == "walters" and params.get("completions"):
            for X in list(cats):
                bar, _ = walters_completion(q, VCategory.from_json(q, cats[X]))
                cats[f"{X}bar"] = bar.to_json(q)
        spec = {"builtin": kind, "quantale": q.to_json(), "categories": cats}
        return doctrine_from_spec(spec, cap=cap, hom_cap=hom_cap)
    raise Failure(BAD_INPUT, "input", f"unknown builtin kind {kind!r}; expected quantale, vrel, vcat or walters")


def builtin_document(kind, params, cap=1 << 20, hom_cap=1 << 20):
    x = build_builtin(kind, params, cap, hom_cap)
    return x.to_json() if isinstance(x, Quantale) else x.spec()


def dumps(doc):
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def emit_builtin(kind, params, path, cap=1 << 20, hom_cap=1 << 20):
    """Write the JSON presentation of a builtin to `path` ("-" for stdout)."""
    text = dumps(builtin_document(kind, params, cap, hom_cap))
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# commands

def _doctrine_laws(R, args):
    rep = check_doctrine_laws(R, budget=args.budget, seed=args.seed, exhaustive=args.exhaustive)
    rep.merge(check_graph_functoriality(R), "graphs: ")
    rep.merge(check_reindex_adjunction(R), "reindexing: ")
    return rep


def cmd_laws(args):
    kind, x = _load_path(args)
    if kind == "quantale":
        rep = check_quantale_laws(x)
    elif kind == "doctrine":
        rep = _doctrine_laws(x, args)
    else:
        rep = check_monad(x, budget=args.budget, seed=args.seed, exhaustive=args.exhaustive)
        if rep.ok:
            rep.merge(check_doctrine_laws(em_closed_doctrine(x), budget=args.budget, seed=args.seed,
                                          exhaustive=args.exhaustive), "closed relations on algebras: ")
    doc = {"input": kind, "report": rep.to_json()}
    return (OK if rep.ok else FOUND), doc


def cmd_analyze(args):
    R = _need(*_load_path(args), "doctrine")
    objs = R.base.objects
    objects = {}
    for Y in objs:
        cc = is_cauchy_complete(R, Y)
        scc = is_cauchy_complete(R, Y, strong=True)
        objects[R.obj_label(Y)] = {"cauchy_complete": cc.holds, "strongly_cauchy_complete": scc.holds,
                                   "extensional": is_extensional(R, Y)}
    fibres = {}
    for X, Y in itertools.product(objs, repeat=2):
        counts = dict.fromkeys(("functional", "total", "injective", "surjective", "bijective"), 0)
        F = R.fibre(X, Y)
        for a in F:
            p = profile(R, Relation(X, Y, a))
            for k in counts:
                counts[k] += getattr(p, k)
        maps = [profile(R, Relation(X, Y, a)).to_json(R) for a in functional_total(R, X, Y)]
        fibres[f"{R.obj_label(X)},{R.obj_label(Y)}"] = {"size": len(F), "counts": counts,
                                                        "functional_total": maps}
    return OK, {"objects": objects, "fibres": fibres}


def cmd_complete(args):
    R = _need(*_load_path(args), "doctrine")
    M = map_category(R)
    U = ruc_doctrine(R)
    objs = R.base.objects
    homs = {f"{R.obj_label(X)},{R.obj_label(Y)}": {"base": len(R.base.hom(X, Y)), "map": len(M.hom(X, Y))}
            for X, Y in itertools.product(objs, repeat=2)}
    sec = check_sruc_section(R)
    sec_u = check_sruc_section(U)
    idem = check_ruc_idempotent(R)
    laws = check_doctrine_laws(U, budget=args.budget, seed=args.seed, exhaustive=args.exhaustive)
    doc = {"homs": homs,
           "strongly_cauchy_complete": {R.obj_label(X): is_cauchy_complete(U, X, strong=True).holds for X in objs},
           "section": dict(sec._asdict(), agree=sec.agree),
           "section_on_completion": dict(sec_u._asdict(), agree=sec_u.agree),
           "idempotent": idem, "laws": laws.to_json()}
    good = sec.agree and all(sec_u) and idem["holds"] and laws.ok and all(doc["strongly_cauchy_complete"].values())
    return (OK if good else FOUND), doc


def cmd_singletons(args):
    R = _need(*_load_path(args), "doctrine")
    W = find_singletons(R)
    doc = {"witnesses": {R.obj_label(A): None if w is None else w.to_json(R) for A, w in W.items()},
           "three_way": check_three_way(R)}
    good = doc["three_way"]["agree"]
    if all(w is not None for w in W.values()):
        ref = cauchy_reflector(R, W)
        doc["reflector"] = ref.to_json(R)
        good = good and ref.ok
    else:
        doc["reflector"] = None
    return (OK if good else FOUND), doc


def cmd_quotient(args):
    R = _need(*_load_path(args), "doctrine")
    if args.object is None:
        raise Failure(BAD_INPUT, "input", "quotient needs --object")
    X = _object(R, args.object)
    rhos = [_relation_arg(R, X, X, args.relation)] if args.relation else equivalences(R, X)
    out, good = [], True
    for rho in rhos:
        Q = quotient_arrow(R, X, rho)
        entry = Q.to_json()
        entry["rho"] = R.render_json(rho)
        entry["flavors"] = check_quotient_flavors(Q.doctrine, X, rho, Q.arrow)
        good = good and Q.ok
        out.append(entry)
    return (OK if good else FOUND), {"object": R.obj_label(X), "quotients": out}


def cmd_compactify(args):
    kind, m = _load_path(args)
    if kind == "doctrine":
        m = IdentityMonad(m)
    elif kind != "monad":
        raise Failure(BAD_INPUT, "input", "compactify needs a monad or a doctrine")
    R = m.R
    carriers = m.algebra_carriers()
    objs = carriers if args.object is None else [_object(R, args.object)]
    spaces = []
    for X in objs:
        if args.phi:
            spaces.append(TSpace(X, _relation_arg(R, m.T_obj(X), X, args.phi)))
        else:
            spaces.extend(tspaces(m, X))
    out, good = [], True
    for s in spaces:
        try:
            c = compactify(m, s, carriers)
        except PreconditionError as e:
            out.append({"space": {"carrier": R.obj_label(s.carrier), "phi": R.render_json(s.phi)},
                        "refused": str(e)})
            continue
        good = good and c.ok
        out.append(c.to_json())
    doc = {"compactifications": out, "spaces": len(spaces), "refused": sum("refused" in e for e in out)}
    if args.properties:
        doc["properties"] = check_spfun_properties(m)
    if args.equivalence:
        eq = check_compactification_equivalence(m, hom_cap=args.cap_homs)
        doc["equivalence"] = eq
        good = good and eq["holds"]
    return (OK if good else FOUND), doc


def cmd_counterexample(args):
    R = _need(*_load_path(args), "doctrine")
    found = find_ruc_counterexample(R, strong=args.strong)
    if found is None:
        return OK, {"counterexample": "none"}
    Y, w = found
    doc = {"counterexample": {"object": R.obj_label(Y), "source": R.obj_label(w.src),
                              "relation": R.render_json(w.value),
                              "profile": profile(R, w).to_json(R)}}
    return FOUND, doc


def cmd_builtin(args):
    try:
        params = json.loads(args.params) if args.params else {}
    except json.JSONDecodeError as e:
        raise Failure(BAD_INPUT, "json", f"invalid --params: {e}") from None
    if not isinstance(params, dict):
        raise Failure(BAD_INPUT, "input", "--params must be a JSON object")
    if args.quantale:
        params["quantale"] = args.quantale
    if args.carriers:
        key = "carriers" if args.kind == "vrel" else "points"
        params[key] = [int(c) for c in args.carriers.split(",")]
    doc = builtin_document(args.kind, params, cap=args.cap_fibre)
    if args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(dumps(doc))
        return OK, {"written": args.output}
    return OK, doc


HANDLERS = {"laws": cmd_laws, "analyze": cmd_analyze, "complete": cmd_complete, "singletons": cmd_singletons,
            "quotient": cmd_quotient, "compactify": cmd_compactify, "counterexample": cmd_counterexample,
            "builtin": cmd_builtin}


def _positive(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def parser():
    p = argparse.ArgumentParser(prog="reldoc", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap-fibre", type=_positive, default=1 << 20, help="largest fibre to enumerate")
    common.add_argument("--cap-homs", type=_positive, default=8, help="largest hom-set for morphism search")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=_positive, default=20000, help="law instances per law before sampling")
    common.add_argument("--exhaustive", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "builtin":
            sp.add_argument("kind", choices=("quantale", "vrel", "vcat", "walters"))
            sp.add_argument("-o", "--output", default="-")
            sp.add_argument("--quantale", help="e.g. boolean, chain(3), tropical_grid(1,2)")
            sp.add_argument("--carriers", help="comma-separated carrier sizes")
            sp.add_argument("--params", help="constructor parameters as a JSON object")
            continue
        sp.add_argument("input", help="JSON file, or - for stdin")
        if name in ("quotient", "compactify"):
            sp.add_argument("--object")
        if name == "quotient":
            sp.add_argument("--relation", help="matrix as JSON; all equivalences when omitted")
        if name == "compactify":
            sp.add_argument("--phi", help="convergence relation as JSON; all T-spaces when omitted")
            sp.add_argument("--properties", action="store_true")
            sp.add_argument("--equivalence", action="store_true")
        if name == "counterexample":
            sp.add_argument("--strong", action="store_true")
    return p


def _text(doc, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(doc, dict):
        for k in sorted(doc):
            v = doc[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v, ensure_ascii=False)}")
    elif isinstance(doc, list):
        for v in doc:
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}-")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(v, ensure_ascii=False)}")
    else:
        lines.append(pad + json.dumps(doc, ensure_ascii=False))
    return lines


def run(argv=None, out=None):
    """Run one command; returns the exit code and writes the report to `out`."""
    out = sys.stdout if out is None else out
    try:
        args = parser().parse_args(argv)
    except SystemExit as e:
        return BAD_INPUT if e.code else OK
    fmt = args.format
    try:
        code, doc = HANDLERS[args.command](args)
        doc = {"command": args.command, "exit": code, "result": doc}
    except Failure as e:
        code, doc = e.code, {"error": e.kind, "message": str(e), "problems": e.problems}
    except StructuralError as e:
        code, doc = BAD_INPUT, {"error": "structural", "message": str(e), "problems": e.problems}
    except CapExceeded as e:
        code, doc = CAP, {"error": "cap", "message": str(e), "what": e.what, "size": e.size, "cap": e.cap}
    except (PreconditionError, ValueError, KeyError, TypeError) as e:
        code, doc = BAD_INPUT, {"error": "precondition", "message": str(e), "problems": []}
    if "error" in doc:
        doc["exit"] = code
    out.write(dumps(doc) if fmt == "json" else "\n".join(_text(doc)) + "\n")
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
