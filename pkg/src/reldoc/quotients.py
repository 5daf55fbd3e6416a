"""Equivalence relations in a doctrine and their quotient arrows.

For quantale-valued relations on sets the quotient of ρ on X is the set of
classes of the equivalence generated by the support of ρ.  For V-categories
x ~ x' when ρ(x,x') lies above the unit, and classes inherit the join of ρ
over representatives as distance.  Every construction is checked against the
universal property by enumerating arrows out of X.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .builtins import VCatDoctrine, VCategory, VRelDoctrine, WaltersDoctrine, check_vcategory
from .category import Arrow
from .doctrine import Doctrine
from .report import CapExceeded, LawReport, PreconditionError

UNIVERSAL_HOM_LIMIT = 1 << 14


@dataclass
class EquivalenceCheck:
    holds: bool
    failed: list = field(default_factory=list)

    def __bool__(self):
        return self.holds


def is_equivalence(R: Doctrine, X, rho) -> EquivalenceCheck:
    failed = []
    if not R.leq(X, X, R.identity(X), rho):
        failed.append("reflexive")
    if not R.leq(X, X, R.converse(X, X, rho), rho):
        failed.append("symmetric")
    if not R.leq(X, X, R.compose(X, X, X, rho, rho), rho):
        failed.append("transitive")
    return EquivalenceCheck(not failed, failed)


def equivalences(R: Doctrine, X):
    return [r for r in R.fibre(X, X) if is_equivalence(R, X, r)]


def _kernel_pair(R, q):
    g = R.graph_value(q)
    return R.compose(q.src, q.tgt, q.src, g, R.converse(q.src, q.tgt, g))


def support_classes(q, rho, threshold=None):
    """Classes of the equivalence generated by the support of a matrix, or by
    the entries above `threshold` when given."""
    n = len(rho)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.product(range(n), repeat=2):
        linked = rho[i][j] != q.bottom if threshold is None else q.le(threshold, rho[i][j])
        if linked:
            a, b = find(i), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
    classes = {}
    for i in range(n):
        classes.setdefault(find(i), []).append(i)
    return sorted(classes.values())


def check_universal_property(R: Doctrine, X, rho, q: Arrow, targets=None, hom_limit=UNIVERSAL_HOM_LIMIT):
    """ρ ⊑ gr q ; gr q°, and every f: X→Y with ρ ⊑ gr f ; gr f° is h∘q for exactly one h.

    Returns (ok, transcript).  Targets whose hom-sets exceed `hom_limit` are skipped and listed.
    """
    C = R.base
    W = q.tgt
    covered = R.leq(X, X, rho, _kernel_pair(R, q))
    failures, skipped, checked = [], [], 0
    bound = getattr(C, "hom_count_bound", None)
    for Y in (C.objects if targets is None else targets):
        if bound is not None and max(bound(X, Y), bound(W, Y)) > hom_limit:
            skipped.append(f"{R.obj_label(Y)}: hom-sets larger than {hom_limit}")
            continue
        try:
            fs = C.hom(X, Y)
            hs = C.hom(W, Y)
        except CapExceeded as e:
            skipped.append(f"{R.obj_label(Y)}: {e}")
            continue
        if len(fs) > hom_limit or len(hs) > hom_limit:
            skipped.append(f"{R.obj_label(Y)}: hom-sets larger than {hom_limit}")
            continue
        through = {}
        for h in hs:
            k = C.compose(q, h)
            through[k] = through.get(k, 0) + 1
        for f in fs:
            if not R.leq(X, X, rho, _kernel_pair(R, f)):
                continue
            checked += 1
            n = through.get(f, 0)
            if n != 1:
                failures.append({"target": R.obj_label(Y), "arrow": C.label(f), "factorizations": n})
    transcript = {"rho below kernel of q": covered, "arrows checked": checked,
                  "failures": failures[:5], "failure count": len(failures), "skipped targets": skipped}
    return covered and not failures, transcript


@dataclass
class Quotient:
    doctrine: Doctrine
    source: object
    target: object
    arrow: Arrow
    classes: list
    extended: bool
    ok: bool
    transcript: dict

    def to_json(self):
        R = self.doctrine
        M = R.matrix_backend()
        names = None
        if M is not None and hasattr(M, "carriers"):
            names = M.carriers.get(self.source)
        elif isinstance(M, VCatDoctrine):
            names = list(M.cats[self.source].points)
        return {"source": R.obj_label(self.source), "target": R.obj_label(self.target),
                "arrow": R.base.label(self.arrow), "extended": self.extended,
                "classes": [[names[i] if names else i for i in c] for c in self.classes],
                "universal_property": self.ok, "transcript": self.transcript}


def _fresh_name(R, stem):
    name, i = stem, 1
    while name in R.base.objects:
        i += 1
        name = f"{stem}#{i}"
    return name


def _vcat_quotient(q, cat: VCategory, rho, classes):
    d = [[q.join_all(rho[x][y] for x in ci for y in cj) for cj in classes] for ci in classes]
    points = tuple("[" + ",".join(cat.points[x] for x in c) + "]" for c in classes)
    return VCategory(points, tuple(tuple(r) for r in d))


def quotient_arrow(R: Doctrine, X, rho, reuse=True, verify=True, hom_limit=UNIVERSAL_HOM_LIMIT,
                   reuse_among=None) -> Quotient:
    """Quotient arrow of an equivalence relation in a concrete doctrine.

    With `reuse`, an existing object isomorphic to the class object is used
    (searched in `reuse_among` when given); otherwise the presentation is
    extended by a new object.
    """
    pool = R.base.objects if reuse_among is None else list(reuse_among)
    eq = is_equivalence(R, X, rho)
    if not eq:
        raise PreconditionError(f"not an equivalence relation: fails {', '.join(eq.failed)}")
    if isinstance(R, WaltersDoctrine) or not isinstance(R, (VRelDoctrine, VCatDoctrine)):
        raise PreconditionError("quotients are constructed only for set-based and V-category doctrines")
    vcat = not isinstance(R, VRelDoctrine)
    classes = support_classes(R.q, rho, R.q.unit if vcat else None)
    k = len(classes)
    proj = [0] * R.size(X)
    for i, c in enumerate(classes):
        for x in c:
            proj[x] = i
    extended = False
    S = R
    if isinstance(R, VRelDoctrine):
        W = None
        if reuse and R.include_all_functions:
            W = next((Y for Y in pool if R.size(Y) == k), None)
        if W is None:
            W = _fresh_name(R, f"{X}/~")
            S = R.with_carrier(W, k)
            extended = True
    else:
        cat = _vcat_quotient(R.q, R.cats[X], rho, classes)
        problems = check_vcategory(R.q, cat)
        if problems:
            raise PreconditionError("quotient distances do not form a V-category: " + "; ".join(problems))
        W = None
        if reuse:
            W = next((Y for Y in pool if R.cats[Y].dist == cat.dist), None)
        if W is None:
            W = _fresh_name(R, f"{X}/~")
            S = R.with_category(W, cat)
            extended = True
    qa = Arrow(X, W, tuple(proj))
    if not S.base.contains(qa):
        raise PreconditionError("projection onto the classes is not an arrow of the base")
    ok, transcript = (True, {}) if not verify else check_universal_property(S, X, rho, qa, hom_limit=hom_limit)
    recipe = "classes of entries above the unit" if vcat else "classes of the support equivalence"
    transcript = {"recipe": recipe, **transcript}
    return Quotient(S, X, W, qa, classes, extended, ok, transcript)


def check_quotient_flavors(R: Doctrine, X, rho, q: Arrow) -> dict:
    """Effective: ρ = gr q ; gr q°.  Surjective: d = gr q° ; gr q."""
    W = q.tgt
    g = R.graph_value(q)
    kernel = _kernel_pair(R, q)
    image = R.compose(W, X, W, R.converse(X, W, g), g)
    out = {"effective": kernel == rho, "surjective": image == R.identity(W)}
    if not out["effective"] and R.matrix_backend() is not None:
        names = R.matrix_backend().q.names
        for i, (ra, rb) in enumerate(zip(rho, kernel)):
            j = next((j for j, (u, v) in enumerate(zip(ra, rb)) if u != v), None)
            if j is not None:
                out["failing_pair"] = {"pair": [i, j], "rho": names[ra[j]], "kernel": names[rb[j]]}
                break
    return out


def quotient_arrows_in(R: Doctrine, X, rho, hom_limit=UNIVERSAL_HOM_LIMIT):
    """Presented arrows out of X that are quotient arrows of ρ."""
    out = []
    for W in R.base.objects:
        try:
            qs = R.base.hom(X, W)
        except CapExceeded:
            continue
        if len(qs) > hom_limit:
            continue
        for q in qs:
            if R.leq(X, X, rho, _kernel_pair(R, q)):
                ok, _ = check_universal_property(R, X, rho, q, hom_limit=hom_limit)
                if ok:
                    out.append(q)
    return out


def check_preserves_quotients(monad, objects=None, hom_limit=256) -> LawReport:
    """For each equivalence ρ on X and each presented quotient arrow q of ρ, the
    image Tq is a quotient arrow of the lifted relation T̂ρ."""
    R = monad.R
    rep = LawReport()
    objs = [X for X in (monad.domain() if objects is None else objects)]
    n = 0
    for X in objs:
        TX = monad.T_obj(X)
        for rho in equivalences(R, X):
            for q in quotient_arrows_in(R, X, rho, hom_limit):
                if monad.T_obj(q.tgt) is None:
                    rep.skipped.append(f"{R.base.label(q)}: T undefined on the target")
                    continue
                n += 1
                Tq = monad.T_arr(q)
                ok, tr = check_universal_property(R, TX, monad.lift(X, X, rho), Tq, hom_limit=hom_limit)
                if not ok:
                    rep.add("T preserves quotient arrows", arrow=R.base.label(q), rho=R.render(rho),
                            transcript=tr)
                rep.skipped.extend(f"{R.base.label(Tq)} -> {s}" for s in tr.get("skipped targets", []))
    rep.coverage["quotient preservation"] = {"mode": "exhaustive", "checked": n, "total": n}
    return rep
