"""Map(R), the unique-choice completion Ruc(R), singleton objects and the
Cauchy reflector on finite presentations."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

from .category import Arrow, FiniteCategory, FullSubcategory
from .doctrine import Doctrine, PulledBackDoctrine
from .morphism import OneArrow, check_equivalence, check_one_arrow, enumerate_functors
from .relprops import (bijective_relations, functional_total, is_bijective,
                       is_cauchy_complete)
from .report import PreconditionError


class MapCategory(FiniteCategory):
    """Objects of R; arrows are the functional total relations, composed relationally."""

    def __init__(self, R: Doctrine):
        self.R = R
        self.objects = list(R.base.objects)
        self._homs = {}

    def hom(self, X, Y):
        if (X, Y) not in self._homs:
            self._homs[(X, Y)] = [Arrow(X, Y, v) for v in functional_total(self.R, X, Y)]
        return self._homs[(X, Y)]

    def compose(self, f, g):
        if f.tgt != g.src:
            raise ValueError("arrows are not composable")
        return Arrow(f.src, g.tgt, self.R.compose(f.src, f.tgt, g.tgt, f.data, g.data))

    def identity(self, X):
        return Arrow(X, X, self.R.identity(X))

    def label(self, f):
        return f"{self.R.obj_label(f.src)}->{self.R.obj_label(f.tgt)}:{self.R.render(f.data)}"

    def obj_label(self, X):
        return self.R.obj_label(X)

    def contains(self, f):
        return f.src in self.objects and f.tgt in self.objects and f in self.hom(f.src, f.tgt)

    def inverse(self, f):
        # an inverse of a functional total relation can only be its converse
        g = Arrow(f.tgt, f.src, self.R.converse(f.src, f.tgt, f.data))
        if g in self.hom(f.tgt, f.src) and self.compose(f, g) == self.identity(f.src) \
                and self.compose(g, f) == self.identity(f.tgt):
            return g
        return None


class RucDoctrine(PulledBackDoctrine):
    """Fibres of R over Map(R); an arrow is its own graph."""

    def __init__(self, R: Doctrine):
        super().__init__(R, MapCategory(R), lambda X: X, None)

    def graph_value(self, h):
        return h.data

    def obj_label(self, X):
        return self.inner.obj_label(X)


def map_category(R: Doctrine) -> MapCategory:
    return MapCategory(R)


def ruc_doctrine(R: Doctrine) -> RucDoctrine:
    return RucDoctrine(R)


def graph_functor(R: Doctrine) -> OneArrow:
    """The canonical morphism R → Ruc(R): identity on objects and fibres, f ↦ gr f."""
    U = ruc_doctrine(R)
    return OneArrow(R, U, lambda X: X, lambda f: Arrow(f.src, f.tgt, R.graph_value(f)), lambda X, Y, a: a)


def graph_functor_status(R: Doctrine):
    """(full, faithful) for the identity-on-objects functor base → Map(R)."""
    full = faithful = True
    for X, Y in itertools.product(R.base.objects, repeat=2):
        images = [R.graph_value(f) for f in R.base.hom(X, Y)]
        if len(set(images)) != len(images):
            faithful = False
        if set(images) != set(functional_total(R, X, Y)):
            full = False
    return full, faithful


def find_retraction(R: Doctrine):
    """A functor Map(R) → base, identity on objects, left inverse to the graph
    functor and keeping every relation as the graph of its image."""
    C, M = R.base, MapCategory(R)
    tracks = {}
    for X, Y in itertools.product(C.objects, repeat=2):
        for f in C.hom(X, Y):
            tracks.setdefault((X, Y, R.graph_value(f)), []).append(f)

    def candidates(h):
        fs = tracks.get((h.src, h.tgt, h.data), [])
        # h = gr f must go back to f, so two arrows with one graph rule it out
        return fs if len(fs) == 1 else []

    for assign in enumerate_functors(M, C, {X: X for X in C.objects}, candidates, limit=1):
        for X in C.objects:
            if len(tracks.get((X, X, R.identity(X)), [])) != 1:
                return None
        return assign
    return None


class SectionCheck(NamedTuple):
    sruc: bool
    graph_iso: bool
    section: bool

    @property
    def agree(self):
        return self.sruc == self.graph_iso == self.section


def check_sruc_section(R: Doctrine) -> SectionCheck:
    """Strong unique choice, invertibility of the graph functor and existence of
    a retraction of it, each computed independently."""
    sruc = all(is_cauchy_complete(R, Y, strong=True) for Y in R.base.objects)
    full, faithful = graph_functor_status(R)
    retraction = find_retraction(R)
    if retraction is not None:
        P = OneArrow(ruc_doctrine(R), R, lambda X: X, retraction.__getitem__, lambda X, Y, a: a)
        if not check_one_arrow(P).ok:
            retraction = None
    return SectionCheck(sruc, full and faithful, retraction is not None)


def check_ruc_idempotent(R: Doctrine) -> dict:
    """Ruc(Ruc(R)) has the same arrows as Ruc(R) and its graph functor is the identity."""
    U = ruc_doctrine(R)
    UU = ruc_doctrine(U)
    objs = R.base.objects
    same_homs = all(U.base.hom(X, Y) == UU.base.hom(X, Y) for X, Y in itertools.product(objs, repeat=2))
    gr_identity = all(Arrow(h.src, h.tgt, U.graph_value(h)) == h for h in U.base.arrows())
    same_fibres = all(U.fibre(X, Y) == UU.fibre(X, Y) for X, Y in itertools.product(objs, repeat=2))
    return {"same_homs": same_homs, "graph_is_identity": gr_identity, "same_fibres": same_fibres,
            "holds": same_homs and gr_identity and same_fibres}


# singleton objects

@dataclass
class SingletonWitness:
    obj: object
    singleton: object
    epsilon: object
    unit: Arrow
    classifier: dict = field(repr=False, default_factory=dict)
    verified: list = field(default_factory=list)

    def to_json(self, R: Doctrine):
        return {"object": R.obj_label(self.obj), "singleton": R.obj_label(self.singleton),
                "epsilon": R.render_json(self.epsilon), "unit": R.base.label(self.unit),
                "verified": list(self.verified)}


def _classifier(R, A, S, eps, objects):
    """Map (Z, α) ↦ χ with gr χ ; ε = α for every functional total α into A,
    or None if some α has no or several such χ."""
    table = {}
    for Z in objects:
        hits = {}
        for chi in R.base.hom(Z, S):
            hits.setdefault(R.compose(Z, S, A, R.graph_value(chi), eps), []).append(chi)
        for alpha in functional_total(R, Z, A):
            chis = hits.get(alpha, [])
            if len(chis) != 1:
                return None
            table[(Z, alpha)] = chis[0]
    return table


def find_singletons(R: Doctrine, objects=None) -> dict:
    """For each object A, a presented S(A) with a bijective ε ∈ R(S(A), A)
    classifying functional total relations into A, or None.

    Only presented objects are searched: None means no witness here, not that
    none exists elsewhere.
    """
    objs = list(R.base.objects if objects is None else objects)
    out = {}
    for A in objs:
        out[A] = None
        for S in [A] + [X for X in objs if X != A]:
            epsilons = bijective_relations(R, S, A)
            if S == A and R.identity(A) in epsilons:
                epsilons = [R.identity(A)] + [e for e in epsilons if e != R.identity(A)]
            for eps in epsilons:
                table = _classifier(R, A, S, eps, objs)
                if table is None:
                    continue
                unit = table[(A, R.identity(A))]
                w = SingletonWitness(A, S, eps, unit, table, ["epsilon bijective", "classification unique"])
                if R.compose(A, S, A, R.graph_value(unit), eps) == R.identity(A):
                    w.verified.append("gr(unit) ; epsilon = d")
                out[A] = w
                break
            if out[A] is not None:
                break
    have = [A for A in objs if out[A] is not None]
    if _singleton_functor_fully_faithful(R, out, have):
        for A in have:
            out[A].verified.append("singleton functor fully faithful on the presented fragment")
    return out


def _singleton_functor_fully_faithful(R, W, objs):
    for A, B in itertools.product(objs, repeat=2):
        SA, SB = W[A].singleton, W[B].singleton
        images = []
        for beta in functional_total(R, A, B):
            alpha = R.compose(SA, A, B, W[A].epsilon, beta)
            chi = W[B].classifier.get((SA, alpha))
            if chi is None:
                return False
            images.append(chi)
        if len(set(images)) != len(images) or set(images) != set(R.base.hom(SA, SB)):
            return False
    return True


def strongly_cauchy_complete_objects(R: Doctrine):
    return [Y for Y in R.base.objects if is_cauchy_complete(R, Y, strong=True)]


def restrict_to(R: Doctrine, objects) -> PulledBackDoctrine:
    """The doctrine R on the full subcategory of the given objects."""
    return PulledBackDoctrine(R, FullSubcategory(R.base, objects), lambda X: X, lambda f: f)


@dataclass
class Reflector:
    obj: dict
    unit: dict
    arr: dict
    checks: dict

    @property
    def ok(self):
        return all(self.checks.values())

    def to_json(self, R: Doctrine):
        return {"objects": {R.obj_label(A): R.obj_label(S) for A, S in self.obj.items()},
                "unit": {R.obj_label(A): R.base.label(u) for A, u in self.unit.items()},
                "checks": dict(self.checks)}


def _factor_counts(R, f_source_unit, targets):
    """For a unit u: A → S, count factorizations of every f: A → Y through u."""
    u = f_source_unit
    A, S = u.src, u.tgt
    bad = []
    for Y in targets:
        seen = {}
        for h in R.base.hom(S, Y):
            k = R.base.compose(u, h)
            seen[k] = seen.get(k, 0) + 1
        for f in R.base.hom(A, Y):
            if seen.get(f, 0) != 1:
                bad.append((f, seen.get(f, 0)))
    return bad


def cauchy_reflector(R: Doctrine, witnesses=None) -> Reflector:
    """Reflection of the base onto its strongly Cauchy-complete objects, built
    from singleton witnesses and verified exhaustively."""
    W = find_singletons(R) if witnesses is None else witnesses
    missing = [A for A, w in W.items() if w is None]
    if missing:
        raise PreconditionError("no singleton witness for " + ", ".join(R.obj_label(A) for A in missing))
    scc = set(strongly_cauchy_complete_objects(R))
    C = R.base
    obj = {A: w.singleton for A, w in W.items()}
    unit = {A: w.unit for A, w in W.items()}
    checks = {
        "unit is R-bijective": all(is_bijective(R, A, obj[A], R.graph_value(u)) for A, u in unit.items()),
        "unit invertible exactly on strongly Cauchy-complete objects":
            all(C.is_iso(u) == (A in scc) for A, u in unit.items()),
        "reflection lands in strongly Cauchy-complete objects": all(S in scc for S in obj.values()),
        "every arrow into a strongly Cauchy-complete object factors uniquely through the unit":
            all(not _factor_counts(R, u, sorted(scc, key=C.objects.index)) for u in unit.values()),
    }
    arr = {}
    for A, B in itertools.product(W, repeat=2):
        for f in C.hom(A, B):
            target = C.compose(f, unit[B])
            hs = [h for h in C.hom(obj[A], obj[B]) if C.compose(unit[A], h) == target]
            if len(hs) == 1:
                arr[f] = hs[0]
    checks["reflector defined on every arrow"] = len(arr) == sum(len(C.hom(A, B)) for A in W for B in W)
    return Reflector(obj, unit, arr, checks)


def _reflector_by_search(R: Doctrine):
    """Does every object have an R-bijective arrow into a strongly CC object
    through which arrows into strongly CC objects factor uniquely?"""
    scc = strongly_cauchy_complete_objects(R)
    C = R.base
    for A in C.objects:
        if not any(is_bijective(R, A, Y, R.graph_value(u)) and not _factor_counts(R, u, scc)
                   for Y in scc for u in C.hom(A, Y)):
            return False
    return True


def comparison_functor(R: Doctrine) -> OneArrow:
    """Restriction of R to its strongly CC objects, then the graph functor into Ruc(R)."""
    scc = strongly_cauchy_complete_objects(R)
    Rs = restrict_to(R, scc)
    U = ruc_doctrine(R)
    return OneArrow(Rs, U, lambda X: X, lambda f: Arrow(f.src, f.tgt, R.graph_value(f)), lambda X, Y, a: a)


def check_three_way(R: Doctrine) -> dict:
    """Singleton objects exist ⇔ the strongly CC objects are reflective ⇔ the
    comparison functor into Ruc(R) is an equivalence."""
    W = find_singletons(R)
    singletons = all(w is not None for w in W.values())
    reflective = _reflector_by_search(R)
    scc = strongly_cauchy_complete_objects(R)
    if scc:
        equivalence = check_equivalence(comparison_functor(R))["holds"]
    else:
        equivalence = not R.base.objects
    out = {"singletons_total": singletons, "reflective": reflective, "equivalence": equivalence}
    out["agree"] = singletons == reflective == equivalence
    if singletons:
        out["restriction_section"] = tuple(check_sruc_section(restrict_to(R, scc)))
    return out


# universal property of Ruc(R)

def factorizations_through_ruc(F: OneArrow, limit=None):
    """Every morphism G: Ruc(R) → S with G ∘ gr = F."""
    R, S = F.source, F.target
    U = ruc_doctrine(R)
    objs = R.base.objects
    Fo = {X: F.obj(X) for X in objs}
    by_graph = {}
    for f in R.base.arrows():
        by_graph.setdefault((f.src, f.tgt, R.graph_value(f)), set()).add(F.arr(f))

    def candidates(h):
        X, Y = h.src, h.tgt
        lifted = F.lift(X, Y, h.data)
        cands = [e for e in S.base.hom(Fo[X], Fo[Y]) if S.graph_value(e) == lifted]
        forced = by_graph.get((X, Y, h.data))
        if forced is not None:
            cands = [e for e in cands if {e} == forced]
        return cands

    out = []
    for X in objs:
        forced = by_graph.get((X, X, R.identity(X)))
        if forced is not None and forced != {S.base.identity(Fo[X])}:
            return out
    for assign in enumerate_functors(U.base, S.base, Fo, candidates):
        G = OneArrow(U, S, Fo.__getitem__, assign.__getitem__, F.lift)
        if check_one_arrow(G).ok:
            out.append(G)
            if limit is not None and len(out) >= limit:
                break
    return out
