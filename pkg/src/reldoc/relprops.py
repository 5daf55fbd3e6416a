"""Functional, total, injective and surjective relations; tracking arrows;
Cauchy-completeness and unique choice relative to a finite presentation."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .category import Arrow
from .doctrine import Doctrine, Relation, ladj_value, reindex_value
from .report import LawReport


@dataclass
class PropertyProfile:
    relation: Relation
    functional: bool
    total: bool
    injective: bool
    surjective: bool
    tracking: list = field(default_factory=list)

    @property
    def bijective(self):
        return self.functional and self.total and self.injective and self.surjective

    def to_json(self, R: Doctrine):
        return {"src": R.obj_label(self.relation.src), "tgt": R.obj_label(self.relation.tgt),
                "relation": R.render_json(self.relation.value),
                "functional": self.functional, "total": self.total, "injective": self.injective,
                "surjective": self.surjective, "bijective": self.bijective,
                "tracking": [R.base.label(f) for f in self.tracking]}


def _ineqs(R, X, Y, a):
    c = R.converse(X, Y, a)
    ca = R.compose(Y, X, Y, c, a)
    ac = R.compose(X, Y, X, a, c)
    dX, dY = R.identity(X), R.identity(Y)
    return (R.leq(Y, Y, ca, dY), R.leq(X, X, dX, ac), R.leq(X, X, ac, dX), R.leq(Y, Y, dY, ca))


def is_functional(R, X, Y, a):
    return _ineqs(R, X, Y, a)[0]


def is_total(R, X, Y, a):
    return _ineqs(R, X, Y, a)[1]


def is_functional_total(R, X, Y, a):
    fun, tot, _, _ = _ineqs(R, X, Y, a)
    return fun and tot


def is_bijective(R, X, Y, a):
    return all(_ineqs(R, X, Y, a))


class TrackingMismatch(AssertionError):
    """The equality test and the ⊑ shortcut disagreed: an implementation error."""


def tracking_arrows(R: Doctrine, X, Y, a, functional_total=None):
    """Arrows f: X→Y with gr f = a.

    For a functional total relation, gr f ⊑ a already forces equality; both
    tests are run and must agree.
    """
    exact = [f for f in R.base.hom(X, Y) if R.graph_value(f) == a]
    if functional_total is None:
        functional_total = is_functional_total(R, X, Y, a)
    if functional_total:
        below = [f for f in R.base.hom(X, Y) if R.leq(X, Y, R.graph_value(f), a)]
        if below != exact:
            raise TrackingMismatch(f"graph below vs equal disagree for {R.render(a)}")
    return exact


def profile(R: Doctrine, alpha: Relation) -> PropertyProfile:
    X, Y, a = alpha.src, alpha.tgt, alpha.value
    fun, tot, inj, sur = _ineqs(R, X, Y, a)
    return PropertyProfile(alpha, fun, tot, inj, sur, tracking_arrows(R, X, Y, a, fun and tot))


def functional_total(R: Doctrine, X, Y):
    """All functional total relations in R(X,Y), in fibre order."""
    cache = R._cache("_ft")
    if (X, Y) not in cache:
        fl = R.flags(X, Y)
        mask = fl["functional"] & fl["total"]
        F = R.fibre(X, Y)
        cache[(X, Y)] = [F[i] for i in np.nonzero(mask)[0]]
    return cache[(X, Y)]


def bijective_relations(R: Doctrine, X, Y):
    fl = R.flags(X, Y)
    mask = fl["functional"] & fl["total"] & fl["injective"] & fl["surjective"]
    F = R.fibre(X, Y)
    return [F[i] for i in np.nonzero(mask)[0]]


def _graph_index(R, X, Y):
    cache = R._cache("_graph_index")
    if (X, Y) not in cache:
        idx = {}
        for f in R.base.hom(X, Y):
            idx.setdefault(R.graph_value(f), []).append(f)
        cache[(X, Y)] = idx
    return cache[(X, Y)]


@dataclass
class CCResult:
    holds: bool
    witness: Relation | None = None
    reason: str | None = None
    tracking: list = field(default_factory=list)

    def __bool__(self):
        return self.holds


def is_cauchy_complete(R: Doctrine, Y, strong=False) -> CCResult:
    """Every functional total relation into Y from a presented object has a
    tracking arrow (exactly one when `strong`)."""
    for X in R.base.objects:
        idx = _graph_index(R, X, Y)
        for a in functional_total(R, X, Y):
            arrows = idx.get(a, [])
            if not arrows:
                return CCResult(False, Relation(X, Y, a), "no tracking arrow")
            if strong and len(arrows) > 1:
                return CCResult(False, Relation(X, Y, a), "several tracking arrows", arrows)
    return CCResult(True)


def check_sruc_iff_ruc_and_extensional(R: Doctrine, Y):
    from .doctrine import is_extensional
    strong = bool(is_cauchy_complete(R, Y, strong=True))
    cc = bool(is_cauchy_complete(R, Y))
    ext = is_extensional(R, Y)
    return {"strong": strong, "cauchy_complete": cc, "extensional": ext, "agree": strong == (cc and ext)}


def find_ruc_counterexample(R: Doctrine, strong=False):
    """First object failing (strong) Cauchy-completeness, with its witness."""
    for Y in R.base.objects:
        res = is_cauchy_complete(R, Y, strong)
        if not res:
            return Y, res.witness
    return None


def bijective_implies_iso_check(R: Doctrine, f: Arrow):
    """Check that an R-bijective arrow between extensional objects with a
    Cauchy-complete domain is invertible, and that isomorphisms are R-bijective."""
    from .doctrine import is_extensional
    X, Y = f.src, f.tgt
    gf = R.graph_value(f)
    bij = is_bijective(R, X, Y, gf)
    hyp = {"domain_extensional": is_extensional(R, X), "codomain_extensional": is_extensional(R, Y),
           "domain_cauchy_complete": bool(is_cauchy_complete(R, X))}
    inverse = R.base.inverse(f)
    report = {"bijective": bij, "hypotheses": hyp, "is_iso": inverse is not None,
              "inverse": inverse, "ok": True, "problems": []}
    if inverse is not None and not bij:
        report["ok"] = False
        report["problems"].append("isomorphism whose graph is not bijective")
    if all(hyp.values()) and bij:
        conv = R.converse(X, Y, gf)
        tracks = [g for g in R.base.hom(Y, X) if R.graph_value(g) == conv]
        if not tracks:
            report["ok"] = False
            report["problems"].append("converse graph has no tracking arrow")
        elif inverse is None or tracks[0] != inverse:
            report["ok"] = False
            report["problems"].append("tracking arrow of the converse graph is not an inverse")
        report["inverse"] = tracks[0] if tracks else inverse
    return report


def check_discreteness(R: Doctrine, objects=None) -> LawReport:
    """Comparable functional total relations in one fibre are equal."""
    report = LawReport()
    objs = R.base.objects if objects is None else objects
    n = 0
    for X, Y in itertools.product(objs, repeat=2):
        ft = functional_total(R, X, Y)
        for a, b in itertools.product(ft, ft):
            n += 1
            if a != b and R.leq(X, Y, a, b):
                report.add("functional total relations are discrete", fibre=f"{X},{Y}",
                           alpha=R.render(a), beta=R.render(b))
    report.coverage["discreteness"] = {"mode": "exhaustive", "checked": n, "total": n}
    return report


def check_arrow_characterizations(R: Doctrine, objects=None) -> LawReport:
    """R-injective ⇔ R∘E = id, R-surjective ⇔ E∘R = id, R-bijective ⇔ R[f,f] is an order isomorphism."""
    report = LawReport()
    objs = R.base.objects if objects is None else objects
    M = R.matrix_backend()
    n = 0
    for X, Y in itertools.product(objs, repeat=2):
        for f in R.base.hom(X, Y):
            n += 1
            _, _, inj, sur = _ineqs(R, X, Y, R.graph_value(f))
            if M is not None:
                re_ex, ex_re, order_iso = _characterize_batched(R, M, f)
            else:
                re_ex, ex_re, order_iso = _characterize(R, f)
            if inj != re_ex:
                report.add("injective iff R[f,f]∘E[f,f] = id", arrow=R.base.label(f), injective=inj)
            if sur != ex_re:
                report.add("surjective iff E[f,f]∘R[f,f] = id", arrow=R.base.label(f), surjective=sur)
            if (inj and sur) != order_iso:
                report.add("bijective iff R[f,f] is an order isomorphism", arrow=R.base.label(f),
                           bijective=inj and sur)
    report.coverage["arrow characterizations"] = {"mode": "exhaustive", "checked": n, "total": n}
    return report


def _characterize(R, f):
    X, Y = f.src, f.tgt
    FX, FY = R.fibre(X, X), R.fibre(Y, Y)
    re = [reindex_value(R, f, f, b) for b in FY]
    ex = [ladj_value(R, f, f, a) for a in FX]
    re_ex = all(reindex_value(R, f, f, e) == a for a, e in zip(FX, ex))
    ex_re = all(ladj_value(R, f, f, r) == b for b, r in zip(FY, re))
    order_iso = len(set(re)) == len(FY) == len(FX) and all(
        R.leq(Y, Y, b1, b2) == R.leq(X, X, r1, r2)
        for (b1, r1), (b2, r2) in itertools.product(zip(FY, re), repeat=2))
    return re_ex, ex_re, order_iso


# pairwise order comparison is quadratic; above this size the order isomorphism
# is read off from R[f,f] and E[f,f] being mutually inverse monotone maps
PAIRWISE_LIMIT = 1024


def _characterize_batched(R, M, f):
    X, Y = f.src, f.tgt
    AX, AY = R.fibre_array(X, X), R.fibre_array(Y, Y)
    g = np.array(R.graph_value(f), dtype=np.int16).reshape(R.size(X), R.size(Y))

    def re(A):
        return M.bcompose(M.bcompose(g, A), g.T)

    def ex(A):
        return M.bcompose(M.bcompose(g.T, A), g)

    reY = re(AY)
    re_ex = bool((re(ex(AX)) == AX).all())
    ex_re = bool((ex(reY) == AY).all())
    if len(AX) != len(AY) or len({m.tobytes() for m in reY}) != len(AY):
        return re_ex, ex_re, False
    if len(AY) > PAIRWISE_LIMIT:
        return re_ex, ex_re, re_ex and ex_re
    before = M.bleq(AY[:, None], AY[None, :])
    after = M.bleq(reY[:, None], reY[None, :])
    return re_ex, ex_re, bool((before == after).all())
