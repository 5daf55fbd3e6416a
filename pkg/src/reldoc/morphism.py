"""Morphisms of doctrines between finite presentations: a functor on the bases
together with monotone fibre maps preserving identities, composition,
converse and graphs.  Includes exhaustive law checks, an equivalence test and
a backtracking enumerator for tiny presentations."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .category import FiniteCategory
from .doctrine import Doctrine
from .report import CapExceeded, LawReport

DEFAULT_MORPHISM_HOM_CAP = 8


@dataclass
class OneArrow:
    source: Doctrine
    target: Doctrine
    obj: Callable
    arr: Callable
    lift: Callable          # lift(X, Y, value) -> value of target fibre at (obj X, obj Y)

    def describe(self):
        R, S = self.source, self.target
        objs = {R.obj_label(X): S.obj_label(self.obj(X)) for X in R.base.objects}
        arrows = {R.base.label(f): S.base.label(self.arr(f)) for f in R.base.arrows()}
        return {"objects": objs, "arrows": arrows}


def check_one_arrow(F: OneArrow) -> LawReport:
    """Functor laws on the base, then every fibre-map condition, all exhaustively."""
    R, S = F.source, F.target
    C, D = R.base, S.base
    rep = LawReport()
    objs = C.objects
    H = {(X, Y): C.hom(X, Y) for X in objs for Y in objs}
    Fo = {X: F.obj(X) for X in objs}
    Fa = {f: F.arr(f) for hs in H.values() for f in hs}

    for X in objs:
        if Fa[C.identity(X)] != D.identity(Fo[X]):
            rep.add("functor preserves identities", object=R.obj_label(X))
    for (X, Y), hs in H.items():
        for f in hs:
            g = Fa[f]
            if (g.src, g.tgt) != (Fo[X], Fo[Y]) or not D.contains(g):
                rep.add("functor respects endpoints", arrow=C.label(f))
    for X, Y, Z in itertools.product(objs, repeat=3):
        for f in H[(X, Y)]:
            for g in H[(Y, Z)]:
                if Fa[C.compose(f, g)] != D.compose(Fa[f], Fa[g]):
                    rep.add("functor preserves composition", f=C.label(f), g=C.label(g))

    L = {}
    for X, Y in itertools.product(objs, repeat=2):
        for a in R.fibre(X, Y):
            v = F.lift(X, Y, a)
            L[(X, Y, a)] = v
            if not S.contains(Fo[X], Fo[Y], v):
                rep.add("lift lands in the fibre", fibre=f"{X},{Y}", alpha=R.render(a))
    batched = _Batched.make(R, S, Fo, L)
    for X, Y in itertools.product(objs, repeat=2):
        FXY = R.fibre(X, Y)
        pairs = batched.monotone(X, Y) if batched else itertools.product(FXY, FXY)
        for a, b in pairs:
            if R.leq(X, Y, a, b) and not S.leq(Fo[X], Fo[Y], L[(X, Y, a)], L[(X, Y, b)]):
                rep.add("lift monotone", fibre=f"{X},{Y}", alpha=R.render(a), beta=R.render(b))
        for a in FXY:
            if L[(Y, X, R.converse(X, Y, a))] != S.converse(Fo[X], Fo[Y], L[(X, Y, a)]):
                rep.add("lift preserves converse", fibre=f"{X},{Y}", alpha=R.render(a))
    for X in objs:
        if L[(X, X, R.identity(X))] != S.identity(Fo[X]):
            rep.add("lift preserves identities", object=R.obj_label(X))
    for X, Y, Z in itertools.product(objs, repeat=3):
        pairs = batched.composition(X, Y, Z) if batched else \
            itertools.product(R.fibre(X, Y), R.fibre(Y, Z))
        for a, b in pairs:
            lhs = L[(X, Z, R.compose(X, Y, Z, a, b))]
            if lhs != S.compose(Fo[X], Fo[Y], Fo[Z], L[(X, Y, a)], L[(Y, Z, b)]):
                rep.add("lift preserves composition", alpha=R.render(a), beta=R.render(b))
    for (X, Y), hs in H.items():
        for f in hs:
            if L[(X, Y, R.graph_value(f))] != S.graph_value(Fa[f]):
                rep.add("lift preserves graphs", arrow=C.label(f))
    # reindexing is gr f ; α ; gr g°, so naturality follows from the three checks above
    return rep


class _Batched:
    """Array versions of the two quadratic lift checks for matrix-backed
    doctrines.  Each method yields only the pairs that may fail, which the
    caller then re-checks one by one."""

    CHUNK = 1 << 22

    @classmethod
    def make(cls, R, S, Fo, L):
        M, N = R.matrix_backend(), S.matrix_backend()
        if M is None or N is None:
            return None
        return cls(R, S, M, N, Fo, L)

    def __init__(self, R, S, M, N, Fo, L):
        self.R, self.S, self.M, self.N, self.Fo, self.L = R, S, M, N, Fo, L
        self._arrays, self._lifted, self._index = {}, {}, {}

    def array(self, X, Y):
        if (X, Y) not in self._arrays:
            self._arrays[(X, Y)] = np.asarray(self.R.fibre_array(X, Y))
        return self._arrays[(X, Y)]

    def lifted(self, X, Y):
        if (X, Y) not in self._lifted:
            vals = [self.L[(X, Y, a)] for a in self.R.fibre(X, Y)]
            S, Fo = self.S, self.Fo
            self._lifted[(X, Y)] = self.N.to_array(vals, S.size(Fo[X]), S.size(Fo[Y]))
        return self._lifted[(X, Y)]

    def _codes(self, arr):
        flat = arr.reshape(arr.shape[0], -1).astype(np.int64)
        base = self.M.q.size
        if flat.shape[1] and base ** flat.shape[1] >= 1 << 62:
            return None
        weights = base ** np.arange(flat.shape[1] - 1, -1, -1, dtype=np.int64)
        return flat @ weights

    def index(self, X, Z):
        if (X, Z) not in self._index:
            codes = self._codes(self.array(X, Z))
            self._index[(X, Z)] = None if codes is None else (codes, np.argsort(codes, kind="stable"))
        return self._index[(X, Z)]

    def _chunks(self, n_outer, per_item):
        step = max(1, self.CHUNK // max(1, per_item))
        for lo in range(0, n_outer, step):
            yield lo, min(n_outer, lo + step)

    def monotone(self, X, Y):
        A, LA = self.array(X, Y), self.lifted(X, Y)
        F = self.R.fibre(X, Y)
        per = len(A) * max(1, A[0].size if len(A) else 1)
        for lo, hi in self._chunks(len(A), per):
            below = self.M.bleq(A[lo:hi, None], A[None])
            kept = self.N.bleq(LA[lo:hi, None], LA[None])
            for i, j in zip(*np.nonzero(below & ~kept)):
                yield F[lo + i], F[j]

    def composition(self, X, Y, Z):
        R = self.R
        FA, FB = R.fibre(X, Y), R.fibre(Y, Z)
        idx = self.index(X, Z)
        if idx is None or not FA or not FB:
            yield from itertools.product(FA, FB)
            return
        codes_xz, order = idx
        A, B = self.array(X, Y), self.array(Y, Z)
        LA, LB, LC = self.lifted(X, Y), self.lifted(Y, Z), self.lifted(X, Z)
        per = len(B) * max(1, A.shape[1] * A.shape[2] * B.shape[2])
        for lo, hi in self._chunks(len(A), per):
            comp = self.M.bcompose(A[lo:hi, None], B[None])
            shape = comp.shape[:2]
            codes = self._codes(comp.reshape((-1,) + comp.shape[2:]))
            pos = np.clip(np.searchsorted(codes_xz, codes, sorter=order), 0, len(order) - 1)
            at = order[pos]
            found = codes_xz[at] == codes
            lhs = LC[at]
            rhs = self.N.bcompose(LA[lo:hi, None], LB[None]).reshape(lhs.shape)
            bad = ~found | (lhs != rhs).reshape(len(lhs), -1).any(axis=1)
            for k in np.nonzero(bad.reshape(shape).ravel())[0]:
                i, j = divmod(int(k), shape[1])
                yield FA[lo + i], FB[j]


def check_equivalence(F: OneArrow) -> dict:
    """Is F an equivalence: lawful, full, faithful, essentially surjective, fibrewise order isomorphisms?"""
    R, S = F.source, F.target
    C, D = R.base, S.base
    laws = check_one_arrow(F)
    full = faithful = fibres = True
    for X, Y in itertools.product(C.objects, repeat=2):
        images = [F.arr(f) for f in C.hom(X, Y)]
        if len(set(images)) != len(images):
            faithful = False
        if set(images) != set(D.hom(F.obj(X), F.obj(Y))):
            full = False
        FXY = R.fibre(X, Y)
        lifted = [F.lift(X, Y, a) for a in FXY]
        if set(lifted) != set(S.fibre(F.obj(X), F.obj(Y))) or len(set(lifted)) != len(lifted):
            fibres = False
            continue
        for (a, u), (b, v) in itertools.product(zip(FXY, lifted), repeat=2):
            if S.leq(F.obj(X), F.obj(Y), u, v) and not R.leq(X, Y, a, b):
                fibres = False
    image = {F.obj(X) for X in C.objects}
    ess = all(B in image or any(D.is_iso(h) for Z in image for h in D.hom(Z, B)) for B in D.objects)
    return {"one_arrow": laws.ok, "full": full, "faithful": faithful, "essentially_surjective": ess,
            "fibres_isomorphic": fibres,
            "holds": laws.ok and full and faithful and ess and fibres,
            "violations": [v.to_json() for v in laws.violations[:5]]}


def _hom_lists(C: FiniteCategory, objs, cap):
    H = {}
    for X, Y in itertools.product(objs, repeat=2):
        hs = C.hom(X, Y)
        if cap is not None and len(hs) > cap:
            raise CapExceeded(f"hom({X},{Y}) for functor enumeration", len(hs), cap)
        H[(X, Y)] = hs
    return H


def enumerate_functors(C: FiniteCategory, D: FiniteCategory, obj_map: dict, candidates=None, limit=None):
    """All functors C→D with the given object map.

    `candidates(f)` may narrow the image of each arrow; identities are fixed.
    Yields dicts arrow → arrow.
    """
    objs = C.objects
    arrows = [f for X, Y in itertools.product(objs, repeat=2) for f in C.hom(X, Y)]
    idents = {C.identity(X) for X in objs}
    free = [f for f in arrows if f not in idents]
    comps = {}
    for X, Y, Z in itertools.product(objs, repeat=3):
        for f in C.hom(X, Y):
            for g in C.hom(Y, Z):
                comps.setdefault(f, []).append((g, C.compose(f, g)))
    involving = {f: [] for f in arrows}
    for f, lst in comps.items():
        for g, h in lst:
            for k in {f, g, h}:
                involving[k].append((f, g, h))
    assign = {C.identity(X): D.identity(obj_map[X]) for X in objs}
    cands = {}
    for f in free:
        base = D.hom(obj_map[f.src], obj_map[f.tgt])
        cands[f] = list(base) if candidates is None else [e for e in candidates(f) if e in set(base)]
    found = 0

    def consistent(k):
        for f, g, h in involving[k]:
            if f in assign and g in assign and h in assign:
                if D.compose(assign[f], assign[g]) != assign[h]:
                    return False
        return True

    for X in objs:
        if not consistent(C.identity(X)):
            return

    def rec(i):
        nonlocal found
        if limit is not None and found >= limit:
            return
        if i == len(free):
            found += 1
            yield dict(assign)
            return
        f = free[i]
        for e in cands[f]:
            assign[f] = e
            if consistent(f):
                yield from rec(i + 1)
            del assign[f]

    yield from rec(0)


def _lift_search(R, S, Fo, Fa, limit=None):
    """All fibre maps completing a base functor to a doctrine morphism."""
    objs = R.base.objects
    elems = [(X, Y, a) for X, Y in itertools.product(objs, repeat=2) for a in R.fibre(X, Y)]
    by_fibre = {}
    for X, Y, a in elems:
        by_fibre.setdefault((X, Y), []).append(a)

    def propagate(state, todo):
        L, out_of, into = state
        while todo:
            (X, Y, a), v = todo.pop()
            key = (X, Y, a)
            if key in L:
                if L[key] != v:
                    return False
                continue
            if not S.contains(Fo[X], Fo[Y], v):
                return False
            for b in by_fibre[(X, Y)]:
                w = L.get((X, Y, b))
                if w is None:
                    continue
                if R.leq(X, Y, a, b) and not S.leq(Fo[X], Fo[Y], v, w):
                    return False
                if R.leq(X, Y, b, a) and not S.leq(Fo[X], Fo[Y], w, v):
                    return False
            L[key] = v
            out_of[X].append((Y, a, v))
            into[Y].append((X, a, v))
            todo.append(((Y, X, R.converse(X, Y, a)), S.converse(Fo[X], Fo[Y], v)))
            for Q, b, w in list(out_of[Y]):
                todo.append(((X, Q, R.compose(X, Y, Q, a, b)), S.compose(Fo[X], Fo[Y], Fo[Q], v, w)))
            for P, b, w in list(into[X]):
                todo.append(((P, Y, R.compose(P, X, Y, b, a)), S.compose(Fo[P], Fo[X], Fo[Y], w, v)))
        return True

    def copy(state):
        L, out_of, into = state
        return dict(L), {k: list(v) for k, v in out_of.items()}, {k: list(v) for k, v in into.items()}

    start = ({}, {X: [] for X in objs}, {X: [] for X in objs})
    forced = [((X, X, R.identity(X)), S.identity(Fo[X])) for X in objs]
    forced += [((f.src, f.tgt, R.graph_value(f)), S.graph_value(e)) for f, e in Fa.items()]
    if not propagate(start, forced):
        return
    found = 0

    def rec(state):
        nonlocal found
        if limit is not None and found >= limit:
            return
        L = state[0]
        nxt = next((k for k in elems if k not in L), None)
        if nxt is None:
            found += 1
            yield L
            return
        X, Y, _ = nxt
        for v in S.fibre(Fo[X], Fo[Y]):
            st = copy(state)
            if propagate(st, [(nxt, v)]):
                yield from rec(st)

    yield from rec(start)


def enumerate_one_arrows(R: Doctrine, S: Doctrine, hom_cap=DEFAULT_MORPHISM_HOM_CAP, limit=None):
    """Every doctrine morphism R→S, by backtracking over object maps, functors and lifts.

    Refuses (CapExceeded) when a hom-set on either side has more than `hom_cap` arrows.
    """
    C, D = R.base, S.base
    _hom_lists(C, C.objects, hom_cap)
    _hom_lists(D, D.objects, hom_cap)
    found = 0
    for images in itertools.product(D.objects, repeat=len(C.objects)):
        Fo = dict(zip(C.objects, images))
        for Fa in enumerate_functors(C, D, Fo):
            for L in _lift_search(R, S, Fo, Fa):
                yield OneArrow(R, S, Fo.__getitem__, Fa.__getitem__,
                               lambda X, Y, a, L=L: L[(X, Y, a)])
                found += 1
                if limit is not None and found >= limit:
                    return


def compose_one_arrows(F: OneArrow, G: OneArrow) -> OneArrow:
    """F first, then G."""
    return OneArrow(F.source, G.target, lambda X: G.obj(F.obj(X)), lambda f: G.arr(F.arr(f)),
                    lambda X, Y, a: G.lift(F.obj(X), F.obj(Y), F.lift(X, Y, a)))


def same_one_arrow(F: OneArrow, G: OneArrow) -> bool:
    R = F.source
    C = R.base
    if any(F.obj(X) != G.obj(X) for X in C.objects):
        return False
    if any(F.arr(f) != G.arr(f) for f in C.arrows()):
        return False
    return all(F.lift(X, Y, a) == G.lift(X, Y, a)
               for X, Y in itertools.product(C.objects, repeat=2) for a in R.fibre(X, Y))
