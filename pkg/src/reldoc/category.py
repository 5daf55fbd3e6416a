"""Finite base categories.

Arrows are `Arrow(src, tgt, data)` values.  What `data` holds depends on the
category: a tuple of images for categories of maps between finite carriers,
an identifier for tabulated categories, a relation value for Map(R).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable

from .report import CapExceeded, LawReport, StructuralError

DEFAULT_HOM_CAP = 1 << 20


@dataclass(frozen=True)
class Arrow:
    src: Hashable
    tgt: Hashable
    data: Hashable


class FiniteCategory:
    objects: list

    def hom(self, X, Y) -> list:
        raise NotImplementedError

    def compose(self, f: Arrow, g: Arrow) -> Arrow:
        """The composite g∘f (diagrammatic order: f first)."""
        raise NotImplementedError

    def identity(self, X) -> Arrow:
        raise NotImplementedError

    def label(self, f: Arrow) -> str:
        return f"{f.src}->{f.tgt}:{f.data}"

    def obj_label(self, X) -> str:
        return str(X)

    def contains(self, f: Arrow) -> bool:
        return f in self.hom(f.src, f.tgt)

    def arrows(self):
        for X in self.objects:
            for Y in self.objects:
                yield from self.hom(X, Y)

    def is_iso(self, f):
        return self.inverse(f) is not None

    def inverse(self, f):
        for g in self.hom(f.tgt, f.src):
            if self.compose(f, g) == self.identity(f.src) and self.compose(g, f) == self.identity(f.tgt):
                return g
        return None


class FunctionCategory(FiniteCategory):
    """Objects are finite carriers {0..n-1}; arrows are maps, optionally filtered.

    `hom_search(X, Y)` may supply a custom enumerator (e.g. a constraint search
    for structure-preserving maps); otherwise all maps are listed, lazily and
    subject to `cap`.
    """

    def __init__(self, sizes: dict, accept=None, hom_search=None, cap=DEFAULT_HOM_CAP):
        self.sizes = dict(sizes)
        self.objects = list(self.sizes)
        self.accept = accept
        self.hom_search = hom_search
        self.cap = cap
        self._homs = {}

    def size(self, X):
        return self.sizes[X]

    def hom_count_bound(self, X, Y):
        return self.sizes[Y] ** self.sizes[X]

    def hom(self, X, Y):
        key = (X, Y)
        if key not in self._homs:
            if self.hom_search is not None:
                maps = self.hom_search(X, Y)
            else:
                bound = self.hom_count_bound(X, Y)
                if bound > self.cap:
                    raise CapExceeded(f"hom({X},{Y})", bound, self.cap)
                maps = itertools.product(range(self.sizes[Y]), repeat=self.sizes[X])
                if self.accept is not None:
                    maps = (m for m in maps if self.accept(X, Y, m))
            self._homs[key] = [Arrow(X, Y, tuple(m)) for m in maps]
        return self._homs[key]

    def contains(self, f):
        if f.src not in self.sizes or f.tgt not in self.sizes:
            return False
        m = f.data
        if len(m) != self.sizes[f.src] or any(not 0 <= v < self.sizes[f.tgt] for v in m):
            return False
        if self.hom_search is not None or (f.src, f.tgt) in self._homs:
            return f in self.hom(f.src, f.tgt)
        return self.accept is None or self.accept(f.src, f.tgt, m)

    def compose(self, f, g):
        if f.tgt != g.src:
            raise ValueError(f"cannot compose {f} with {g}")
        return Arrow(f.src, g.tgt, tuple(g.data[i] for i in f.data))

    def identity(self, X):
        return Arrow(X, X, tuple(range(self.sizes[X])))

    def label(self, f):
        return f"{f.src}->{f.tgt}[{','.join(map(str, f.data))}]"

    def inverse(self, f):
        m = f.data
        if len(set(m)) != len(m) or len(m) != self.sizes[f.tgt]:
            return None
        inv = [0] * len(m)
        for i, v in enumerate(m):
            inv[v] = i
        g = Arrow(f.tgt, f.src, tuple(inv))
        return g if self.contains(g) else None


class TableCategory(FiniteCategory):
    """A category given by explicit tables of arrow identifiers."""

    def __init__(self, objects, arrows, compose, identity):
        self.objects = list(objects)
        problems = []
        self._arrow = {}
        self._homs = {(X, Y): [] for X in self.objects for Y in self.objects}
        for a in arrows:
            aid, s, t = a["id"], a["src"], a["tgt"]
            if aid in self._arrow:
                problems.append(f"duplicate arrow id {aid!r}")
            if s not in self.objects or t not in self.objects:
                problems.append(f"arrow {aid!r} has unknown endpoint")
                continue
            f = Arrow(s, t, aid)
            self._arrow[aid] = f
            self._homs[(s, t)].append(f)
        self._ident = {}
        for X in self.objects:
            if X not in identity:
                problems.append(f"missing identity for object {X!r}")
            elif identity[X] not in self._arrow:
                problems.append(f"identity of {X!r} is not a listed arrow")
            else:
                self._ident[X] = self._arrow[identity[X]]
        self._comp = {}
        for f_id, g_id, h_id in compose:
            if f_id not in self._arrow or g_id not in self._arrow or h_id not in self._arrow:
                problems.append(f"compose entry {[f_id, g_id, h_id]} names an unknown arrow")
                continue
            self._comp[(f_id, g_id)] = self._arrow[h_id]
        for f in self._arrow.values():
            for g in self._arrow.values():
                if g.src != f.tgt:
                    continue
                h = self._comp.get((f.data, g.data))
                if h is None:
                    problems.append(f"missing composite of {f.data!r} then {g.data!r}")
                elif (h.src, h.tgt) != (f.src, g.tgt):
                    problems.append(f"composite of {f.data!r} then {g.data!r} has wrong endpoints")
        if problems:
            raise StructuralError(problems)

    def arrow(self, aid):
        return self._arrow[aid]

    def hom(self, X, Y):
        return self._homs[(X, Y)]

    def compose(self, f, g):
        if f.tgt != g.src:
            raise ValueError(f"cannot compose {f.data} with {g.data}")
        return self._comp[(f.data, g.data)]

    def identity(self, X):
        return self._ident[X]

    def label(self, f):
        return str(f.data)


class OppositeCategory(FiniteCategory):
    """Arrows X→Y here wrap arrows Y→X of the underlying category."""

    def __init__(self, base: FiniteCategory):
        self.base = base
        self.objects = list(base.objects)

    def hom(self, X, Y):
        return [Arrow(X, Y, f) for f in self.base.hom(Y, X)]

    def compose(self, f, g):
        h = self.base.compose(g.data, f.data)
        return Arrow(f.src, g.tgt, h)

    def identity(self, X):
        return Arrow(X, X, self.base.identity(X))

    def label(self, f):
        return f"op({self.base.label(f.data)})"

    def contains(self, f):
        return isinstance(f.data, Arrow) and self.base.contains(f.data)


def hom_budget(C: FiniteCategory, X, Y, cap):
    """Size of hom(X,Y) if it can be listed within `cap`, else None."""
    if isinstance(C, FunctionCategory) and C.hom_search is None:
        if C.hom_count_bound(X, Y) > min(cap, C.cap):
            return None
    try:
        return len(C.hom(X, Y))
    except CapExceeded:
        return None


def check_category_laws(C: FiniteCategory, objects=None) -> LawReport:
    """Identity laws, closure and associativity over all composable triples."""
    report = LawReport()
    objs = list(C.objects if objects is None else objects)
    homs = {(X, Y): C.hom(X, Y) for X in objs for Y in objs}
    for X in objs:
        i = C.identity(X)
        if i not in homs[(X, X)]:
            report.add("identity is an arrow", object=C.obj_label(X))
        for Y in objs:
            for f in homs[(X, Y)]:
                if C.compose(C.identity(X), f) != f or C.compose(f, C.identity(Y)) != f:
                    report.add("identity law", arrow=C.label(f))
    for X, Y, Z in itertools.product(objs, repeat=3):
        for f in homs[(X, Y)]:
            for g in homs[(Y, Z)]:
                if C.compose(f, g) not in homs[(X, Z)]:
                    report.add("composition closed", f=C.label(f), g=C.label(g))
    n = 0
    for X, Y, Z, W in itertools.product(objs, repeat=4):
        for f in homs[(X, Y)]:
            for g in homs[(Y, Z)]:
                fg = C.compose(f, g)
                for h in homs[(Z, W)]:
                    n += 1
                    if C.compose(fg, h) != C.compose(f, C.compose(g, h)):
                        report.add("composition associative", f=C.label(f), g=C.label(g), h=C.label(h))
    report.coverage["category"] = {"mode": "exhaustive", "triples": n}
    return report



class FullSubcategory(FiniteCategory):
    def __init__(self, base: FiniteCategory, objects):
        self.base = base
        self.objects = [X for X in base.objects if X in set(objects)]

    def hom(self, X, Y):
        return self.base.hom(X, Y)

    def compose(self, f, g):
        return self.base.compose(f, g)

    def identity(self, X):
        return self.base.identity(X)

    def label(self, f):
        return self.base.label(f)

    def obj_label(self, X):
        return self.base.obj_label(X)

    def contains(self, f):
        return f.src in self.objects and f.tgt in self.objects and self.base.contains(f)

    def inverse(self, f):
        return self.base.inverse(f)
