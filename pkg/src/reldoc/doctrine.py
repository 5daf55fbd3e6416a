"""Finite relational doctrines.

A doctrine supplies, over a finite base category, a poset of relations for
each pair of objects together with identities, composition and converse.
Relations are plain hashable values; every operation is told the objects
involved.  Graphs of arrows are primitive and reindexing is derived from
them: ``R[f,g](α) = gr f ; α ; gr g°`` with left adjoint
``E[f,g](β) = gr f° ; β ; gr g``.
"""
from __future__ import annotations

import bisect
import itertools
import json
import math
import random
from dataclasses import dataclass
from typing import Hashable

import numpy as np

from .category import Arrow, FiniteCategory, OppositeCategory, TableCategory
from .quantale import Quantale
from .report import CapExceeded, LawReport, StructuralError

DEFAULT_FIBRE_CAP = 1 << 20
MAX_WITNESSES = 5
COMPOSE_MEMO_LIMIT = 1 << 20


@dataclass(frozen=True)
class Relation:
    src: Hashable
    tgt: Hashable
    value: Hashable


class Doctrine:
    """Interface shared by every presentation.

    Subclasses implement `fibre`, `leq`, `identity`, `compose`, `converse`
    and `graph_value`; the rest has generic defaults.
    """

    base: FiniteCategory
    cap: int = DEFAULT_FIBRE_CAP

    def fibre(self, X, Y) -> list:
        raise NotImplementedError

    def fibre_bound(self, X, Y):
        """Cheap upper bound on the fibre size, or None if unknown."""
        return None

    def leq(self, X, Y, a, b) -> bool:
        raise NotImplementedError

    def identity(self, X):
        raise NotImplementedError

    def compose(self, X, Y, Z, a, b):
        raise NotImplementedError

    def converse(self, X, Y, a):
        raise NotImplementedError

    def graph_value(self, f: Arrow):
        raise NotImplementedError

    # generic helpers

    def _cache(self, name):
        c = self.__dict__.get(name)
        if c is None:
            c = self.__dict__[name] = {}
        return c

    def position(self, X, Y):
        cache = self._cache("_positions")
        if (X, Y) not in cache:
            cache[(X, Y)] = {v: i for i, v in enumerate(self.fibre(X, Y))}
        return cache[(X, Y)]

    def contains(self, X, Y, a):
        return a in self.position(X, Y)

    def join(self, X, Y, a, b):
        F = self.fibre(X, Y)
        ups = [c for c in F if self.leq(X, Y, a, c) and self.leq(X, Y, b, c)]
        for c in ups:
            if all(self.leq(X, Y, c, u) for u in ups):
                return c
        raise ValueError("fibre has no join for this pair")

    def bottom(self, X, Y):
        F = self.fibre(X, Y)
        for c in F:
            if all(self.leq(X, Y, c, u) for u in F):
                return c
        raise ValueError("fibre has no least element")

    def meet(self, X, Y, a, b):
        F = self.fibre(X, Y)
        downs = [c for c in F if self.leq(X, Y, c, a) and self.leq(X, Y, c, b)]
        for c in downs:
            if all(self.leq(X, Y, u, c) for u in downs):
                return c
        raise ValueError("fibre has no meet for this pair")

    def top(self, X, Y):
        F = self.fibre(X, Y)
        for c in F:
            if all(self.leq(X, Y, u, c) for u in F):
                return c
        raise ValueError("fibre has no greatest element")

    def render(self, a) -> str:
        return a if isinstance(a, str) else json.dumps(a, separators=(",", ":"))

    def render_json(self, a):
        return self.render(a)

    def parse(self, X, Y, obj):
        """Read a relation of R(X,Y) from its JSON form."""
        for v in self.fibre(X, Y):
            if self.render(v) == obj or self.render_json(v) == obj:
                return v
        raise StructuralError(f"{obj!r} is not an element of R({X},{Y})")

    def flags(self, X, Y):
        """Functional/total/injective/surjective flags for every fibre element."""
        dX, dY = self.identity(X), self.identity(Y)
        out = {"functional": [], "total": [], "injective": [], "surjective": []}
        for a in self.fibre(X, Y):
            c = self.converse(X, Y, a)
            ca = self.compose(Y, X, Y, c, a)
            ac = self.compose(X, Y, X, a, c)
            out["functional"].append(self.leq(Y, Y, ca, dY))
            out["total"].append(self.leq(X, X, dX, ac))
            out["injective"].append(self.leq(X, X, ac, dX))
            out["surjective"].append(self.leq(Y, Y, dY, ca))
        return {k: np.array(v, dtype=bool) for k, v in out.items()}

    def matrix_backend(self):
        """The underlying matrix doctrine when fibres are quantale matrices with pointwise order."""
        return None

    def fibre_array(self, X, Y):
        return self.matrix_backend().to_array(self.fibre(X, Y), self.size(X), self.size(Y))

    def size(self, X):
        return self.matrix_backend().size(X)

    def obj_label(self, X):
        return self.base.obj_label(X)

    def extra_checks(self, report, budget, rng, exhaustive):
        """Hook for presentation-specific laws."""


# value-level derived operations

def reindex_value(R: Doctrine, f: Arrow, g: Arrow, a):
    A, X, B, Y = f.src, f.tgt, g.src, g.tgt
    left = R.compose(A, X, Y, R.graph_value(f), a)
    return R.compose(A, Y, B, left, R.converse(B, Y, R.graph_value(g)))


def ladj_value(R: Doctrine, f: Arrow, g: Arrow, b):
    A, X, B, Y = f.src, f.tgt, g.src, g.tgt
    left = R.compose(X, A, B, R.converse(A, X, R.graph_value(f)), b)
    return R.compose(X, B, Y, left, R.graph_value(g))


# relation-level API

def fibre(R: Doctrine, X, Y):
    return [Relation(X, Y, v) for v in R.fibre(X, Y)]


def identity(R: Doctrine, X) -> Relation:
    return Relation(X, X, R.identity(X))


def compose(R: Doctrine, a: Relation, b: Relation) -> Relation:
    if a.tgt != b.src:
        raise TypeError(f"cannot compose a relation into {a.tgt} with one out of {b.src}")
    return Relation(a.src, b.tgt, R.compose(a.src, a.tgt, b.tgt, a.value, b.value))


def converse(R: Doctrine, a: Relation) -> Relation:
    return Relation(a.tgt, a.src, R.converse(a.src, a.tgt, a.value))


def leq(R: Doctrine, a: Relation, b: Relation) -> bool:
    if (a.src, a.tgt) != (b.src, b.tgt):
        raise TypeError("relations live in different fibres")
    return R.leq(a.src, a.tgt, a.value, b.value)


def graph(R: Doctrine, f: Arrow) -> Relation:
    return Relation(f.src, f.tgt, R.graph_value(f))


def reindex(R: Doctrine, f: Arrow, g: Arrow, alpha: Relation) -> Relation:
    """R[f,g](α) for f: A→X, g: B→Y and α in R(X,Y)."""
    if (f.tgt, g.tgt) != (alpha.src, alpha.tgt):
        raise TypeError("arrow targets do not match the relation's fibre")
    return Relation(f.src, g.src, reindex_value(R, f, g, alpha.value))


def left_adjoint_reindex(R: Doctrine, f: Arrow, g: Arrow, beta: Relation) -> Relation:
    """E[f,g](β) for f: A→X, g: B→Y and β in R(A,B)."""
    if (f.src, g.src) != (beta.src, beta.tgt):
        raise TypeError("arrow sources do not match the relation's fibre")
    return Relation(f.tgt, g.tgt, ladj_value(R, f, g, beta.value))


def ext_equal(R: Doctrine, f: Arrow, g: Arrow) -> bool:
    if (f.src, f.tgt) != (g.src, g.tgt):
        raise TypeError("ext_equal needs parallel arrows")
    return R.graph_value(f) == R.graph_value(g)


def extensionality_witness(R: Doctrine, Y):
    """A pair of distinct parallel arrows into Y with equal graphs, or None."""
    for X in R.base.objects:
        seen = {}
        for f in R.base.hom(X, Y):
            key = R.graph_value(f)
            if key in seen and seen[key] != f:
                return seen[key], f
            seen.setdefault(key, f)
    return None


def is_extensional(R: Doctrine, Y) -> bool:
    return extensionality_witness(R, Y) is None


def is_extensional_doctrine(R: Doctrine) -> bool:
    return all(is_extensional(R, Y) for Y in R.base.objects)


# quantale-valued matrices

class MatrixDoctrine(Doctrine):
    """Fibres are (optionally filtered) quantale-valued matrices, ordered pointwise.

    `entries(X, Y)` may restrict the admissible values per entry (row-major
    list of candidate lists) and `member(X, Y, arr)` filters a stack of
    matrices; identities come from `ident`.
    """

    def __init__(self, q: Quantale, base, ident, entries=None, member=None, cap=DEFAULT_FIBRE_CAP):
        self.q = q
        self.base = base
        self.ident = ident
        self._entries = entries
        self._member = member
        self.cap = cap
        self._arrays = {}
        self._fibres = {}
        self._jt, self._tt, self._lq = q.join_t, q.tensor_t, q.leq_t
        self._bot = q.bottom

    def size(self, X):
        return self.base.size(X)

    def matrix_backend(self):
        return self

    def entry_candidates(self, X, Y):
        if self._entries is not None:
            return self._entries(X, Y)
        return [list(range(self.q.size))] * (self.size(X) * self.size(Y))

    def fibre_bound(self, X, Y):
        return math.prod(len(c) for c in self.entry_candidates(X, Y))

    def fibre_array(self, X, Y):
        key = (X, Y)
        if key not in self._arrays:
            m, n = self.size(X), self.size(Y)
            cands = self.entry_candidates(X, Y)
            total = math.prod(len(c) for c in cands)
            if total > self.cap:
                raise CapExceeded(f"fibre R({X},{Y})", total, self.cap)
            idx = np.arange(total, dtype=np.int64)
            cols = []
            for c in reversed(cands):
                cols.append(np.asarray(c, dtype=np.int16)[idx % len(c)])
                idx //= len(c)
            flat = np.stack(cols[::-1], axis=1) if cols else np.zeros((total, 0), dtype=np.int16)
            arr = flat.reshape(total, m, n)
            if self._member is not None and total:
                arr = arr[self._member(X, Y, arr)]
            self._arrays[key] = arr
        return self._arrays[key]

    def fibre(self, X, Y):
        key = (X, Y)
        if key not in self._fibres:
            self._fibres[key] = self.from_array(self.fibre_array(X, Y))
        return self._fibres[key]

    @staticmethod
    def from_array(arr):
        return [tuple(tuple(row) for row in mat) for mat in arr.tolist()]

    @staticmethod
    def to_array(values, m, n):
        return np.array(values, dtype=np.int16).reshape(len(values), m, n)

    def contains(self, X, Y, a):
        if self._member is None and self._entries is None:
            m, n = self.size(X), self.size(Y)
            return len(a) == m and all(len(r) == n and all(0 <= v < self.q.size for v in r) for r in a)
        return super().contains(X, Y, a)

    def leq(self, X, Y, a, b):
        lq = self._lq
        return all(lq[u][v] for ra, rb in zip(a, b) for u, v in zip(ra, rb))

    def identity(self, X):
        return self.ident[X]

    def compose(self, X, Y, Z, a, b):
        memo = self._cache("_compose_memo")
        key = (a, b, Z)
        hit = memo.get(key)
        if hit is not None:
            return hit
        val = self._compose(Z, a, b)
        if len(memo) < COMPOSE_MEMO_LIMIT:
            memo[key] = val
        return val

    def _compose(self, Z, a, b):
        jt, tt, bot = self._jt, self._tt, self._bot
        nz = self.size(Z)
        out = []
        for row in a:
            r = []
            for z in range(nz):
                acc = bot
                for y, v in enumerate(row):
                    acc = jt[acc][tt[v][b[y][z]]]
                r.append(acc)
            out.append(tuple(r))
        return tuple(out)

    def converse(self, X, Y, a):
        m, n = self.size(X), self.size(Y)
        return tuple(tuple(a[i][j] for i in range(m)) for j in range(n))

    def graph_value(self, f):
        dY = self.ident[f.tgt]
        return tuple(dY[y] for y in f.data)

    def join(self, X, Y, a, b):
        jt = self._jt
        return tuple(tuple(jt[u][v] for u, v in zip(ra, rb)) for ra, rb in zip(a, b))

    def bottom(self, X, Y):
        return tuple((self._bot,) * self.size(Y) for _ in range(self.size(X)))

    def render_json(self, a):
        nm = self.q.names
        return [[nm[v] for v in row] for row in a]

    def render(self, a):
        return json.dumps(self.render_json(a), separators=(",", ":"))

    def parse(self, X, Y, obj):
        if isinstance(obj, str) and not obj.startswith("["):
            return super().parse(X, Y, obj)
        if isinstance(obj, str):
            obj = json.loads(obj)
        m, n = self.size(X), self.size(Y)
        if not isinstance(obj, list) or len(obj) != m or any(not isinstance(r, list) or len(r) != n for r in obj):
            raise StructuralError(f"relation for R({X},{Y}) must be a {m}x{n} matrix")
        val = tuple(tuple(self.q.index(v) for v in row) for row in obj)
        if not self.contains(X, Y, val):
            raise StructuralError(f"matrix is not an element of R({X},{Y})")
        return val

    # batched operations over stacks of matrices

    def bcompose(self, A, B):
        A, B = np.asarray(A), np.asarray(B)
        k = A.shape[-1]
        if k == 0:
            shape = np.broadcast_shapes(A.shape[:-2], B.shape[:-2]) + (A.shape[-2], B.shape[-1])
            return np.full(shape, self._bot, dtype=np.int16)
        T = self.q.tensor_np[A[..., :, :, None], B[..., None, :, :]]
        acc = T[..., 0, :]
        for j in range(1, k):
            acc = self.q.join_np[acc, T[..., j, :]]
        return acc

    def bleq(self, A, B):
        return self.q.leq_np[np.asarray(A), np.asarray(B)].all(axis=(-2, -1))

    @staticmethod
    def bconv(A):
        return np.swapaxes(np.asarray(A), -1, -2)

    def flags(self, X, Y):
        return matrix_flags(self, self.fibre_array(X, Y), X, Y)


def matrix_flags(M: MatrixDoctrine, A, X, Y):
    dX = np.array(M.identity(X), dtype=np.int16).reshape(M.size(X), M.size(X))
    dY = np.array(M.identity(Y), dtype=np.int16).reshape(M.size(Y), M.size(Y))
    C = M.bconv(A)
    ca, ac = M.bcompose(C, A), M.bcompose(A, C)
    return {
        "functional": M.bleq(ca, dY),
        "total": M.bleq(dX, ac),
        "injective": M.bleq(ac, dX),
        "surjective": M.bleq(dY, ca),
    }


# wrappers

class OppositeDoctrine(Doctrine):
    """Opposite base, reversed fibre order, same relational operations."""

    def __init__(self, R: Doctrine):
        self.inner = R
        self.base = OppositeCategory(R.base)
        self.cap = R.cap

    def fibre(self, X, Y):
        return self.inner.fibre(X, Y)

    def fibre_bound(self, X, Y):
        return self.inner.fibre_bound(X, Y)

    def position(self, X, Y):
        return self.inner.position(X, Y)

    def leq(self, X, Y, a, b):
        return self.inner.leq(X, Y, b, a)

    def identity(self, X):
        return self.inner.identity(X)

    def compose(self, X, Y, Z, a, b):
        return self.inner.compose(X, Y, Z, a, b)

    def converse(self, X, Y, a):
        return self.inner.converse(X, Y, a)

    def graph_value(self, f):
        g = f.data  # g: Y→X underneath
        return self.inner.converse(g.src, g.tgt, self.inner.graph_value(g))

    def join(self, X, Y, a, b):
        return self.inner.meet(X, Y, a, b)

    def meet(self, X, Y, a, b):
        return self.inner.join(X, Y, a, b)

    def bottom(self, X, Y):
        return self.inner.top(X, Y)

    def top(self, X, Y):
        return self.inner.bottom(X, Y)

    def render(self, a):
        return self.inner.render(a)

    def render_json(self, a):
        return self.inner.render_json(a)

    def parse(self, X, Y, obj):
        return self.inner.parse(X, Y, obj)

    def flags(self, X, Y):
        # reversing the order swaps the four inequalities pairwise
        f = self.inner.flags(X, Y)
        return {"functional": f["surjective"], "total": f["injective"],
                "injective": f["total"], "surjective": f["functional"]}


def opposite(R: Doctrine) -> Doctrine:
    return OppositeDoctrine(R)


class PulledBackDoctrine(Doctrine):
    """Fibres of R along an object/arrow assignment, optionally restricted.

    Object A gets the fibres of R at `obj_map(A)`; an arrow h gets the graph
    of `arr_map(h)`.  `keep(A, B, value)` selects a sub-fibre.
    """

    def __init__(self, R: Doctrine, base, obj_map, arr_map, keep=None):
        self.inner = R
        self.base = base
        self.obj_map = obj_map
        self.arr_map = arr_map
        self.keep = keep
        self.cap = R.cap
        self._fibres = {}
        self._masks = {}

    def _mask(self, A, B):
        key = (A, B)
        if key not in self._masks:
            X, Y = self.obj_map(A), self.obj_map(B)
            vals = self.inner.fibre(X, Y)
            if self.keep is None:
                self._masks[key] = None
            else:
                self._masks[key] = np.array([bool(self.keep(A, B, v)) for v in vals], dtype=bool)
        return self._masks[key]

    def fibre(self, A, B):
        key = (A, B)
        if key not in self._fibres:
            vals = self.inner.fibre(self.obj_map(A), self.obj_map(B))
            mask = self._mask(A, B)
            self._fibres[key] = list(vals) if mask is None else [v for v, k in zip(vals, mask) if k]
        return self._fibres[key]

    def fibre_bound(self, A, B):
        return self.inner.fibre_bound(self.obj_map(A), self.obj_map(B))

    def leq(self, A, B, a, b):
        return self.inner.leq(self.obj_map(A), self.obj_map(B), a, b)

    def identity(self, A):
        return self.inner.identity(self.obj_map(A))

    def compose(self, A, B, C, a, b):
        return self.inner.compose(self.obj_map(A), self.obj_map(B), self.obj_map(C), a, b)

    def converse(self, A, B, a):
        return self.inner.converse(self.obj_map(A), self.obj_map(B), a)

    def graph_value(self, h):
        return self.inner.graph_value(self.arr_map(h))

    def join(self, A, B, a, b):
        if self.keep is None:
            return self.inner.join(self.obj_map(A), self.obj_map(B), a, b)
        return super().join(A, B, a, b)

    def bottom(self, A, B):
        if self.keep is None:
            return self.inner.bottom(self.obj_map(A), self.obj_map(B))
        return super().bottom(A, B)

    def render(self, a):
        return self.inner.render(a)

    def render_json(self, a):
        return self.inner.render_json(a)

    def parse(self, A, B, obj):
        v = self.inner.parse(self.obj_map(A), self.obj_map(B), obj)
        if not self.contains(A, B, v):
            raise StructuralError(f"relation is not in the restricted fibre ({A},{B})")
        return v

    def flags(self, A, B):
        f = self.inner.flags(self.obj_map(A), self.obj_map(B))
        mask = self._mask(A, B)
        return f if mask is None else {k: v[mask] for k, v in f.items()}

    def matrix_backend(self):
        return self.inner.matrix_backend()

    def fibre_array(self, A, B):
        arr = self.inner.fibre_array(self.obj_map(A), self.obj_map(B))
        mask = self._mask(A, B)
        return arr if mask is None else arr[mask]

    def size(self, A):
        return self.inner.size(self.obj_map(A))


# tabulated presentations

class TableDoctrine(Doctrine):
    """A doctrine read from explicit tables (see `from_json`)."""

    def __init__(self, base: TableCategory, elements, leq, d, comp, conv, graphs,
                 reindex_tables=None, quantale=None, values=None):
        self.base = base
        self.cap = DEFAULT_FIBRE_CAP
        self.elements = elements
        self._leq = leq
        self._d = d
        self._comp = comp
        self._conv = conv
        self._graph = graphs
        self.reindex_tables = reindex_tables or {}
        self.quantale = quantale
        self.values = values

    def fibre(self, X, Y):
        return self.elements[(X, Y)]

    def fibre_bound(self, X, Y):
        return len(self.elements[(X, Y)])

    def leq(self, X, Y, a, b):
        pos = self.position(X, Y)
        return self._leq[(X, Y)][pos[a]][pos[b]]

    def identity(self, X):
        return self._d[X]

    def compose(self, X, Y, Z, a, b):
        return self._comp[(X, Y, Z)][self.position(X, Y)[a]][self.position(Y, Z)[b]]

    def converse(self, X, Y, a):
        return self._conv[(X, Y)][self.position(X, Y)[a]]

    def graph_value(self, f):
        return self._graph[f.data]

    def render_json(self, a):
        return a

    def render(self, a):
        return a

    def extra_checks(self, report, budget, rng, exhaustive):
        objs = self.base.objects
        if self.values is not None and self.quantale is not None:
            lq = self.quantale.leq_t
            for X, Y in itertools.product(objs, repeat=2):
                F = self.fibre(X, Y)
                for a, b in itertools.product(F, F):
                    va, vb = self.values[(X, Y)][a], self.values[(X, Y)][b]
                    pointwise = all(lq[u][v] for ra, rb in zip(va, vb) for u, v in zip(ra, rb))
                    if pointwise != self.leq(X, Y, a, b):
                        report.add("fibre order is pointwise", fibre=f"{X},{Y}", a=a, b=b)
        for (fid, gid), table in self.reindex_tables.items():
            f, g = self.base.arrow(fid), self.base.arrow(gid)
            for a in self.fibre(f.tgt, g.tgt):
                if table[a] != reindex_value(self, f, g, a):
                    report.add("raw reindexing agrees with graphs", f=fid, g=gid, alpha=a)
            if (gid, fid) in self.reindex_tables:
                back = self.reindex_tables[(gid, fid)]
                for a in self.fibre(f.tgt, g.tgt):
                    lhs = self.converse(f.src, g.src, table[a])
                    rhs = back[self.converse(f.tgt, g.tgt, a)]
                    if lhs != rhs:
                        report.add("converse strictly natural", f=fid, g=gid, alpha=a)

    @classmethod
    def from_json(cls, data):
        problems = []
        try:
            b = data["base"]
            base = TableCategory([str(o) for o in b["objects"]], b["arrows"], b.get("compose", []),
                                 b["identity"])
        except StructuralError:
            raise
        except (KeyError, TypeError) as e:
            raise StructuralError(f"malformed base category: missing {e}") from None
        objs = base.objects
        fib = data.get("fibres", {})
        elements, leq = {}, {}
        quantale = Quantale.from_json(data["quantale"]) if "quantale" in data else None
        values = {} if quantale is not None else None
        for X, Y in itertools.product(objs, repeat=2):
            key = f"{X},{Y}"
            if key not in fib:
                problems.append(f"missing fibre {key}")
                continue
            els = [str(e) for e in fib[key].get("elements", [])]
            if len(set(els)) != len(els):
                problems.append(f"fibre {key} has duplicate elements")
            elements[(X, Y)] = els
            lq = fib[key].get("leq")
            if not isinstance(lq, list) or len(lq) != len(els) or any(len(r) != len(els) for r in lq):
                problems.append(f"fibre {key} leq table is not {len(els)}x{len(els)}")
            else:
                leq[(X, Y)] = [[bool(v) for v in r] for r in lq]
            if values is not None and "values" in fib[key]:
                vals = {}
                for e in els:
                    if e not in fib[key]["values"]:
                        problems.append(f"fibre {key} has no value for {e!r}")
                        continue
                    try:
                        vals[e] = tuple(tuple(quantale.index(v) for v in row) for row in fib[key]["values"][e])
                    except StructuralError as err:
                        problems.extend(err.problems)
                values[(X, Y)] = vals
        if values is not None and len(values) != len(elements):
            values = None
        if problems:
            raise StructuralError(problems)

        def member(X, Y, v, where):
            if v not in elements[(X, Y)]:
                problems.append(f"{where}: {v!r} is not an element of R({X},{Y})")
            return v

        d = {}
        for X in objs:
            if X not in data.get("d", {}):
                problems.append(f"missing d for {X}")
            else:
                d[X] = member(X, X, data["d"][X], f"d[{X}]")
        comp = {}
        for X, Y, Z in itertools.product(objs, repeat=3):
            key = f"{X},{Y},{Z}"
            tab = data.get("comp", {}).get(key)
            nx, ny = len(elements[(X, Y)]), len(elements[(Y, Z)])
            if tab is None:
                if nx and ny:
                    problems.append(f"missing comp table {key}")
                comp[(X, Y, Z)] = []
                continue
            if len(tab) != nx or any(len(r) != ny for r in tab):
                problems.append(f"comp table {key} is not {nx}x{ny}")
                continue
            comp[(X, Y, Z)] = [[member(X, Z, v, f"comp[{key}]") for v in r] for r in tab]
        conv = {}
        for X, Y in itertools.product(objs, repeat=2):
            key = f"{X},{Y}"
            tab = data.get("conv", {}).get(key)
            n = len(elements[(X, Y)])
            if tab is None or len(tab) != n:
                problems.append(f"missing or short conv table {key}")
                continue
            conv[(X, Y)] = [member(Y, X, v, f"conv[{key}]") for v in tab]
        raw = {}
        for entry in data.get("reindex", []):
            fid, gid = entry["f"], entry["g"]
            try:
                f, g = base.arrow(fid), base.arrow(gid)
            except KeyError:
                problems.append(f"reindex entry names unknown arrows {fid!r}, {gid!r}")
                continue
            src_els = elements[(f.tgt, g.tgt)]
            if len(entry["table"]) != len(src_els):
                problems.append(f"reindex table for {fid},{gid} has wrong length")
                continue
            raw[(fid, gid)] = {a: member(f.src, g.src, v, f"reindex[{fid},{gid}]")
                               for a, v in zip(src_els, entry["table"])}
        graphs = {}
        given = data.get("graph", {})
        for f in base.arrows():
            if f.data in given:
                graphs[f.data] = member(f.src, f.tgt, given[f.data], f"graph[{f.data}]")
            elif (f.data, base.identity(f.tgt).data) in raw and f.tgt in d:
                graphs[f.data] = raw[(f.data, base.identity(f.tgt).data)][d[f.tgt]]
            else:
                problems.append(f"missing graph for arrow {f.data!r}")
        if problems:
            raise StructuralError(problems)
        return cls(base, elements, leq, d, comp, conv, graphs, raw, quantale, values)


def tabulate(R: Doctrine, cap=DEFAULT_FIBRE_CAP) -> dict:
    """Full table presentation of R in the doctrine JSON format."""
    C = R.base
    objs = C.objects
    ol = {X: C.obj_label(X) for X in objs}
    arrows, compose_t, ident = [], [], {}
    homs = {(X, Y): C.hom(X, Y) for X in objs for Y in objs}
    for X, Y in itertools.product(objs, repeat=2):
        for f in homs[(X, Y)]:
            arrows.append({"id": C.label(f), "src": ol[X], "tgt": ol[Y]})
    for X, Y, Z in itertools.product(objs, repeat=3):
        for f in homs[(X, Y)]:
            for g in homs[(Y, Z)]:
                compose_t.append([C.label(f), C.label(g), C.label(C.compose(f, g))])
    for X in objs:
        ident[ol[X]] = C.label(C.identity(X))
    total = sum(R.fibre_bound(X, Y) or 0 for X in objs for Y in objs)
    if total > cap:
        raise CapExceeded("tabulated presentation", total, cap)
    M = R.matrix_backend()
    fibres = {}
    for X, Y in itertools.product(objs, repeat=2):
        F = R.fibre(X, Y)
        entry = {"elements": [R.render(a) for a in F],
                 "leq": [[R.leq(X, Y, a, b) for b in F] for a in F]}
        if M is not None and not isinstance(R, OppositeDoctrine):
            entry["values"] = {R.render(a): R.render_json(a) for a in F}
        fibres[f"{ol[X]},{ol[Y]}"] = entry
    comp = {}
    for X, Y, Z in itertools.product(objs, repeat=3):
        comp[f"{ol[X]},{ol[Y]},{ol[Z]}"] = [[R.render(R.compose(X, Y, Z, a, b)) for b in R.fibre(Y, Z)]
                                           for a in R.fibre(X, Y)]
    out = {
        "base": {"objects": [ol[X] for X in objs], "arrows": arrows, "compose": compose_t, "identity": ident},
        "fibres": fibres,
        "d": {ol[X]: R.render(R.identity(X)) for X in objs},
        "comp": comp,
        "conv": {f"{ol[X]},{ol[Y]}": [R.render(R.converse(X, Y, a)) for a in R.fibre(X, Y)]
                 for X, Y in itertools.product(objs, repeat=2)},
        "graph": {C.label(f): R.render(R.graph_value(f)) for X, Y in itertools.product(objs, repeat=2)
                  for f in homs[(X, Y)]},
    }
    if M is not None and not isinstance(R, OppositeDoctrine):
        out["quantale"] = M.q.to_json()
    return out


def canonical_form(R: Doctrine):
    """Presentation data with arrows replaced by their positions in hom lists."""
    C = R.base
    objs = C.objects
    homs = {(X, Y): C.hom(X, Y) for X in objs for Y in objs}
    pos = {(X, Y): {f: i for i, f in enumerate(homs[(X, Y)])} for X in objs for Y in objs}
    parts = [tuple(C.obj_label(X) for X in objs)]
    for X, Y in itertools.product(objs, repeat=2):
        F = R.fibre(X, Y)
        parts.append((len(homs[(X, Y)]), tuple(R.render(a) for a in F),
                      tuple(tuple(R.leq(X, Y, a, b) for b in F) for a in F),
                      tuple(R.render(R.converse(X, Y, a)) for a in F),
                      tuple(R.render(R.graph_value(f)) for f in homs[(X, Y)])))
    for X in objs:
        parts.append((pos[(X, X)][C.identity(X)], R.render(R.identity(X))))
    for X, Y, Z in itertools.product(objs, repeat=3):
        parts.append(tuple(pos[(X, Z)][C.compose(f, g)] for f in homs[(X, Y)] for g in homs[(Y, Z)]))
        parts.append(tuple(R.render(R.compose(X, Y, Z, a, b)) for a in R.fibre(X, Y) for b in R.fibre(Y, Z)))
    return tuple(parts)


def structurally_equal(R: Doctrine, S: Doctrine) -> bool:
    return canonical_form(R) == canonical_form(S)


# law checking

class _Sampler:
    """Runs a law over a union of product spaces, exhaustively or by seeded sampling."""

    def __init__(self, report, budget, rng, exhaustive):
        self.report, self.budget, self.rng, self.exhaustive = report, budget, rng, exhaustive

    def run(self, law, blocks, test):
        blocks = [(ctx, lists) for ctx, lists in blocks if all(len(l) for l in lists)]
        sizes = [math.prod(len(l) for l in lists) for _, lists in blocks]
        total = sum(sizes)
        failures = 0
        if self.exhaustive or total <= self.budget:
            mode, checked = "exhaustive", total
            it = ((ctx, items) for ctx, lists in blocks for items in itertools.product(*lists))
        else:
            mode, checked = "sampled", self.budget
            it = self._sample(blocks, sizes, total)
        for ctx, items in it:
            w = test(ctx, *items)
            if w is not None:
                failures += 1
                if failures <= MAX_WITNESSES:
                    self.report.add(law, **w)
        self.report.coverage[law] = {"mode": mode, "checked": checked, "total": total}

    def _sample(self, blocks, sizes, total):
        cum = list(itertools.accumulate(sizes))
        for _ in range(self.budget):
            r = self.rng.randrange(total)
            b = bisect.bisect_right(cum, r)
            r -= cum[b - 1] if b else 0
            ctx, lists = blocks[b]
            items = []
            for l in reversed(lists):
                r, i = divmod(r, len(l))
                items.append(l[i])
            yield ctx, tuple(reversed(items))


def _tables(R: Doctrine, report):
    """Enumerate fibres and homs that fit the caps; note the rest as skipped."""
    objs = R.base.objects
    F, H = {}, {}
    for X, Y in itertools.product(objs, repeat=2):
        try:
            F[(X, Y)] = R.fibre(X, Y)
        except CapExceeded as e:
            report.skipped.append(f"fibre {R.obj_label(X)},{R.obj_label(Y)}: {e}")
            F[(X, Y)] = []
        try:
            H[(X, Y)] = R.base.hom(X, Y)
        except CapExceeded as e:
            report.skipped.append(f"hom {R.obj_label(X)},{R.obj_label(Y)}: {e}")
            H[(X, Y)] = []
    return F, H


def check_doctrine_laws(R: Doctrine, budget=20000, seed=0, exhaustive=False) -> LawReport:
    """Check every doctrine axiom; each law runs exhaustively when its tuple space fits `budget`."""
    report = LawReport()
    rng = random.Random(seed)
    S = _Sampler(report, budget, rng, exhaustive)
    objs = R.base.objects
    F, H = _tables(R, report)
    P = itertools.product
    lab, ol = R.render, R.obj_label
    C = R.base

    def fib(*objects):
        return ",".join(ol(o) for o in objects)

    # fibres are posets
    for X, Y in P(objs, repeat=2):
        for a in F[(X, Y)]:
            if not R.leq(X, Y, a, a):
                report.add("fibre order reflexive", fibre=fib(X, Y), a=lab(a))
    S.run("fibre order antisymmetric", [((X, Y), [F[(X, Y)], F[(X, Y)]]) for X, Y in P(objs, repeat=2)],
          lambda c, a, b: None if a == b or not (R.leq(*c, a, b) and R.leq(*c, b, a))
          else {"fibre": fib(*c), "a": lab(a), "b": lab(b)})
    S.run("fibre order transitive", [((X, Y), [F[(X, Y)]] * 3) for X, Y in P(objs, repeat=2)],
          lambda c, a, b, e: None if not (R.leq(*c, a, b) and R.leq(*c, b, e)) or R.leq(*c, a, e)
          else {"fibre": fib(*c), "a": lab(a), "b": lab(b), "c": lab(e)})

    # closure of the operations
    S.run("identity lies in its fibre", [((X,), []) for X in objs],
          lambda c: None if R.contains(c[0], c[0], R.identity(c[0])) else {"object": ol(c[0])})
    S.run("composition lies in the fibre", [((X, Y, Z), [F[(X, Y)], F[(Y, Z)]]) for X, Y, Z in P(objs, repeat=3)],
          lambda c, a, b: None if R.contains(c[0], c[2], R.compose(*c, a, b))
          else {"fibres": fib(*c), "alpha": lab(a), "beta": lab(b)})
    S.run("converse lies in the fibre", [((X, Y), [F[(X, Y)]]) for X, Y in P(objs, repeat=2)],
          lambda c, a: None if R.contains(c[1], c[0], R.converse(*c, a))
          else {"fibre": fib(*c), "alpha": lab(a)})
    S.run("graph lies in the fibre", [((X, Y), [H[(X, Y)]]) for X, Y in P(objs, repeat=2)],
          lambda c, f: None if R.contains(c[0], c[1], R.graph_value(f)) else {"arrow": C.label(f)})

    # the six equations
    def assoc(c, a, b, e):
        X, Y, Z, W = c
        lhs = R.compose(X, Z, W, R.compose(X, Y, Z, a, b), e)
        rhs = R.compose(X, Y, W, a, R.compose(Y, Z, W, b, e))
        return None if lhs == rhs else {"fibres": fib(*c), "alpha": lab(a), "beta": lab(b), "gamma": lab(e)}

    S.run("associativity", [((X, Y, Z, W), [F[(X, Y)], F[(Y, Z)], F[(Z, W)]]) for X, Y, Z, W in P(objs, repeat=4)],
          assoc)
    S.run("d;α = α", [((X, Y), [F[(X, Y)]]) for X, Y in P(objs, repeat=2)],
          lambda c, a: None if R.compose(c[0], c[0], c[1], R.identity(c[0]), a) == a
          else {"fibre": fib(*c), "alpha": lab(a)})
    S.run("α;d = α", [((X, Y), [F[(X, Y)]]) for X, Y in P(objs, repeat=2)],
          lambda c, a: None if R.compose(c[0], c[1], c[1], a, R.identity(c[1])) == a
          else {"fibre": fib(*c), "alpha": lab(a)})

    def conv_comp(c, a, b):
        X, Y, Z = c
        lhs = R.converse(X, Z, R.compose(X, Y, Z, a, b))
        rhs = R.compose(Z, Y, X, R.converse(Y, Z, b), R.converse(X, Y, a))
        return None if lhs == rhs else {"fibres": fib(*c), "alpha": lab(a), "beta": lab(b)}

    S.run("(α;β)° = β°;α°", [((X, Y, Z), [F[(X, Y)], F[(Y, Z)]]) for X, Y, Z in P(objs, repeat=3)], conv_comp)
    S.run("d° = d", [((X,), []) for X in objs],
          lambda c: None if R.converse(c[0], c[0], R.identity(c[0])) == R.identity(c[0]) else {"object": ol(c[0])})
    S.run("α°° = α", [((X, Y), [F[(X, Y)]]) for X, Y in P(objs, repeat=2)],
          lambda c, a: None if R.converse(c[1], c[0], R.converse(*c, a)) == a
          else {"fibre": fib(*c), "alpha": lab(a)})

    # monotonicity
    def mono_left(c, a, a2, b):
        X, Y, Z = c
        if not R.leq(X, Y, a, a2) or R.leq(X, Z, R.compose(X, Y, Z, a, b), R.compose(X, Y, Z, a2, b)):
            return None
        return {"fibres": fib(*c), "alpha": lab(a), "alpha2": lab(a2), "beta": lab(b)}

    def mono_right(c, a, b, b2):
        X, Y, Z = c
        if not R.leq(Y, Z, b, b2) or R.leq(X, Z, R.compose(X, Y, Z, a, b), R.compose(X, Y, Z, a, b2)):
            return None
        return {"fibres": fib(*c), "alpha": lab(a), "beta": lab(b), "beta2": lab(b2)}

    triples = list(P(objs, repeat=3))
    S.run("composition monotone (left)", [(c, [F[c[:2]], F[c[:2]], F[c[1:]]]) for c in triples], mono_left)
    S.run("composition monotone (right)", [(c, [F[c[:2]], F[c[1:]], F[c[1:]]]) for c in triples], mono_right)
    S.run("converse monotone", [((X, Y), [F[(X, Y)], F[(X, Y)]]) for X, Y in P(objs, repeat=2)],
          lambda c, a, b: None if not R.leq(*c, a, b) or R.leq(c[1], c[0], R.converse(*c, a), R.converse(*c, b))
          else {"fibre": fib(*c), "alpha": lab(a), "beta": lab(b)})

    # lax naturality through derived reindexing
    S.run("d ⊑ R[f,f](d)", [((X, Y), [H[(X, Y)]]) for X, Y in P(objs, repeat=2)],
          lambda c, f: None if R.leq(c[0], c[0], R.identity(c[0]), reindex_value(R, f, f, R.identity(c[1])))
          else {"arrow": C.label(f)})

    def lax_comp(c, f, g, h, a, b):
        X, Y, Z, A, B, Cc = c
        lhs = R.compose(X, Y, Z, reindex_value(R, f, g, a), reindex_value(R, g, h, b))
        rhs = reindex_value(R, f, h, R.compose(A, B, Cc, a, b))
        return None if R.leq(X, Z, lhs, rhs) else {
            "f": C.label(f), "g": C.label(g), "h": C.label(h), "alpha": lab(a), "beta": lab(b)}

    S.run("R[f,g]α;R[g,h]β ⊑ R[f,h](α;β)",
          [((X, Y, Z, A, B, Cc), [H[(X, A)], H[(Y, B)], H[(Z, Cc)], F[(A, B)], F[(B, Cc)]])
           for X, Y, Z, A, B, Cc in P(objs, repeat=6)], lax_comp)

    def lax_conv(c, f, g, a):
        X, Y, A, B = c
        lhs = R.converse(X, Y, reindex_value(R, f, g, a))
        rhs = reindex_value(R, g, f, R.converse(A, B, a))
        return None if R.leq(Y, X, lhs, rhs) else {"f": C.label(f), "g": C.label(g), "alpha": lab(a)}

    S.run("(R[f,g]α)° ⊑ R[g,f](α°)",
          [((X, Y, A, B), [H[(X, A)], H[(Y, B)], F[(A, B)]]) for X, Y, A, B in P(objs, repeat=4)], lax_conv)

    # graphs and reindexing
    S.run("gr(id) = d", [((X,), []) for X in objs],
          lambda c: None if R.graph_value(C.identity(c[0])) == R.identity(c[0]) else {"object": ol(c[0])})
    S.run("gr(g∘f) = gr f;gr g", [((X, Y, Z), [H[(X, Y)], H[(Y, Z)]]) for X, Y, Z in triples],
          lambda c, f, g: _graph_comp_witness(R, f, g))

    def functorial(c, f, f2, g, g2, a):
        lhs = reindex_value(R, C.compose(f, f2), C.compose(g, g2), a)
        rhs = reindex_value(R, f, g, reindex_value(R, f2, g2, a))
        return None if lhs == rhs else {"f": C.label(f), "f2": C.label(f2), "g": C.label(g),
                                        "g2": C.label(g2), "alpha": lab(a)}

    S.run("reindexing functorial",
          [((A, X, X2, B, Y, Y2), [H[(A, X)], H[(X, X2)], H[(B, Y)], H[(Y, Y2)], F[(X2, Y2)]])
           for A, X, X2, B, Y, Y2 in P(objs, repeat=6)], functorial)

    def unit(c, f, g, b):
        A, X, B, Y = c
        back = reindex_value(R, f, g, ladj_value(R, f, g, b))
        return None if R.leq(A, B, b, back) else {"f": C.label(f), "g": C.label(g), "beta": lab(b)}

    def counit(c, f, g, a):
        A, X, B, Y = c
        there = ladj_value(R, f, g, reindex_value(R, f, g, a))
        return None if R.leq(X, Y, there, a) else {"f": C.label(f), "g": C.label(g), "alpha": lab(a)}

    quads = list(P(objs, repeat=4))
    S.run("adjunction unit β ⊑ R[f,g]E[f,g]β",
          [((A, X, B, Y), [H[(A, X)], H[(B, Y)], F[(A, B)]]) for A, X, B, Y in quads], unit)
    S.run("adjunction counit E[f,g]R[f,g]α ⊑ α",
          [((A, X, B, Y), [H[(A, X)], H[(B, Y)], F[(X, Y)]]) for A, X, B, Y in quads], counit)

    R.extra_checks(report, budget, rng, exhaustive)
    return report


def _graph_comp_witness(R, f, g):
    lhs = R.graph_value(R.base.compose(f, g))
    rhs = R.compose(f.src, f.tgt, g.tgt, R.graph_value(f), R.graph_value(g))
    return None if lhs == rhs else {"f": R.base.label(f), "g": R.base.label(g)}


def check_graph_functoriality(R: Doctrine) -> LawReport:
    """gr(id) = d and gr(g∘f) = gr f ; gr g over every composable pair."""
    report = LawReport()
    objs = R.base.objects
    n = 0
    for X in objs:
        if R.graph_value(R.base.identity(X)) != R.identity(X):
            report.add("gr(id) = d", object=R.obj_label(X))
    for X, Y, Z in itertools.product(objs, repeat=3):
        for f in R.base.hom(X, Y):
            for g in R.base.hom(Y, Z):
                n += 1
                w = _graph_comp_witness(R, f, g)
                if w:
                    report.add("gr(g∘f) = gr f;gr g", **w)
    report.coverage["graph functoriality"] = {"mode": "exhaustive", "checked": n, "total": n}
    return report


def check_reindex_adjunction(R: Doctrine) -> LawReport:
    """E[f,g] ⊣ R[f,g] for every pair of arrows, checked on every relation.

    Both maps are monotone, so the adjunction is equivalent to the unit and
    counit inequalities holding for every element.
    """
    report = LawReport()
    objs = R.base.objects
    M = R.matrix_backend()
    n = 0
    for A, X, B, Y in itertools.product(objs, repeat=4):
        fs, gs = R.base.hom(A, X), R.base.hom(B, Y)
        if not fs or not gs:
            continue
        FAB, FXY = R.fibre(A, B), R.fibre(X, Y)
        if M is not None:
            arrAB, arrXY = R.fibre_array(A, B), R.fibre_array(X, Y)
        for f in fs:
            for g in gs:
                n += len(FAB) + len(FXY)
                if M is not None:
                    bad_u, bad_c = _batched_adjunction(R, M, f, g, arrAB, arrXY)
                    bad_u = [FAB[i] for i in bad_u]
                    bad_c = [FXY[i] for i in bad_c]
                else:
                    bad_u = [b for b in FAB if not R.leq(A, B, b, reindex_value(R, f, g, ladj_value(R, f, g, b)))]
                    bad_c = [a for a in FXY if not R.leq(X, Y, ladj_value(R, f, g, reindex_value(R, f, g, a)), a)]
                for b in bad_u[:MAX_WITNESSES]:
                    report.add("adjunction unit", f=R.base.label(f), g=R.base.label(g), beta=R.render(b))
                for a in bad_c[:MAX_WITNESSES]:
                    report.add("adjunction counit", f=R.base.label(f), g=R.base.label(g), alpha=R.render(a))
    report.coverage["reindex adjunction"] = {"mode": "exhaustive", "checked": n, "total": n}
    return report


def _batched_adjunction(R, M, f, g, arrAB, arrXY):
    gf = np.array(R.graph_value(f), dtype=np.int16).reshape(R.size(f.src), R.size(f.tgt))
    gg = np.array(R.graph_value(g), dtype=np.int16).reshape(R.size(g.src), R.size(g.tgt))

    def re(A):
        return M.bcompose(M.bcompose(gf, A), gg.T)

    def ex(B):
        return M.bcompose(M.bcompose(gf.T, B), gg)

    bad_u = np.nonzero(~M.bleq(arrAB, re(ex(arrAB))))[0] if len(arrAB) else []
    bad_c = np.nonzero(~M.bleq(ex(re(arrXY)), arrXY))[0] if len(arrXY) else []
    return list(bad_u), list(bad_c)
