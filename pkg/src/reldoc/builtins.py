"""Concrete doctrines: quantale-valued relations, V-categories with bimodules,
and bimodules between frame-valued categories with extents."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .category import DEFAULT_HOM_CAP, Arrow, FunctionCategory
from .doctrine import DEFAULT_FIBRE_CAP, MatrixDoctrine
from .quantale import Quantale
from .report import CapExceeded, PreconditionError, StructuralError


@dataclass(frozen=True)
class VCategory:
    """Points with quantale-valued distances (element indices); extents for the frame variant."""

    points: tuple
    dist: tuple
    extent: tuple | None = None

    @property
    def size(self):
        return len(self.points)

    @classmethod
    def from_json(cls, q: Quantale, data):
        try:
            points = tuple(str(p) for p in data["points"])
            dist = tuple(tuple(q.index(v) for v in row) for row in data["dist"])
            extent = tuple(q.index(v) for v in data["extent"]) if "extent" in data else None
        except (KeyError, TypeError) as e:
            raise StructuralError(f"malformed V-category: {e}") from None
        if len(dist) != len(points) or any(len(r) != len(points) for r in dist):
            raise StructuralError("dist must be a square table over the points")
        if extent is not None and len(extent) != len(points):
            raise StructuralError("extent must list one value per point")
        return cls(points, dist, extent)

    def to_json(self, q: Quantale):
        out = {"points": list(self.points), "dist": [[q.names[v] for v in r] for r in self.dist]}
        if self.extent is not None:
            out["extent"] = [q.names[v] for v in self.extent]
        return out


def check_vcategory(q: Quantale, cat: VCategory, with_extent=False):
    """List of violated V-category conditions (empty when valid)."""
    problems = []
    n, d, le = cat.size, cat.dist, q.le
    P = cat.points
    for x in range(n):
        if with_extent:
            if d[x][x] != cat.extent[x]:
                problems.append(f"distance of {P[x]} to itself differs from its extent")
        elif not le(q.unit, d[x][x]):
            problems.append(f"not reflexive at {P[x]}")
    for x, y in itertools.product(range(n), repeat=2):
        if d[x][y] != d[y][x]:
            problems.append(f"not symmetric at ({P[x]},{P[y]})")
        if with_extent and not le(d[x][y], q.meet(cat.extent[x], cat.extent[y])):
            problems.append(f"distance ({P[x]},{P[y]}) exceeds the meet of extents")
        if with_extent and x != y and d[x][y] == cat.extent[x] == cat.extent[y]:
            problems.append(f"not skeletal: {P[x]} and {P[y]} are indistinguishable")
    for x, y, z in itertools.product(range(n), repeat=3):
        if not le(q.tensor(d[x][y], d[y][z]), d[x][z]):
            problems.append(f"not transitive at ({P[x]},{P[y]},{P[z]})")
    return problems


def _nonexpanding_maps(q, cX: VCategory, cY: VCategory, keep_extent, cap):
    m, n = cX.size, cY.size
    dX, dY, le = cX.dist, cY.dist, q.le
    out, f = [], [0] * m

    def rec(i):
        if i == m:
            out.append(tuple(f))
            if len(out) > cap:
                raise CapExceeded("hom enumeration", len(out), cap)
            return
        for y in range(n):
            if keep_extent and cY.extent[y] != cX.extent[i]:
                continue
            if not le(dX[i][i], dY[y][y]):
                continue
            if all(le(dX[j][i], dY[f[j]][y]) and le(dX[i][j], dY[y][f[j]]) for j in range(i)):
                f[i] = y
                rec(i + 1)

    rec(0)
    return out


class BuiltinDoctrine(MatrixDoctrine):
    """Matrix doctrine remembering how it was built, so it can be emitted as a spec."""

    kind = None

    def spec(self):
        raise NotImplementedError

    def obj_label(self, X):
        return str(X)


class VRelDoctrine(BuiltinDoctrine):
    kind = "vrel"

    def __init__(self, q, carriers, include_all_functions=True, arrows=None,
                 cap=DEFAULT_FIBRE_CAP, hom_cap=DEFAULT_HOM_CAP, lazy=False):
        self.carriers = _carriers(carriers)
        self.include_all_functions = include_all_functions
        self.generators = list(arrows or [])
        sizes = {X: len(els) for X, els in self.carriers.items()}
        if include_all_functions:
            base = FunctionCategory(sizes, cap=hom_cap)
        else:
            base = _generated_category(sizes, self.generators, hom_cap)
        ident = {}
        for X, n in sizes.items():
            ident[X] = tuple(tuple(q.unit if i == j else q.bottom for j in range(n)) for i in range(n))
        super().__init__(q, base, ident, cap=cap)
        self.hom_cap, self.lazy = hom_cap, lazy
        if not lazy:
            for X, Y in itertools.product(sizes, repeat=2):
                bound = q.size ** (sizes[X] * sizes[Y])
                if bound > cap:
                    raise CapExceeded(f"fibre R({X},{Y})", bound, cap)

    def with_carrier(self, name, size):
        carriers = dict(self.carriers)
        carriers[name] = [str(i) for i in range(size)]
        return VRelDoctrine(self.q, carriers, self.include_all_functions, self.generators,
                            self.cap, self.hom_cap, self.lazy)

    def spec(self):
        out = {"builtin": "vrel", "quantale": self.q.to_json(),
               "carriers": {X: list(els) for X, els in self.carriers.items()},
               "include_all_functions": self.include_all_functions}
        if not self.include_all_functions:
            out["arrows"] = [{"src": s, "tgt": t, "map": list(m)} for s, t, m in self.generators]
        return out


class VCatDoctrine(BuiltinDoctrine):
    kind = "vcat"

    def __init__(self, q, cats, cap=DEFAULT_FIBRE_CAP, hom_cap=DEFAULT_HOM_CAP, with_extent=False):
        self.cats = dict(cats)
        self.with_extent = with_extent
        problems = []
        for name, c in self.cats.items():
            problems += [f"{name}: {p}" for p in check_vcategory(q, c, with_extent)]
        if problems:
            raise PreconditionError("; ".join(problems))
        sizes = {X: c.size for X, c in self.cats.items()}
        base = FunctionCategory(
            sizes, cap=hom_cap,
            hom_search=lambda X, Y: _nonexpanding_maps(q, self.cats[X], self.cats[Y], with_extent, hom_cap))
        ident = {X: c.dist for X, c in self.cats.items()}
        entries = self._entries_for(q) if with_extent else None
        super().__init__(q, base, ident, entries=entries, member=self._bimodules, cap=cap)
        self.hom_cap = hom_cap
        for X, Y in itertools.product(sizes, repeat=2):
            bound = self.fibre_bound(X, Y)
            if bound > cap:
                raise CapExceeded(f"fibre R({X},{Y})", bound, cap)

    def _entries_for(self, q):
        def entries(X, Y):
            eX, eY = self.cats[X].extent, self.cats[Y].extent
            return [q.downset(q.meet(a, b)) for a in eX for b in eY]
        return entries

    def _bimodules(self, X, Y, arr):
        dX = np.array(self.cats[X].dist, dtype=np.int16).reshape(self.size(X), self.size(X))
        dY = np.array(self.cats[Y].dist, dtype=np.int16).reshape(self.size(Y), self.size(Y))
        return self.bleq(self.bcompose(dX, arr), arr) & self.bleq(self.bcompose(arr, dY), arr)

    def with_category(self, name, cat):
        cats = dict(self.cats)
        cats[name] = cat
        return type(self)(self.q, cats, self.cap, self.hom_cap)

    def spec(self):
        return {"builtin": self.kind, "quantale": self.q.to_json(),
                "categories": {X: c.to_json(self.q) for X, c in self.cats.items()}}


class WaltersDoctrine(VCatDoctrine):
    kind = "walters"

    def __init__(self, h, cats, cap=DEFAULT_FIBRE_CAP, hom_cap=DEFAULT_HOM_CAP):
        if not h.is_frame():
            raise PreconditionError("the value lattice must be a frame: tensor is meet and unit is top")
        for name, c in cats.items():
            if c.extent is None:
                raise PreconditionError(f"{name}: points need extents")
        super().__init__(h, cats, cap, hom_cap, with_extent=True)


def make_vrel_doctrine(q: Quantale, carriers, include_all_functions=True, arrows=None,
                       cap=DEFAULT_FIBRE_CAP, hom_cap=DEFAULT_HOM_CAP) -> VRelDoctrine:
    """Sets and V-valued matrices.  Without `include_all_functions` the base is
    generated by `arrows`, given as (src, tgt, images) triples."""
    return VRelDoctrine(q, carriers, include_all_functions, arrows, cap, hom_cap)


def make_vcat_doctrine(q: Quantale, cats, cap=DEFAULT_FIBRE_CAP, hom_cap=DEFAULT_HOM_CAP) -> VCatDoctrine:
    return VCatDoctrine(q, _named(cats), cap, hom_cap)


def make_walters_doctrine(h: Quantale, cats, cap=DEFAULT_FIBRE_CAP, hom_cap=DEFAULT_HOM_CAP) -> WaltersDoctrine:
    return WaltersDoctrine(h, _named(cats), cap, hom_cap)


def walters_completion(h: Quantale, cat: VCategory):
    """The category of pairs (h, α) with α a left adjoint bimodule out of the
    one-point category of extent h; returns it with the inclusion of points."""
    n = cat.size
    e, d = cat.extent, cat.dist
    pairs = []
    for hv in range(h.size):
        cands = [h.downset(h.meet(hv, e[x])) for x in range(n)]
        for alpha in itertools.product(*cands):
            if h.join_all(alpha) != hv:
                continue
            if any(not h.le(h.meet(d[x][y], alpha[x]), alpha[y]) for x in range(n) for y in range(n)):
                continue
            if any(not h.le(h.meet(alpha[x], alpha[y]), d[x][y]) for x in range(n) for y in range(n)):
                continue
            pairs.append((hv, alpha))
    names = tuple(f"<{h.names[hv]}|{','.join(h.names[a] for a in alpha)}>" for hv, alpha in pairs)
    dist = tuple(tuple(h.join_all(h.meet(a, b) for a, b in zip(pa, pb)) for _, pb in pairs) for _, pa in pairs)
    extent = tuple(hv for hv, _ in pairs)
    unit = tuple(pairs.index((e[x], tuple(d[x]))) for x in range(n))
    return VCategory(names, dist, extent), unit


def _named(cats):
    if isinstance(cats, dict):
        return dict(cats)
    return {f"X{i}": c for i, c in enumerate(cats)}


def _carriers(carriers):
    if isinstance(carriers, dict):
        items = carriers.items()
    else:
        items = ((f"X{i}", c) for i, c in enumerate(carriers))
    out = {}
    for name, c in items:
        if "," in str(name):
            raise StructuralError(f"object name {name!r} may not contain a comma")
        if isinstance(c, int):
            if c < 0:
                raise ValueError("carrier sizes must be non-negative")
            out[str(name)] = [str(i) for i in range(c)]
        else:
            out[str(name)] = [str(x) for x in c]
    return out


def _generated_category(sizes, generators, cap):
    """The subcategory of maps generated by `generators` under composition."""
    homs = {(X, Y): set() for X in sizes for Y in sizes}
    for X in sizes:
        homs[(X, X)].add(tuple(range(sizes[X])))
    frontier = []
    for s, t, m in generators:
        m = tuple(m)
        if len(m) != sizes[s] or any(not 0 <= v < sizes[t] for v in m):
            raise StructuralError(f"generator {s}->{t} {list(m)} is not a map between the carriers")
        if m not in homs[(s, t)]:
            homs[(s, t)].add(m)
            frontier.append((s, t, m))
    total = sum(len(v) for v in homs.values())
    while frontier:
        s, t, m = frontier.pop()
        new = []
        for Z in sizes:
            for g in list(homs[(t, Z)]):
                new.append((s, Z, tuple(g[i] for i in m)))
            for f in list(homs[(Z, s)]):
                new.append((Z, t, tuple(m[i] for i in f)))
        for s2, t2, m2 in new:
            if m2 not in homs[(s2, t2)]:
                homs[(s2, t2)].add(m2)
                frontier.append((s2, t2, m2))
                total += 1
                if total > cap:
                    raise CapExceeded("generated category", total, cap)
    listed = {k: sorted(v) for k, v in homs.items()}
    return FunctionCategory(sizes, hom_search=lambda X, Y: listed[(X, Y)], cap=cap)


def doctrine_from_spec(spec, cap=DEFAULT_FIBRE_CAP, hom_cap=DEFAULT_HOM_CAP):
    """Build a builtin doctrine from its constructor spec."""
    kind = spec.get("builtin")
    if "quantale" not in spec:
        raise StructuralError("builtin spec needs a quantale")
    q = Quantale.from_json(spec["quantale"])
    if kind == "vrel":
        if "carriers" not in spec:
            raise StructuralError("vrel spec needs carriers")
        arrows = [(a["src"], a["tgt"], tuple(a["map"])) for a in spec.get("arrows", [])]
        return VRelDoctrine(q, spec["carriers"], spec.get("include_all_functions", True), arrows,
                            cap=cap, hom_cap=hom_cap)
    if kind in ("vcat", "walters"):
        if "categories" not in spec:
            raise StructuralError(f"{kind} spec needs categories")
        cats = {str(X): VCategory.from_json(q, c) for X, c in spec["categories"].items()}
        cls = VCatDoctrine if kind == "vcat" else WaltersDoctrine
        return cls(q, cats, cap=cap, hom_cap=hom_cap)
    raise StructuralError(f"unknown builtin doctrine kind {kind!r}")


def arrow(R, src, tgt, images):
    """Convenience constructor for an arrow of a builtin base."""
    f = Arrow(src, tgt, tuple(images))
    if not R.base.contains(f):
        raise ValueError(f"{list(images)} is not an arrow {src}->{tgt}")
    return f
