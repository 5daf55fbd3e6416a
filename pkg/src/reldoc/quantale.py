"""Finite commutative quantales.

Elements are stored by index; `names` carries the opaque identifiers used in
JSON.  Joins are a binary table, n-ary joins fold it from the bottom.
"""
from __future__ import annotations

import itertools
import re
from fractions import Fraction
from functools import reduce

import numpy as np

from .report import LawReport, PreconditionError, StructuralError


class Quantale:
    def __init__(self, names, leq, join, tensor, unit, bottom=None, top=None, kind=None):
        self.names = [str(n) for n in names]
        n = self.size = len(self.names)
        problems = []
        if n == 0:
            problems.append("carrier is empty")
        if len(set(self.names)) != n:
            problems.append("carrier names are not distinct")
        for label, table in (("leq", leq), ("join", join), ("tensor", tensor)):
            if len(table) != n or any(len(row) != n for row in table):
                problems.append(f"{label} table is not {n}x{n}")
        for label, table in (("join", join), ("tensor", tensor)):
            for i, row in enumerate(table):
                for j, v in enumerate(row):
                    if not isinstance(v, (int, np.integer)) or not 0 <= v < n:
                        problems.append(f"{label}[{i}][{j}] is not a carrier element")
        for label, v in (("unit", unit), ("bottom", bottom), ("top", top)):
            if v is not None and not (isinstance(v, (int, np.integer)) and 0 <= v < n):
                problems.append(f"{label} is not a carrier element")
        if problems:
            raise StructuralError(problems)
        self.leq_t = tuple(tuple(bool(x) for x in row) for row in leq)
        self.join_t = tuple(tuple(int(x) for x in row) for row in join)
        self.tensor_t = tuple(tuple(int(x) for x in row) for row in tensor)
        self.unit = int(unit)
        self.kind = kind
        self.bottom = int(bottom) if bottom is not None else self._extreme(low=True)
        self.top = int(top) if top is not None else self._extreme(low=False)
        self.leq_np = np.array(self.leq_t, dtype=bool).reshape(n, n)
        self.join_np = np.array(self.join_t, dtype=np.int16).reshape(n, n)
        self.tensor_np = np.array(self.tensor_t, dtype=np.int16).reshape(n, n)
        self.meet_t = self._meets()

    def _extreme(self, low):
        for a in range(self.size):
            if all((self.leq_t[a][b] if low else self.leq_t[b][a]) for b in range(self.size)):
                return a
        # fall back to the folded join; the law checker will flag it
        return 0 if low else reduce(lambda x, y: self.join_t[x][y], range(self.size))

    def _meets(self):
        n = self.size
        meet = [[0] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                lower = [c for c in range(n) if self.leq_t[c][a] and self.leq_t[c][b]]
                best = [c for c in lower if all(self.leq_t[d][c] for d in lower)]
                meet[a][b] = best[0] if best else self.bottom
        return tuple(tuple(r) for r in meet)

    # element-level operations
    def le(self, a, b):
        return self.leq_t[a][b]

    def join(self, a, b):
        return self.join_t[a][b]

    def meet(self, a, b):
        return self.meet_t[a][b]

    def tensor(self, a, b):
        return self.tensor_t[a][b]

    def join_all(self, elems):
        acc = self.bottom
        for e in elems:
            acc = self.join_t[acc][e]
        return acc

    def index(self, name):
        try:
            return self.names.index(str(name))
        except ValueError:
            raise StructuralError(f"{name!r} is not an element of the carrier") from None

    def downset(self, a):
        return [b for b in range(self.size) if self.leq_t[b][a]]

    def height(self):
        """Length of the longest strict chain."""
        order = sorted(range(self.size), key=lambda a: sum(self.leq_t[b][a] for b in range(self.size)))
        best = {}
        for a in order:
            below = [best[b] + 1 for b in best if b != a and self.leq_t[b][a]]
            best[a] = max(below, default=0)
        return max(best.values())

    def is_frame(self):
        return self.tensor_t == self.meet_t and self.unit == self.top

    def __eq__(self, other):
        return isinstance(other, Quantale) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash((tuple(self.names), self.tensor_t, self.unit))

    def __repr__(self):
        return f"Quantale({self.kind or self.names})"

    def to_json(self):
        nm = self.names
        return {
            "carrier": list(nm),
            "leq": [list(r) for r in self.leq_t],
            "join": [[nm[v] for v in r] for r in self.join_t],
            "tensor": [[nm[v] for v in r] for r in self.tensor_t],
            "unit": nm[self.unit],
        }

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            return parse_builtin(data)
        if not isinstance(data, dict):
            raise StructuralError("quantale must be a JSON object")
        if "kind" in data and "carrier" not in data:
            params = {k: v for k, v in data.items() if k != "kind"}
            return builtin_quantale(data["kind"], **params)
        missing = [k for k in ("carrier", "leq", "join", "tensor", "unit") if k not in data]
        if missing:
            raise StructuralError([f"missing key {k!r}" for k in missing])
        names = [str(c) for c in data["carrier"]]
        pos = {c: i for i, c in enumerate(names)}
        problems = []

        def lookup(v, where):
            if str(v) not in pos:
                problems.append(f"{where}: {v!r} is not a carrier element")
                return -1
            return pos[str(v)]

        def table(key, conv):
            rows = data[key]
            if not isinstance(rows, list) or len(rows) != len(names):
                problems.append(f"{key} must have {len(names)} rows")
                return [[0] * len(names) for _ in names]
            out = []
            for i, row in enumerate(rows):
                if not isinstance(row, list) or len(row) != len(names):
                    problems.append(f"{key}[{i}] must have {len(names)} entries")
                    out.append([0] * len(names))
                    continue
                out.append([conv(v, f"{key}[{i}][{j}]") for j, v in enumerate(row)])
            return out

        def as_bool(v, where):
            if isinstance(v, bool) or v in (0, 1):
                return bool(v)
            problems.append(f"{where}: {v!r} is not a boolean")
            return False

        leq = table("leq", as_bool)
        join = table("join", lookup)
        tensor = table("tensor", lookup)
        unit = lookup(data["unit"], "unit")
        bottom = lookup(data["bottom"], "bottom") if "bottom" in data else None
        top = lookup(data["top"], "top") if "top" in data else None
        if problems:
            raise StructuralError(problems)
        return cls(names, leq, join, tensor, unit, bottom=bottom, top=top)


def check_quantale_laws(q) -> LawReport:
    """Check every quantale axiom exhaustively; malformed input becomes structural errors."""
    report = LawReport()
    if isinstance(q, dict):
        try:
            q = Quantale.from_json(q)
        except StructuralError as e:
            report.structural.extend(e.problems)
            return report
    n = q.size
    E = range(n)
    le, jn, tn = q.leq_t, q.join_t, q.tensor_t
    nm = q.names
    for a in E:
        if not le[a][a]:
            report.add("leq reflexive", a=nm[a])
    for a, b in itertools.product(E, E):
        if a != b and le[a][b] and le[b][a]:
            report.add("leq antisymmetric", a=nm[a], b=nm[b])
    for a, b, c in itertools.product(E, E, E):
        if le[a][b] and le[b][c] and not le[a][c]:
            report.add("leq transitive", a=nm[a], b=nm[b], c=nm[c])
    for a in E:
        if not le[q.bottom][a]:
            report.add("bottom is least", bottom=nm[q.bottom], a=nm[a])
    for a, b in itertools.product(E, E):
        j = jn[a][b]
        if not (le[a][j] and le[b][j]):
            report.add("join is an upper bound", a=nm[a], b=nm[b], join=nm[j])
        for c in E:
            if le[a][c] and le[b][c] and not le[j][c]:
                report.add("join is least", a=nm[a], b=nm[b], join=nm[j], bound=nm[c])
        if le[a][b] != (j == b):
            report.add("join/leq coherence", a=nm[a], b=nm[b])
    if q.top != q.join_all(E):
        report.add("top is the join of everything", top=nm[q.top])
    for a, b in itertools.product(E, E):
        if tn[a][b] != tn[b][a]:
            report.add("tensor commutative", a=nm[a], b=nm[b])
    for a in E:
        if tn[a][q.unit] != a or tn[q.unit][a] != a:
            report.add("tensor unit", a=nm[a], unit=nm[q.unit])
    for a, b, c in itertools.product(E, E, E):
        if tn[tn[a][b]][c] != tn[a][tn[b][c]]:
            report.add("tensor associative", a=nm[a], b=nm[b], c=nm[c])
    # distributivity over every subset when feasible, otherwise over binary and empty joins
    if n <= 12:
        subsets = itertools.chain.from_iterable(itertools.combinations(E, k) for k in range(n + 1))
    else:
        subsets = itertools.chain([()], itertools.combinations(E, 2))
    for S in subsets:
        joined = q.join_all(S)
        for a in E:
            if tn[a][joined] != q.join_all(tn[a][s] for s in S):
                report.add("tensor distributes over joins", a=nm[a], subset=[nm[s] for s in S])
    report.coverage["quantale"] = {"mode": "exhaustive", "carrier": n}
    return report


def is_lean(q: Quantale):
    """Decide leanness of an affine quantale; returns (flag, witness pair or None)."""
    if q.unit != q.top:
        raise PreconditionError("leanness is only decided for affine quantales (unit = top)")
    for x, y in itertools.combinations(range(q.size), 2):
        if q.join(x, y) == q.top and q.meet(x, y) == q.bottom and q.top not in (x, y):
            return False, (q.names[x], q.names[y])
    return True, None


# builtins

def boolean() -> Quantale:
    return _frame(["0", "1"], [[1, 1], [0, 1]], unit=1, kind="boolean")


def chain(n) -> Quantale:
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"chain length must be a positive integer, got {n!r}")
    leq = [[i <= j for j in range(n)] for i in range(n)]
    return _frame([str(i) for i in range(n)], leq, unit=n - 1, kind=f"chain({n})")


def powerset_frame(n) -> Quantale:
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"powerset_frame needs a positive number of atoms, got {n!r}")
    if n > 8:
        raise ValueError("powerset_frame supports at most 8 atoms")
    atoms = "abcdefgh"[:n]
    names = ["{" + ",".join(atoms[i] for i in range(n) if m >> i & 1) + "}" for m in range(2 ** n)]
    leq = [[(a & b) == a for b in range(2 ** n)] for a in range(2 ** n)]
    return _frame(names, leq, unit=2 ** n - 1, kind=f"powerset_frame({n})")


def tropical_grid(step, cap) -> Quantale:
    step_f, cap_f = Fraction(str(step)), Fraction(str(cap))
    if step_f <= 0:
        raise ValueError("tropical_grid step must be positive")
    if cap_f < 0 or (cap_f / step_f).denominator != 1:
        raise ValueError("tropical_grid cap must be a non-negative multiple of step")
    k = int(cap_f / step_f)
    names = [_num(i * step_f) for i in range(k + 1)] + ["inf"]
    inf = k + 1
    # numeric value i*step; larger numbers sit lower in the order
    leq = [[a >= b for b in range(k + 2)] for a in range(k + 2)]
    join = [[min(a, b) for b in range(k + 2)] for a in range(k + 2)]
    tensor = [[a + b if a + b <= k else inf for b in range(k + 2)] for a in range(k + 2)]
    return Quantale(names, leq, join, tensor, unit=0, bottom=inf, top=0,
                    kind=f"tropical_grid({_num(step_f)},{_num(cap_f)})")


def _num(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else repr(float(x))


def _frame(names, leq, unit, kind):
    n = len(names)
    join = []
    for a in range(n):
        row = []
        for b in range(n):
            ups = [c for c in range(n) if leq[a][c] and leq[b][c]]
            row.append(next(c for c in ups if all(leq[c][d] for d in ups)))
        join.append(row)
    # build once for the meet table, then again with meet as tensor
    q = Quantale(names, leq, join, [[0] * n for _ in range(n)], unit, kind=kind)
    return Quantale(names, leq, join, [list(r) for r in q.meet_t], unit, kind=kind)


BUILTINS = {"boolean": boolean, "chain": chain, "powerset_frame": powerset_frame,
            "tropical_grid": tropical_grid}


def builtin_quantale(kind, *args, **params) -> Quantale:
    if kind not in BUILTINS:
        raise ValueError(f"unknown quantale kind {kind!r}; expected one of {sorted(BUILTINS)}")
    return BUILTINS[kind](*args, **params)


def parse_builtin(text: str) -> Quantale:
    """Parse shorthand such as ``boolean``, ``chain(3)`` or ``tropical_grid(1,2)``."""
    m = re.fullmatch(r"\s*(\w+)\s*(?:\((.*)\))?\s*", text)
    if not m:
        raise ValueError(f"cannot parse quantale {text!r}")
    args = []
    for a in (m.group(2) or "").split(","):
        a = a.strip()
        if a:
            args.append(int(a) if re.fullmatch(r"-?\d+", a) else float(a))
    return builtin_quantale(m.group(1), *args)
