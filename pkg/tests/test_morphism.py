import itertools

import pytest

import oracles as O

from reldoc import morphism
from reldoc.builtins import VRelDoctrine
from reldoc.completion import graph_functor
from reldoc.morphism import (OneArrow, check_equivalence, check_one_arrow, compose_one_arrows,
                             enumerate_functors, enumerate_one_arrows, same_one_arrow)
from reldoc.quantale import boolean, chain, powerset_frame
from reldoc.report import CapExceeded


def identity_arrow(R):
    return OneArrow(R, R, lambda X: X, lambda f: f, lambda X, Y, a: a)


def brute_functors(C, D, obj_map):
    arrows = list(C.arrows())
    choices = [D.hom(obj_map[f.src], obj_map[f.tgt]) for f in arrows]
    out = []
    for pick in itertools.product(*choices):
        F = dict(zip(arrows, pick))
        if any(F[C.identity(X)] != D.identity(obj_map[X]) for X in C.objects):
            continue
        if all(F[C.compose(f, g)] == D.compose(F[f], F[g]) for f in arrows for g in arrows if f.tgt == g.src):
            out.append(F)
    return out


@pytest.mark.parametrize("sizes", [[1, 2], [2], [2, 1]])
def test_functor_enumeration_matches_brute_force(sizes):
    C = VRelDoctrine(boolean(), sizes).base
    D = VRelDoctrine(boolean(), [1, 2, 2]).base
    for images in itertools.product(D.objects, repeat=len(C.objects)):
        obj_map = dict(zip(C.objects, images))
        found = list(enumerate_functors(C, D, obj_map))
        expect = brute_functors(C, D, obj_map)
        assert sorted(map(sorted_items, found)) == sorted(map(sorted_items, expect))


def sorted_items(F):
    return sorted((repr(k), repr(v)) for k, v in F.items())


def test_identity_is_an_equivalence():
    R = VRelDoctrine(chain(3), [1, 2])
    res = check_equivalence(identity_arrow(R))
    assert res["holds"] and not res["violations"]


def test_graph_functor_is_lawful():
    for q in (boolean(), powerset_frame(2)):
        R = VRelDoctrine(q, [1, 2])
        assert check_one_arrow(graph_functor(R)).ok


def corrupted(R, X, Y, victim, replacement):
    return OneArrow(R, R, lambda Z: Z, lambda f: f,
                    lambda A, B, a: replacement if (A, B, a) == (X, Y, victim) else a)


def test_corrupted_lift_is_caught_with_and_without_arrays(monkeypatch):
    R = VRelDoctrine(boolean(), [2, 2])
    F = R.fibre("X0", "X1")
    victim, replacement = F[5], F[9]
    fast = check_one_arrow(corrupted(R, "X0", "X1", victim, replacement))
    monkeypatch.setattr(morphism._Batched, "make", classmethod(lambda cls, *a: None))
    slow = check_one_arrow(corrupted(R, "X0", "X1", victim, replacement))
    assert not fast.ok
    key = lambda rep: sorted((v.law, repr(sorted(v.witness.items()))) for v in rep.violations)
    assert key(fast) == key(slow)
    assert {"lift preserves composition", "lift monotone"} <= set(fast.laws())


def subidentity_idempotents(n):
    # symmetric idempotent relations below the diagonal on an n-set
    out = 0
    for bits in itertools.product((0, 1), repeat=n * n):
        e = tuple(tuple(bits[i * n:(i + 1) * n]) for i in range(n))
        if (O.leq(O.BOOL, e, O.ident(O.BOOL, n)) and O.compose(O.BOOL, e, e) == e
                and O.converse(e, n, n) == e):
            out += 1
    return out


def test_enumerated_morphisms_are_lawful_and_compose():
    R = VRelDoctrine(boolean(), [1])
    S = VRelDoctrine(boolean(), [1, 2])
    Fs = list(enumerate_one_arrows(R, S))
    # the diagonal is forced, the empty relation may go to any symmetric idempotent below it
    assert len(Fs) == subidentity_idempotents(1) + subidentity_idempotents(2) == 6
    for F in Fs:
        assert check_one_arrow(F).ok
    Gs = list(enumerate_one_arrows(S, R))
    assert Gs
    for F, G in itertools.product(Fs, Gs):
        assert check_one_arrow(compose_one_arrows(F, G)).ok
    assert all(same_one_arrow(F, G) == (i == j) for i, F in enumerate(Fs) for j, G in enumerate(Fs))
    assert same_one_arrow(compose_one_arrows(identity_arrow(R), Fs[0]), Fs[0])


def test_enumeration_respects_hom_cap():
    R = VRelDoctrine(boolean(), [3])
    with pytest.raises(CapExceeded):
        list(enumerate_one_arrows(R, R, hom_cap=8))


def test_enumeration_limit():
    R = VRelDoctrine(boolean(), [1, 2])
    assert len(list(enumerate_one_arrows(R, R, limit=1))) == 1
