import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from reldoc.builtins import VCatDoctrine, VCategory, VRelDoctrine, arrow
from reldoc.doctrine import Relation
from reldoc.quantale import boolean, chain, powerset_frame, tropical_grid
from reldoc.relprops import (bijective_implies_iso_check, bijective_relations, check_arrow_characterizations,
                             check_discreteness, check_sruc_iff_ruc_and_extensional, find_ruc_counterexample,
                             functional_total, is_bijective, is_cauchy_complete, profile, tracking_arrows)

# brute-force oracle values: functional total relations 1→2 in powerset-frame relations,
# and those that are not graphs
PF2_FT_1_2 = 4
PF2_UNTRACKED_1_2 = [(("{a}", "{b}"),), (("{b}", "{a}"),)]
PF2_FT_2_2, PF2_UNTRACKED_2_2 = 16, 12


def test_frozen_values_match_oracle():
    un, total = O.untracked_functional_total(O.POWERSET2, 1, 2)
    names = ["{}", "{a}", "{b}", "{a,b}"]
    assert total == PF2_FT_1_2
    assert sorted(tuple(tuple(names[v] for v in r) for r in a) for a in un) == PF2_UNTRACKED_1_2
    un, total = O.untracked_functional_total(O.POWERSET2, 2, 2)
    assert (total, len(un)) == (PF2_FT_2_2, PF2_UNTRACKED_2_2)


def test_powerset_frame_functional_total_counts():
    R = VRelDoctrine(powerset_frame(2), [1, 2])
    ft = functional_total(R, "X0", "X1")
    assert len(ft) == PF2_FT_1_2
    untracked = sorted(tuple(tuple(R.q.names[v] for v in r) for r in a)
                       for a in ft if not tracking_arrows(R, "X0", "X1", a))
    assert untracked == PF2_UNTRACKED_1_2
    assert len(functional_total(R, "X1", "X1")) == PF2_FT_2_2
    assert sum(not tracking_arrows(R, "X1", "X1", a) for a in functional_total(R, "X1", "X1")) == PF2_UNTRACKED_2_2


def test_powerset_frame_counterexample():
    R = VRelDoctrine(powerset_frame(2), [1, 2])
    Y, w = find_ruc_counterexample(R)
    assert Y == "X1" and R.size(Y) == 2
    assert tuple(tuple(R.q.names[v] for v in r) for r in w.value) in PF2_UNTRACKED_1_2
    assert not tracking_arrows(R, w.src, w.tgt, w.value)


@pytest.mark.parametrize("q", [boolean(), chain(2), chain(3)], ids=repr)
def test_lean_quantales_are_cauchy_complete(q):
    R = VRelDoctrine(q, [1, 2, 3])
    for Y in R.base.objects:
        assert is_cauchy_complete(R, Y, strong=True)
    assert find_ruc_counterexample(R) is None


def test_profile_flags_and_tracking():
    R = VRelDoctrine(boolean(), [2, 2])
    swap = R.graph_value(arrow(R, "X0", "X1", [1, 0]))
    p = profile(R, Relation("X0", "X1", swap))
    assert p.bijective and [f.data for f in p.tracking] == [(1, 0)]
    full = ((1, 1), (1, 1))
    p = profile(R, Relation("X0", "X1", full))
    assert p.total and p.surjective and not p.functional and not p.injective and not p.tracking


def test_bijective_relations_are_permutation_graphs_in_rel():
    R = VRelDoctrine(boolean(), [3])
    bij = bijective_relations(R, "X0", "X0")
    assert len(bij) == 6


def test_discreteness_and_characterizations_on_several_quantales():
    for q in (boolean(), chain(3), powerset_frame(2), tropical_grid(1, 2)):
        R = VRelDoctrine(q, [1, 2])
        assert check_discreteness(R).ok
        assert check_arrow_characterizations(R).ok


def test_characterizations_on_vcat():
    q = tropical_grid(1, 2)
    pts = VCategory(("a", "b"), ((0, 1), (1, 0)))
    one = VCategory(("p",), ((0,),))
    R = VCatDoctrine(q, {"P": one, "L": pts})
    assert check_arrow_characterizations(R).ok
    assert check_discreteness(R).ok


def test_sruc_iff_ruc_and_extensional():
    q = tropical_grid(1, 2)
    twins = VCategory(("a", "b"), ((0, 0), (0, 0)))
    R = VCatDoctrine(q, {"P": VCategory(("p",), ((0,),)), "T": twins})
    res = check_sruc_iff_ruc_and_extensional(R, "T")
    assert res["agree"] and not res["extensional"] and not res["strong"]
    for Y in R.base.objects:
        assert check_sruc_iff_ruc_and_extensional(R, Y)["agree"]


def test_bijective_arrow_is_iso_in_rel():
    R = VRelDoctrine(boolean(), [2, 2])
    rep = bijective_implies_iso_check(R, arrow(R, "X0", "X1", [1, 0]))
    assert rep["ok"] and rep["bijective"] and rep["is_iso"]
    assert rep["inverse"].data == (1, 0)
    rep = bijective_implies_iso_check(R, arrow(R, "X0", "X1", [0, 0]))
    assert rep["ok"] and not rep["bijective"] and not rep["is_iso"]


entries = st.integers(0, 3)


@settings(max_examples=300, deadline=None)
@given(st.lists(entries, min_size=4, max_size=4))
def test_profile_agrees_with_matrix_oracle(vals):
    R = VRelDoctrine(powerset_frame(2), [2], lazy=True)
    a = (tuple(vals[:2]), tuple(vals[2:]))
    Q = O.POWERSET2
    c = O.converse(a, 2, 2)
    d = O.ident(Q, 2)
    p = profile(R, Relation("X0", "X0", a))
    assert p.functional == O.leq(Q, O.compose(Q, c, a), d)
    assert p.total == O.leq(Q, d, O.compose(Q, a, c))
    assert p.injective == O.leq(Q, O.compose(Q, a, c), d)
    assert p.surjective == O.leq(Q, d, O.compose(Q, c, a))
    assert is_bijective(R, "X0", "X0", a) == p.bijective


def test_functional_total_rel_relations_are_graphs():
    R = VRelDoctrine(boolean(), [2, 3])
    for X, Y in itertools.product(R.base.objects, repeat=2):
        graphs = {R.graph_value(f) for f in R.base.hom(X, Y)}
        assert set(functional_total(R, X, Y)) == graphs
