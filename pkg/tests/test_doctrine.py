import copy
import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from reldoc.builtins import VRelDoctrine, arrow
from reldoc.doctrine import (OppositeDoctrine, Relation, TableDoctrine, check_doctrine_laws,
                             check_graph_functoriality, check_reindex_adjunction, compose, converse, graph,
                             is_extensional, is_extensional_doctrine, ladj_value, leq, reindex,
                             reindex_value, structurally_equal, tabulate)
from reldoc.quantale import boolean, chain, powerset_frame, tropical_grid
from reldoc.report import CapExceeded, StructuralError


@pytest.fixture(scope="module")
def rel12():
    return VRelDoctrine(boolean(), [1, 2])


def test_boolean_rel_laws_exhaustive(rel12):
    rep = check_doctrine_laws(rel12, exhaustive=True)
    assert rep.ok, rep.to_json()["violations"][:3]
    assert all(c["mode"] == "exhaustive" for c in rep.coverage.values())
    assert check_graph_functoriality(rel12).ok
    assert check_reindex_adjunction(rel12).ok


def test_sampling_is_seeded():
    R = VRelDoctrine(chain(3), [2, 2])
    a = check_doctrine_laws(R, budget=500, seed=7).to_json()
    b = check_doctrine_laws(R, budget=500, seed=7).to_json()
    assert a == b
    assert any(c["mode"] == "sampled" for c in a["coverage"].values())


def test_composition_matches_matrix_oracle():
    R = VRelDoctrine(powerset_frame(2), [2, 2])
    Q = O.POWERSET2
    F = R.fibre("X0", "X1")
    for a, b in itertools.islice(itertools.product(F, F), 0, 5000, 7):
        assert R.compose("X0", "X1", "X0", a, R.converse("X0", "X1", b)) == O.compose(Q, a, O.converse(b, 2, 2))


def test_reindexing_is_conjugation_by_graphs(rel12):
    f = arrow(rel12, "X1", "X1", [1, 0])
    g = arrow(rel12, "X0", "X1", [1])
    for a in rel12.fibre("X1", "X1"):
        expect = O.compose(O.BOOL, O.compose(O.BOOL, O.graph(O.BOOL, f.data, 2), a),
                           O.converse(O.graph(O.BOOL, g.data, 2), 1, 2))
        assert reindex_value(rel12, f, g, a) == expect


def test_relation_helpers(rel12):
    f = arrow(rel12, "X0", "X1", [0])
    gf = graph(rel12, f)
    assert gf.src == "X0" and gf.tgt == "X1"
    c = converse(rel12, gf)
    assert leq(rel12, compose(rel12, c, gf), Relation("X1", "X1", rel12.identity("X1")))
    r = reindex(rel12, f, f, Relation("X1", "X1", rel12.identity("X1")))
    assert r.value == rel12.identity("X0")
    with pytest.raises(TypeError):
        compose(rel12, gf, gf)


def test_left_adjoint_reindexing(rel12):
    f = arrow(rel12, "X1", "X1", [0, 0])
    a = ((1, 0), (0, 0))
    assert ladj_value(rel12, f, f, a) == ((1, 0), (0, 0))
    assert ladj_value(rel12, f, f, ((0, 0), (0, 1))) == ((1, 0), (0, 0))


def test_tabulated_round_trip(rel12):
    data = json.loads(json.dumps(tabulate(rel12)))
    T = TableDoctrine.from_json(data)
    assert structurally_equal(T, rel12)
    rep = check_doctrine_laws(T, exhaustive=True)
    assert rep.ok


def test_missing_conv_entry_is_structural(rel12):
    data = tabulate(rel12)
    del data["conv"]["X1,X0"]
    with pytest.raises(StructuralError) as e:
        TableDoctrine.from_json(data)
    assert any("conv" in p for p in e.value.problems)


def test_corrupted_composition_is_a_violation(rel12):
    data = copy.deepcopy(tabulate(rel12))
    tab = data["comp"]["X1,X1,X1"]
    tab[1][2], tab[2][1] = tab[2][1], tab[1][2]
    if tab[1][2] == tab[2][1]:
        tab[1][2] = data["fibres"]["X1,X1"]["elements"][-1]
    rep = check_doctrine_laws(TableDoctrine.from_json(data), exhaustive=True)
    assert not rep.ok


def test_corrupted_graph_breaks_functoriality(rel12):
    data = copy.deepcopy(tabulate(rel12))
    key = next(k for k in data["graph"] if k.startswith("X1->X1") and k.endswith("[1,0]"))
    data["graph"][key] = data["d"]["X1"]
    T = TableDoctrine.from_json(data)
    assert not check_graph_functoriality(T).ok


def test_opposite_doctrine_is_lawful():
    R = OppositeDoctrine(VRelDoctrine(boolean(), [1, 2]))
    assert check_doctrine_laws(R, exhaustive=True).ok
    assert check_reindex_adjunction(R).ok


def test_fibre_cap_refusal():
    with pytest.raises(CapExceeded):
        VRelDoctrine(tropical_grid(1, 2), [3, 3], cap=1000)
    R = VRelDoctrine(tropical_grid(1, 2), [3, 3], cap=1000, lazy=True)
    with pytest.raises(CapExceeded):
        R.fibre("X0", "X1")


def test_extensionality(rel12):
    assert is_extensional_doctrine(rel12)
    assert is_extensional(rel12, "X1")


def test_compose_memo_agrees_with_direct_composition():
    R = VRelDoctrine(tropical_grid(1, 2), [2, 2])
    F = R.fibre("X0", "X1")
    G = R.fibre("X1", "X0")
    for a, b in itertools.islice(itertools.product(F, G), 0, 20000, 97):
        first = R.compose("X0", "X1", "X0", a, b)
        assert first == R.compose("X0", "X1", "X0", a, b) == R._compose("X0", a, b)


mats22 = st.lists(st.lists(st.integers(0, 3), min_size=2, max_size=2), min_size=2, max_size=2).map(
    lambda rows: tuple(tuple(r) for r in rows))


@settings(max_examples=200, deadline=None)
@given(mats22, mats22, mats22)
def test_tropical_composition_associative_and_converse(a, b, c):
    R = VRelDoctrine(tropical_grid(1, 2), [2], lazy=True)
    X = "X0"
    ab_c = R.compose(X, X, X, R.compose(X, X, X, a, b), c)
    a_bc = R.compose(X, X, X, a, R.compose(X, X, X, b, c))
    assert ab_c == a_bc
    assert R.converse(X, X, R.compose(X, X, X, a, b)) == R.compose(X, X, X, R.converse(X, X, b),
                                                                R.converse(X, X, a))
    assert R.compose(X, X, X, R.identity(X), a) == a


@settings(max_examples=200, deadline=None)
@given(mats22, mats22, st.sampled_from([(0, 0), (0, 1), (1, 0), (1, 1)]),
       st.sampled_from([(0, 0), (0, 1), (1, 0), (1, 1)]))
def test_reindexing_monotone_and_adjoint(a, b, fd, gd):
    R = VRelDoctrine(tropical_grid(1, 2), [2], lazy=True)
    f, g = arrow(R, "X0", "X0", fd), arrow(R, "X0", "X0", gd)
    X = "X0"
    if R.leq(X, X, a, b):
        assert R.leq(X, X, reindex_value(R, f, g, a), reindex_value(R, f, g, b))
    # E ⊣ R: E(a) ⊑ b iff a ⊑ R(b)
    assert R.leq(X, X, ladj_value(R, f, g, a), b) == R.leq(X, X, a, reindex_value(R, f, g, b))
