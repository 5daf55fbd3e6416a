"""Acceptance suite.  Each test records its criterion number; the pass/fail
table is printed at the end of the run."""
import copy
import io
import itertools
import json

import pytest

import oracles as O
from presentations import presentations
from reldoc.builtins import VCategory, VRelDoctrine, doctrine_from_spec, make_walters_doctrine, walters_completion
from reldoc.cli import BAD_INPUT, FOUND, OK, run
from reldoc.completion import (cauchy_reflector, check_sruc_section, check_three_way, factorizations_through_ruc,
                               find_singletons, ruc_doctrine)
from reldoc.doctrine import (check_doctrine_laws, check_graph_functoriality, check_reindex_adjunction,
                             structurally_equal, tabulate)
from reldoc.monads import (EMAlgebra, IdentityMonad, PowersetMonad, TSpace, all_algebras,
                           check_compactification_equivalence, check_monad, closure_phi, compactify,
                           em_closed_doctrine, tspaces)
from reldoc.morphism import enumerate_one_arrows
from reldoc.quantale import boolean, chain, powerset_frame, tropical_grid
from reldoc.quotients import is_equivalence
from reldoc.relprops import (check_arrow_characterizations, check_discreteness, find_ruc_counterexample,
                             is_bijective, is_cauchy_complete, tracking_arrows)

COUNT = 100


@pytest.fixture(scope="module")
def generated():
    return presentations(COUNT, seed=0)


def criterion(record_property, number, title):
    record_property("criterion", (number, title))


def failures(items):
    bad = [(i, r) for i, r in items if not r.ok]
    return [(i, r.to_json()["violations"][:2], r.structural) for i, r in bad]


def test_criterion_01_doctrine_laws(generated, record_property):
    criterion(record_property, 1, "doctrine laws on 100 generated presentations")
    assert len(generated) == COUNT
    laws = [(i, check_doctrine_laws(R, budget=2500, seed=i)) for i, R in enumerate(generated)]
    assert not failures(laws)
    graphs = [(i, check_graph_functoriality(R)) for i, R in enumerate(generated)]
    assert not failures(graphs)
    adj = [(i, check_reindex_adjunction(R)) for i, R in enumerate(generated)]
    assert not failures(adj)


def test_criterion_02_discreteness(generated, record_property):
    criterion(record_property, 2, "functional total relations are discrete")
    assert not failures((i, check_discreteness(R)) for i, R in enumerate(generated))


def test_criterion_03_arrow_characterizations(generated, record_property):
    criterion(record_property, 3, "injective, surjective, bijective arrows via reindexing")
    assert not failures((i, check_arrow_characterizations(R)) for i, R in enumerate(generated))


def test_criterion_04_lean_and_unique_choice(record_property):
    criterion(record_property, 4, "lean quantales have unique choice, powerset frame does not")
    for q in (boolean(), chain(2), chain(3)):
        R = VRelDoctrine(q, [1, 2, 3])
        assert all(is_cauchy_complete(R, Y) for Y in R.base.objects)
        assert find_ruc_counterexample(R) is None
    R = VRelDoctrine(powerset_frame(2), [1, 2])
    Y, w = find_ruc_counterexample(R)
    assert R.size(Y) == 2
    # exhaustive: no base arrow has this graph
    assert not tracking_arrows(R, w.src, w.tgt, w.value)
    assert all(R.graph_value(f) != w.value for f in R.base.hom(w.src, w.tgt))
    untracked, _ = O.untracked_functional_total(O.POWERSET2, R.size(w.src), R.size(w.tgt))
    assert w.value in untracked


def test_criterion_05_ruc(generated, record_property):
    criterion(record_property, 5, "Ruc is strongly Cauchy-complete and the section statements agree")
    bad = []
    for i, R in enumerate(generated):
        U = ruc_doctrine(R)
        if not all(is_cauchy_complete(U, Y, strong=True) for Y in U.base.objects):
            bad.append((i, "ruc object not strongly complete"))
        if not check_sruc_section(R).agree:
            bad.append((i, tuple(check_sruc_section(R))))
        if tuple(check_sruc_section(U)) != (True, True, True):
            bad.append((i, "section on Ruc"))
    assert not bad


def _tiny(R):
    C = R.base
    return len(C.objects) <= 2 and all(len(C.hom(X, Y)) <= 4 for X, Y in itertools.product(C.objects, repeat=2))


def test_criterion_06_universal_property(record_property):
    criterion(record_property, 6, "morphisms into sruc doctrines factor uniquely through Ruc")
    sources = [VRelDoctrine(q, [1, 2]) for q in (boolean(), chain(3), powerset_frame(2), tropical_grid(1, 2))]
    targets = [VRelDoctrine(boolean(), [1, 2]), VRelDoctrine(chain(3), [1, 2])]
    checked = 0
    for R in sources + targets:
        assert _tiny(R)
    for S in targets:
        assert tuple(check_sruc_section(S)) == (True, True, True)
        for R in sources:
            for F in enumerate_one_arrows(R, S):
                assert len(factorizations_through_ruc(F)) == 1
                checked += 1
    assert checked > 0


def _walters_cases():
    h2 = chain(2)
    point = VCategory(("x",), ((h2.index("1"),),), (h2.index("1"),))
    pf = powerset_frame(2)
    i = pf.index
    pair = VCategory(("x", "y"), ((i("{a}"), i("{}")), (i("{}"), i("{b}"))), (i("{a}"), i("{b}")))
    out = []
    for h, X in ((h2, point), (pf, pair)):
        bar, _ = walters_completion(h, X)
        out.append(make_walters_doctrine(h, {"X": X, "Xbar": bar}))
    return out


def test_criterion_07_singletons_and_reflector(record_property):
    criterion(record_property, 7, "Walters doctrines with completions have singletons and a reflector")
    for R in _walters_cases():
        W = find_singletons(R)
        assert all(w is not None for w in W.values())
        assert all(is_bijective(R, A, w.singleton, R.graph_value(w.unit)) for A, w in W.items())
        ref = cauchy_reflector(R, W)
        assert ref.ok, ref.checks
        three = check_three_way(R)
        assert three["agree"] and three["singletons_total"] and three["reflective"] and three["equivalence"]


def _tropical_table():
    # indices 0,1,2,3 stand for distances 0,1,2,inf; larger index is a smaller element
    return O.Table(range(4), lambda a, b: a >= b, lambda a, b: min(a + b, 3), 0)


def test_criterion_08_closure_oracle(record_property):
    criterion(record_property, 8, "Kleene closure equals the brute-force least closed extension")
    cases = [(boolean(), O.BOOL, [1, 2, 3]), (chain(3), O.chain_table(3), [2]),
             (powerset_frame(2), O.POWERSET2, [2]), (tropical_grid(1, 2), _tropical_table(), [2])]
    checked = 0
    for q, table, sizes in cases:
        m = IdentityMonad(VRelDoctrine(q, sizes))
        for X in m.R.base.objects:
            assert len(m.R.fibre(X, X)) <= 1 << 12
            A = EMAlgebra(X, m.R.base.identity(X))
            n = m.R.size(X)
            for alpha in m.R.fibre(X, X):
                res = closure_phi(m, A, alpha)
                assert res.value == O.least_closed_extension(table, n, alpha)
                assert res.iterations <= res.height
                if m.R.converse(X, X, alpha) == alpha:
                    assert is_equivalence(m.R, X, res.value)
                checked += 1
    P = PowersetMonad([1, 2])
    for A in all_algebras(P):
        n = P.R.size(A.carrier)
        closed = O.powerset_closed(A.structure.data, n)
        for alpha in P.R.fibre(A.carrier, A.carrier):
            res = closure_phi(P, A, alpha)
            assert res.value == O.least_closed_extension(O.BOOL, n, alpha, closed)
            assert all(res.checks.values())
            checked += 1
    assert checked == 2 + 16 + 512 + 81 + 256 + 256 + 2 + 16 + 16


def test_criterion_09_compactification(record_property):
    criterion(record_property, 9, "compactification of preorders and the powerset monad")
    m = IdentityMonad(VRelDoctrine(boolean(), [1, 2, 3]))
    R = m.R
    for X in R.base.objects:
        spaces = tspaces(m, X)
        assert len(spaces) == len(O.preorders(R.size(X)))
        for s in spaces:
            c = compactify(m, s)
            assert c.ok, c.checks
            assert sorted(c.quotient.classes) == O.components(s.phi)
        for A in all_algebras(m, [X]):
            c = compactify(m, TSpace(X, R.graph_value(A.structure)))
            assert is_bijective(R, X, c.zeta.tgt, R.graph_value(c.zeta))
    P = PowersetMonad([1, 2])
    assert check_monad(P).ok
    assert check_doctrine_laws(em_closed_doctrine(P), budget=5000).ok


def test_criterion_10_closed_relations_equivalence(record_property):
    criterion(record_property, 10, "closed relations on algebras match complete T-spaces")
    res = check_compactification_equivalence(IdentityMonad(VRelDoctrine(boolean(), [1, 2])))
    assert res["holds"], res.get("witness")


def _call(*argv):
    buf = io.StringIO()
    return run(list(argv), buf), buf.getvalue()


def test_criterion_11_cli(tmp_path, record_property):
    criterion(record_property, 11, "CLI exit codes and deterministic JSON")
    code, text = _call("builtin", "vrel", "--quantale", "powerset_frame(2)", "--carriers", "1,2")
    assert code == OK
    spec = json.loads(text)["result"]
    path = tmp_path / "pf.json"
    path.write_text(json.dumps(spec))
    assert structurally_equal(VRelDoctrine(powerset_frame(2), [1, 2]), doctrine_from_spec(spec))
    runs = [_call("laws", str(path), "--seed", "5") for _ in range(2)]
    assert runs[0] == runs[1] and runs[0][0] == OK
    assert _call("counterexample", str(path))[0] == FOUND

    table = tabulate(VRelDoctrine(boolean(), [1, 2]))
    broken = copy.deepcopy(table)
    del broken["conv"]["X1,X0"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(broken))
    assert _call("laws", str(bad))[0] == BAD_INPUT

    wrong = copy.deepcopy(table)
    els = wrong["fibres"]["X1,X1"]["elements"]
    tab = wrong["comp"]["X1,X1,X1"]
    tab[1][2] = els[0] if tab[1][2] != els[0] else els[-1]
    viol = tmp_path / "viol.json"
    viol.write_text(json.dumps(wrong))
    assert _call("laws", str(viol), "--exhaustive")[0] == FOUND
