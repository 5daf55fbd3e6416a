import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from reldoc.builtins import VCatDoctrine, VCategory, VRelDoctrine, make_walters_doctrine
from reldoc.quotients import (check_quotient_flavors, check_universal_property, equivalences, is_equivalence,
                              quotient_arrow, quotient_arrows_in, support_classes)
from reldoc.quantale import boolean, chain, powerset_frame, tropical_grid
from reldoc.report import PreconditionError

BELL = [1, 1, 2, 5, 15]


def partition_matrix(blocks, n):
    label = {x: i for i, b in enumerate(blocks) for x in b}
    return tuple(tuple(int(label[i] == label[j]) for j in range(n)) for i in range(n))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_boolean_equivalences_are_partitions(n):
    R = VRelDoctrine(boolean(), [n])
    assert len(equivalences(R, "X0")) == BELL[n]


def test_chain_equivalences_on_two_points():
    # diagonal at the top, one symmetric off-diagonal value from the chain
    R = VRelDoctrine(chain(3), [2])
    assert len(equivalences(R, "X0")) == 3


def test_diagonal_gives_identity_and_full_gives_point():
    R = VRelDoctrine(boolean(), [1, 2])
    Q = quotient_arrow(R, "X1", R.identity("X1"))
    assert Q.ok and not Q.extended and Q.target == "X1" and Q.arrow.data in {(0, 1), (1, 0)}
    Q = quotient_arrow(R, "X1", ((1, 1), (1, 1)))
    assert Q.ok and Q.target == "X0" and Q.classes == [[0, 1]]
    assert check_quotient_flavors(R, "X1", ((1, 1), (1, 1)), Q.arrow) == {"effective": True, "surjective": True}


def test_non_equivalence_is_refused():
    R = VRelDoctrine(boolean(), [2])
    with pytest.raises(PreconditionError):
        quotient_arrow(R, "X0", ((1, 1), (0, 1)))
    assert is_equivalence(R, "X0", ((1, 1), (0, 1))).failed == ["symmetric"]
    assert is_equivalence(R, "X0", ((0, 0), (0, 1))).failed == ["reflexive"]


def test_missing_carrier_extends_the_presentation():
    R = VRelDoctrine(boolean(), [3])
    rho = partition_matrix([[0, 1], [2]], 3)
    Q = quotient_arrow(R, "X0", rho)
    assert Q.extended and Q.target == "X0/~" and Q.doctrine.size("X0/~") == 2
    assert Q.ok
    assert "X0/~" not in R.base.objects


def test_reuse_among_restricts_the_search():
    R = VRelDoctrine(boolean(), [2, 2])
    Q = quotient_arrow(R, "X0", R.identity("X0"), reuse_among=["X1"])
    assert Q.target == "X1"


def test_graded_equivalence_need_not_be_effective():
    R = VRelDoctrine(chain(3), [1, 2])
    rho = ((2, 1), (1, 2))
    Q = quotient_arrow(R, "X1", rho)
    assert Q.ok and Q.target == "X0"
    flav = check_quotient_flavors(R, "X1", rho, Q.arrow)
    assert not flav["effective"] and flav["surjective"]
    assert flav["failing_pair"] == {"pair": [0, 1], "rho": "1", "kernel": "2"}


def test_tropical_quotients():
    q = tropical_grid(1, 2)
    zero = q.index("0")
    line = VCategory(("a", "b"), ((zero, q.index("1")), (q.index("1"), zero)))
    R = VCatDoctrine(q, {"L": line})
    Q = quotient_arrow(R, "L", R.identity("L"))
    assert Q.target == "L" and not Q.extended and Q.ok
    everything = ((zero, zero), (zero, zero))
    Q = quotient_arrow(R, "L", everything)
    assert Q.extended and Q.target == "L/~" and Q.classes == [[0, 1]]
    assert Q.doctrine.cats["L/~"].dist == ((zero,),)
    assert Q.ok


def test_walters_quotients_are_refused():
    h = chain(2)
    R = make_walters_doctrine(h, {"X": VCategory(("x",), ((1,),), (1,))})
    with pytest.raises(PreconditionError):
        quotient_arrow(R, "X", R.identity("X"))


def test_support_classes_with_threshold():
    q = chain(3)
    rho = ((2, 1, 0), (1, 2, 0), (0, 0, 2))
    assert support_classes(q, rho) == [[0, 1], [2]]
    assert support_classes(q, rho, threshold=2) == [[0], [1], [2]]


def test_presented_quotient_arrows():
    R = VRelDoctrine(boolean(), [1, 2])
    qs = quotient_arrows_in(R, "X1", ((1, 1), (1, 1)))
    assert [q.data for q in qs] == [(0, 0)]
    qs = quotient_arrows_in(R, "X1", R.identity("X1"))
    assert sorted(q.data for q in qs) == [(0, 1), (1, 0)]


def test_universal_property_rejects_a_non_quotient():
    R = VRelDoctrine(boolean(), [2, 2])
    ok, tr = check_universal_property(R, "X0", R.identity("X0"), R.base.hom("X0", "X1")[0])
    assert not ok


partitions = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.integers(0, n - 1), min_size=n, max_size=n).map(lambda lab: (n, lab)))


@settings(max_examples=60, deadline=None)
@given(partitions)
def test_boolean_quotients_match_components(args):
    n, lab = args
    blocks = {}
    for x, b in enumerate(lab):
        blocks.setdefault(b, []).append(x)
    rho = partition_matrix(list(blocks.values()), n)
    R = VRelDoctrine(boolean(), [n], lazy=True)
    Q = quotient_arrow(R, "X0", rho)
    assert Q.ok
    assert sorted(Q.classes) == sorted(O.components(rho))
    assert check_quotient_flavors(Q.doctrine, "X0", rho, Q.arrow) == {"effective": True, "surjective": True}


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=1))
def test_powerset_frame_quotients_use_support(vals):
    q = powerset_frame(2)
    top = q.top
    rho = ((top, vals[0]), (vals[0], top))
    R = VRelDoctrine(q, [1, 2])
    if not is_equivalence(R, "X1", rho):
        return
    Q = quotient_arrow(R, "X1", rho)
    assert Q.ok
    assert len(Q.classes) == (1 if vals[0] != q.bottom else 2)
