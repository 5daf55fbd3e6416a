import json

import pytest

from presentations import presentations
from reldoc.builtins import (VCatDoctrine, VCategory, VRelDoctrine, WaltersDoctrine, arrow, check_vcategory,
                             doctrine_from_spec, make_vcat_doctrine, make_vrel_doctrine, make_walters_doctrine,
                             walters_completion)
from reldoc.doctrine import check_doctrine_laws, is_extensional, structurally_equal
from reldoc.quantale import boolean, chain, powerset_frame, tropical_grid
from reldoc.report import CapExceeded, PreconditionError, StructuralError


def cat(q, points, dist, extent=None):
    idx = q.index
    return VCategory(tuple(points), tuple(tuple(idx(v) for v in r) for r in dist),
                     None if extent is None else tuple(idx(v) for v in extent))


def test_vrel_homs_are_all_maps():
    R = VRelDoctrine(boolean(), [2, 3])
    assert len(R.base.hom("X0", "X1")) == 9
    assert len(R.base.hom("X1", "X0")) == 8
    assert len(R.fibre("X0", "X1")) == 64


def test_generated_base_is_closed_under_composition():
    R = make_vrel_doctrine(boolean(), [2], include_all_functions=False, arrows=[("X0", "X0", (1, 0))])
    homs = {f.data for f in R.base.hom("X0", "X0")}
    assert homs == {(0, 1), (1, 0)}
    assert check_doctrine_laws(R, exhaustive=True).ok


def test_tropical_vcat_fibres_are_bimodules():
    q = tropical_grid(1, 2)
    line = cat(q, "ab", [["0", "1"], ["1", "0"]])
    R = make_vcat_doctrine(q, {"L": line})
    # every fibre element is absorbed by the distance on both sides
    d = R.identity("L")
    for a in R.fibre("L", "L"):
        assert R.compose("L", "L", "L", d, a) == a == R.compose("L", "L", "L", a, d)
    assert d in R.fibre("L", "L")
    assert check_doctrine_laws(R, budget=3000).ok


def test_vcategory_validation():
    q = tropical_grid(1, 2)
    assert check_vcategory(q, cat(q, "ab", [["0", "1"], ["2", "0"]]))
    assert check_vcategory(q, cat(q, "abc", [["0", "0", "inf"], ["0", "0", "0"], ["inf", "0", "0"]]))
    assert not check_vcategory(q, cat(q, "abc", [["0", "1", "2"], ["1", "0", "1"], ["2", "1", "0"]]))


def test_walters_requires_frame_and_extents():
    h = chain(2)
    with pytest.raises(PreconditionError):
        WaltersDoctrine(tropical_grid(1, 2), {"X": cat(tropical_grid(1, 2), "a", [["0"]], ["0"])})
    with pytest.raises(PreconditionError):
        WaltersDoctrine(h, {"X": cat(h, "a", [["1"]])})


def test_walters_completion_of_chain_point():
    h = chain(2)
    X = cat(h, "x", [["1"]], ["1"])
    bar, unit = walters_completion(h, X)
    assert bar.size == 2
    assert sorted(h.names[e] for e in bar.extent) == ["0", "1"]
    assert bar.extent[unit[0]] == h.top
    assert not check_vcategory(h, bar, with_extent=True)


def test_walters_completion_of_powerset_points():
    h = powerset_frame(2)
    X = cat(h, "xy", [["{a}", "{}"], ["{}", "{b}"]], ["{a}", "{b}"])
    bar, unit = walters_completion(h, X)
    # pairs (extent, memberships): {} alone, the two points, and their glueing over {a,b}
    assert bar.size == 4
    assert sorted(h.names[e] for e in bar.extent) == ["{a,b}", "{a}", "{b}", "{}"]
    assert len(set(unit)) == 2
    R = make_walters_doctrine(h, {"X": X, "Xbar": bar})
    assert check_doctrine_laws(R, budget=3000).ok


def test_non_skeletal_vcat_is_not_extensional():
    q = tropical_grid(1, 2)
    twins = cat(q, "ab", [["0", "0"], ["0", "0"]])
    R = VCatDoctrine(q, {"P": cat(q, "p", [["0"]]), "T": twins})
    assert not is_extensional(R, "T")
    assert is_extensional(R, "P")


@pytest.mark.parametrize("R", presentations(12, seed=11), ids=lambda R: f"{type(R).__name__}-{R.q!r}")
def test_spec_round_trip(R):
    spec = json.loads(json.dumps(R.spec()))
    S = doctrine_from_spec(spec)
    assert type(S) is type(R)
    assert structurally_equal(R, S)


def test_spec_errors():
    with pytest.raises(StructuralError):
        doctrine_from_spec({"builtin": "vrel"})
    with pytest.raises(StructuralError):
        doctrine_from_spec({"builtin": "nope", "quantale": "boolean"})
    with pytest.raises(StructuralError):
        doctrine_from_spec({"builtin": "vcat", "quantale": "boolean", "categories": {"X": {"points": ["a"]}}})


def test_hom_cap():
    with pytest.raises(CapExceeded):
        VRelDoctrine(boolean(), [3, 9], hom_cap=100, lazy=True).base.hom("X1", "X0")


def test_arrow_helper_rejects_non_maps():
    R = VRelDoctrine(boolean(), [1, 2])
    assert arrow(R, "X0", "X1", [1]).data == (1,)
    with pytest.raises(ValueError):
        arrow(R, "X0", "X1", [2])


def test_vcat_arrows_are_nonexpanding():
    q = tropical_grid(1, 2)
    near = cat(q, "ab", [["0", "1"], ["1", "0"]])
    far = cat(q, "ab", [["0", "2"], ["2", "0"]])
    R = VCatDoctrine(q, {"N": near, "F": far})
    # collapsing is allowed both ways, swapping keeps distance, stretching is not
    assert {f.data for f in R.base.hom("F", "N")} == {(0, 0), (1, 1), (0, 1), (1, 0)}
    assert {f.data for f in R.base.hom("N", "F")} == {(0, 0), (1, 1)}
