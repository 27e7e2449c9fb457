import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from harmpot.scalar import ExactComplex, FieldElement, PiGraded
from harmpot.walk import (WalkError, correlation_matrix, is_reversible, is_spherical, load_walk,
                          moment, rotational_symmetry_order, tau_constant, validate_walk)

SQUARE = [["1", "0"], ["0", "1"]]


def spec(steps, basis=SQUARE, d=1):
    return {"name": "t", "sqrt_d": d, "basis": basis,
            "steps": [{"p": p, "vx": x, "vy": y} for p, x, y in steps]}


def test_bundled_walks_validate(walks):
    assert len(walks["z2-simple"].steps) == 4
    assert len(walks["z2-king"].steps) == 8
    assert walks["tri-directed"].d == 3


def test_load_from_path(tmp_path):
    f = tmp_path / "w.json"
    f.write_text(json.dumps(spec([("1/2", "1", "0"), ("1/2", "-1", "0"), ])))
    with pytest.raises(WalkError):
        load_walk(str(f))
    f.write_text(json.dumps(spec([("1/4", "1", "0"), ("1/4", "-1", "0"),
                                  ("1/4", "0", "1"), ("1/4", "0", "-1")])))
    assert is_spherical(load_walk(str(f)))


@pytest.mark.parametrize("steps, message", [
    ([("1", "1", "0")], "drift"),
    ([("1/4", "1", "0"), ("1/4", "-1", "0"), ("1/4", "0", "1")], "sum"),
    ([("1/2", "1", "1"), ("1/2", "-1", "-1")], "degenerate"),
    ([("1/2", "1/2", "0"), ("1/2", "-1/2", "0")], "lattice"),
])
def test_validation_errors(steps, message):
    with pytest.raises(WalkError, match=message):
        validate_walk(spec(steps))


def test_moment_examples(walks):
    s = walks["z2-simple"]
    assert moment(s, 1, 1) == ExactComplex(1, 0)
    assert moment(s, 2, 0).is_zero()
    assert moment(walks["tri-directed"], 3, 0) == ExactComplex(1, 0)


def test_sphericity(walks):
    assert is_spherical(walks["z2-simple"])
    assert is_spherical(walks["z2-king"])
    assert is_spherical(walks["tri-directed"])
    stretched = validate_walk(spec([("1/4", "2", "0"), ("1/4", "-2", "0"),
                                    ("1/4", "0", "1"), ("1/4", "0", "-1")]))
    assert not is_spherical(stretched)
    assert not correlation_matrix(stretched).is_scalar()


def test_correlation_matrix(walks):
    half = FieldElement(Fraction(1, 2))
    for name, diag in (("z2-simple", half), ("z2-king", FieldElement(Fraction(3, 4))),
                       ("tri-directed", half)):
        m = correlation_matrix(walks[name])
        assert m.xx == diag and m.yy == diag and m.xy.is_zero()
        assert m.is_scalar() == is_spherical(walks[name])


def test_rotational_symmetry(walks):
    assert rotational_symmetry_order(walks["z2-simple"]) == 4
    assert rotational_symmetry_order(walks["z2-king"]) == 4
    assert rotational_symmetry_order(walks["tri-directed"]) == 3
    assert rotational_symmetry_order(load_walk("tri-six")) == 6


def test_tau_constant(walks):
    assert tau_constant(walks["z2-simple"]) == PiGraded.over_pi(2)
    assert tau_constant(walks["z2-king"]) == PiGraded.over_pi(Fraction(4, 3))
    assert tau_constant(walks["tri-directed"]) == PiGraded.over_pi(FieldElement(0, 1, 3))


def test_reversibility(walks):
    assert is_reversible(walks["z2-simple"]) and is_reversible(walks["z2-king"])
    assert not is_reversible(walks["tri-directed"])


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["z2-simple", "z2-king", "tri-directed", "tri-six"]),
       st.integers(0, 12), st.integers(0, 12))
def test_moment_symmetry(name, a, b):
    w = load_walk(name)
    assert moment(w, 1, 0).is_zero()
    if a + b <= 12:
        assert moment(w, a, b).conjugate() == moment(w, b, a)
