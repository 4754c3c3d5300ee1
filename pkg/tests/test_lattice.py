"""Lattice construction, duality, and windowed enumeration."""

import random
from fractions import Fraction

import pytest

from quasicomb.errors import ProjectionNotInjective, SingularLattice
from quasicomb.field import AlgebraicReal, SQRT2, SQRT3, SQRT6
from quasicomb.lattice import (
    Lattice2D,
    default_lattice,
    dual_lattice,
    enumerate_box,
    make_lattice,
)


def test_identity_generators_rejected():
    with pytest.raises(ProjectionNotInjective) as err:
        make_lattice([[1, 0], [0, 1]])
    assert err.value.projection == "p1"


def test_default_lattice_determinant():
    lat = default_lattice()
    assert lat.det == AlgebraicReal(1) - SQRT6


def test_proportional_columns_rejected():
    with pytest.raises(SingularLattice):
        make_lattice([[1, 1], [SQRT3, SQRT3]])


def test_dual_generators_frozen_values():
    # inverse-transpose of [[1, sqrt2], [sqrt3, 1]] with rationalized
    # denominator: 1/(1 - sqrt6) = -(1 + sqrt6)/5
    lat = default_lattice()
    dual = dual_lattice(lat)
    e = Fraction(1, 5)
    assert dual.g00 == AlgebraicReal(-e, 0, 0, -e)
    assert dual.g01 == AlgebraicReal(0, 3 * e, e, 0)
    assert dual.g10 == AlgebraicReal(0, e, 2 * e, 0)
    assert dual.g11 == AlgebraicReal(-e, 0, 0, -e)


def test_dual_determinant_is_reciprocal():
    lat = default_lattice()
    dual = lat.dual()
    prod = lat.det * dual.det
    assert prod == AlgebraicReal(1) or prod == AlgebraicReal(-1)


def test_dual_of_dual_membership_both_ways():
    lat = default_lattice()
    double = lat.dual().dual()
    rng = random.Random(7)
    for _ in range(20):
        m, n = rng.randint(-5, 5), rng.randint(-5, 5)
        p = lat.point(m, n)
        assert double.contains(p.x, p.y)
        q = double.point(m, n)
        assert lat.contains(q.x, q.y)


def test_dual_pairing_is_integral():
    lat = default_lattice()
    dual = lat.dual()
    rng = random.Random(11)
    for _ in range(100):
        p = lat.point(rng.randint(-8, 8), rng.randint(-8, 8))
        q = dual.point(rng.randint(-8, 8), rng.randint(-8, 8))
        inner = p.x * q.x + p.y * q.y
        assert inner.is_integer()


def test_lattice_symmetric_under_negation():
    lat = default_lattice()
    p = lat.point(3, -2)
    assert lat.contains(-p.x, -p.y)


def test_point_coordinates_exact():
    lat = default_lattice()
    p = lat.point(2, -3)
    assert p.x == AlgebraicReal(2) - 3 * SQRT2
    assert p.y == 2 * SQRT3 - AlgebraicReal(3)


def test_enumerate_empty_box():
    lat = default_lattice()
    assert enumerate_box(lat, 1, -1, 0, 1) == []


def test_enumerate_tiny_box_only_origin():
    lat = default_lattice()
    pts = enumerate_box(lat, Fraction(-1, 10), Fraction(1, 10), Fraction(-1, 10), Fraction(1, 10))
    assert [(p.m, p.n) for p in pts] == [(0, 0)]


def brute_force_box(lat, x1, x2, y1, y2, coeff_bound):
    out = []
    ax1, ax2 = AlgebraicReal(x1), AlgebraicReal(x2)
    ay1, ay2 = AlgebraicReal(y1), AlgebraicReal(y2)
    for m in range(-coeff_bound, coeff_bound + 1):
        for n in range(-coeff_bound, coeff_bound + 1):
            p = lat.point(m, n)
            if ax1 <= p.x <= ax2 and ay1 <= p.y <= ay2:
                out.append((m, n))
    return out


def test_enumerate_box_matches_brute_force_default_window():
    # box [-10, 10]^2; |m|, |n| <= 20 is a safe coefficient bound since
    # |m| <= (10 + sqrt2*10)/|det| < 17 and |n| <= (sqrt3*10 + 10)/|det| < 19
    lat = default_lattice()
    got = [(p.m, p.n) for p in enumerate_box(lat, -10, 10, -10, 10)]
    assert got == brute_force_box(lat, -10, 10, -10, 10, 20)


def test_enumerate_box_random_boxes_match_brute_force():
    lat = default_lattice()
    rng = random.Random(3)
    for _ in range(20):
        x1 = Fraction(rng.randint(-12, 8), rng.randint(1, 4))
        x2 = x1 + Fraction(rng.randint(0, 10), 1)
        y1 = Fraction(rng.randint(-12, 8), rng.randint(1, 4))
        y2 = y1 + Fraction(rng.randint(0, 10), 1)
        got = [(p.m, p.n) for p in enumerate_box(lat, x1, x2, y1, y2)]
        # |m| <= 0.69|x| + 0.98|y| and |n| <= 1.2|x| + 0.69|y| through the
        # inverse generators, so this bound is safely complete
        bound = int(max(abs(x1), abs(x2)) + max(abs(y1), abs(y2))) + 4
        assert got == brute_force_box(lat, x1, x2, y1, y2, bound)


def test_enumerate_symmetric_box_closed_under_negation():
    lat = default_lattice()
    pts = enumerate_box(lat, -12, 12, -5, 5)
    keys = {(p.m, p.n) for p in pts}
    assert keys == {(-m, -n) for m, n in keys}


def test_enumerated_points_reproduce_coordinates():
    lat = default_lattice()
    for p in enumerate_box(lat, -6, 6, -6, 6):
        assert p.x == lat.g00 * p.m + lat.g01 * p.n
        assert p.y == lat.g10 * p.m + lat.g11 * p.n


def test_json_round_trip():
    lat = default_lattice()
    again = Lattice2D.from_json(lat.to_json())
    assert again == lat


def test_boundary_points_included_exactly():
    # x = m + n*sqrt2 hits 1 exactly at (1, 0); closed box must include it
    lat = default_lattice()
    pts = enumerate_box(lat, 1, 2, -2, 2)
    assert (1, 0) in [(p.m, p.n) for p in pts]
    pts = enumerate_box(lat, Fraction(1, 1), Fraction(1, 1), SQRT3_BOX_LO, SQRT3_BOX_HI)
    assert [(p.m, p.n) for p in pts] == [(1, 0)]


# a degenerate-in-x box around y = sqrt3 needs rational y bounds that bracket it
SQRT3_BOX_LO = Fraction(17320, 10000)
SQRT3_BOX_HI = Fraction(17321, 10000)
