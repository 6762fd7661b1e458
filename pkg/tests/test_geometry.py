from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udgsat.exactnum import DEFAULT_CONTEXT, FieldContext, NotRepresentable
from udgsat.geometry import (
    Point,
    Rotation,
    apply,
    dist_sq,
    half_angle,
    identity,
    origin,
    power,
    reflect_x,
    theta,
    unit_distance,
)

CTX = DEFAULT_CONTEXT
ONE = CTX.one
ZERO = CTX.zero


def pt(x, y):
    return Point(CTX.rational(x) if not hasattr(x, "ctx") else x,
                 CTX.rational(y) if not hasattr(y, "ctx") else y)


# -- theta --------------------------------------------------------------------

def test_theta1():
    r = theta(1)
    assert r.cos == CTX.rational(Fraction(1, 2))
    assert r.sin == CTX.element({3: Fraction(1, 2)})


def test_theta3():
    r = theta(3)
    assert r.cos == CTX.rational(Fraction(5, 6))
    assert r.sin == CTX.element({11: Fraction(1, 6)})


def test_theta4():
    r = theta(4)
    assert r.cos == CTX.rational(Fraction(7, 8))
    assert r.sin == CTX.element({15: Fraction(1, 8)})


def test_theta_outside_context():
    small = FieldContext.closure([3])
    with pytest.raises(NotRepresentable):
        theta(3, small)  # needs sqrt(11)


def test_bad_rotation_rejected():
    with pytest.raises(ValueError):
        Rotation(ONE, ONE)


# -- power ----------------------------------------------------------------------

def test_half_power_theta3_on_unit_point():
    # the half turn of theta(3) must carry (1,0) to (sqrt33/6, sqrt3/6)
    r = power(theta(3), Fraction(1, 2))
    image = apply(r, pt(1, 0))
    assert image.x == CTX.element({33: Fraction(1, 6)})
    assert image.y == CTX.element({3: Fraction(1, 6)})


def test_power_zero_is_identity():
    assert power(theta(3), 0) == identity()


def test_power_theta1_cubed_is_half_turn():
    r = power(theta(1), 3)
    assert r.cos == CTX.rational(-1)
    assert r.sin == ZERO


def test_negative_half_power_inverts():
    r = power(theta(3), Fraction(1, 2))
    rinv = power(theta(3), Fraction(-1, 2))
    assert r.compose(rinv) == identity()


def test_half_power_requires_rational_cosine():
    with pytest.raises(NotRepresentable):
        power(power(theta(3), Fraction(1, 2)), Fraction(1, 2))


def test_unsupported_power():
    with pytest.raises(ValueError):
        power(theta(1), Fraction(1, 3))


# -- apply / dist -----------------------------------------------------------------

def test_theta1_on_unit_point():
    image = apply(theta(1), pt(1, 0))
    assert image == pt(CTX.rational(Fraction(1, 2)), CTX.element({3: Fraction(1, 2)}))


def test_theta4_on_radius2_point():
    p = pt(2, 0)
    image = apply(theta(4), p)
    assert image.x == CTX.rational(Fraction(7, 4))
    assert image.y == CTX.element({15: Fraction(1, 4)})
    assert dist_sq(p, image) == ONE


def test_identity_apply():
    p = pt(Fraction(3, 2), CTX.sqrt(3))
    assert apply(identity(), p) == p


def test_dist_sq_examples():
    assert dist_sq(pt(0, 0), pt(1, 0)) == ONE
    assert dist_sq(pt(1, 0), Point(CTX.rational(Fraction(1, 2)),
                                   CTX.element({3: Fraction(1, 2)}))) == ONE
    assert dist_sq(origin(), Point(CTX.element({33: Fraction(1, 6)}),
                                   CTX.element({3: Fraction(1, 6)}))) == ONE


def test_unit_distance_and_reflection():
    p = pt(Fraction(1, 2), CTX.element({3: Fraction(1, 2)}))
    assert unit_distance(pt(0, 0), p)
    q = reflect_x(p)
    assert q.y == -p.y
    assert dist_sq(origin(), q) == dist_sq(origin(), p)


# -- properties ---------------------------------------------------------------------

rot_strategy = st.builds(
    lambda i, k: power(theta(i), k),
    st.sampled_from([1, 3, 4]),
    st.sampled_from([Fraction(-2), Fraction(-1), Fraction(-1, 2), Fraction(0),
                     Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3)]),
)

point_strategy = st.builds(
    lambda a, b, c: pt(Fraction(a, 4), CTX.element({3: Fraction(b, 4), 11: Fraction(c, 6)})),
    st.integers(-8, 8), st.integers(-8, 8), st.integers(-8, 8),
)


@given(rot_strategy)
@settings(max_examples=40)
def test_rotation_stays_on_unit_circle(r):
    assert r.cos * r.cos + r.sin * r.sin == ONE


@given(rot_strategy, point_strategy, point_strategy)
@settings(max_examples=40)
def test_apply_preserves_distances(r, p, q):
    assert dist_sq(apply(r, p), apply(r, q)) == dist_sq(p, q)


@pytest.mark.parametrize("i,point", [
    (1, pt(1, 0)),
    (3, Point(CTX.sqrt(3), ZERO)),
    (4, pt(2, 0)),
    (3, apply(theta(1), Point(CTX.sqrt(3), ZERO))),
])
def test_theta_defining_property(i, point):
    # points at distance sqrt(i) from the origin move by exactly 1
    assert dist_sq(point, origin()) == CTX.rational(i)
    assert dist_sq(point, apply(theta(i), point)) == ONE


@pytest.mark.parametrize("i", [1, 3])
def test_half_power_squares_back(i):
    h = power(theta(i), Fraction(1, 2))
    assert h.compose(h) == theta(i)
