import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlsfv.mesh import DomainSpec, signed_distance
from nlsfv.mesh.domain import reflect_across_boundaries


def test_signed_distance_examples():
    assert signed_distance(DomainSpec.disk(10), (0, 0)) == -10
    assert signed_distance(DomainSpec.disk(10), (10, 0)) == 0
    assert signed_distance(DomainSpec.annulus(5, 20), (0, 10)) == -5


def test_signed_distance_vectorized():
    d = signed_distance(DomainSpec.annulus(5, 20), np.array([[0, 0], [0, 10], [30, 0]]))
    np.testing.assert_allclose(d, [5, -5, 10])


@pytest.mark.parametrize("bad", [("disk", -1.0, None), ("disk", 1.0, 0.5),
                                 ("annulus", 5.0, 6.0), ("annulus", 5.0, None), ("square", 1.0, None)])
def test_invalid_domains(bad):
    with pytest.raises(ValueError):
        DomainSpec(*bad)


def test_parse_and_roundtrip():
    for text in ("disk:10", "annulus:5,20"):
        d = DomainSpec.parse(text)
        assert str(d) == text
        assert DomainSpec.from_dict(d.to_dict()) == d
    with pytest.raises(ValueError):
        DomainSpec.parse("annulus:5")
    with pytest.raises(ValueError):
        DomainSpec.parse("disk:x")


def test_area():
    assert DomainSpec.disk(2).area == pytest.approx(4 * math.pi)
    assert DomainSpec.annulus(5, 20).area == pytest.approx(375 * math.pi)


@given(st.floats(-30, 30), st.floats(-30, 30))
def test_signed_distance_sign_matches_membership(x, y):
    dom = DomainSpec.annulus(5, 20)
    r = math.hypot(x, y)
    d = signed_distance(dom, (x, y))
    if 5 < r < 20:
        assert d < 0
    elif r < 5 or r > 20:
        assert d > 0
    assert abs(d) == pytest.approx(min(abs(r - 5), abs(r - 20)), abs=1e-12)


def test_reflection_lands_outside_at_mirror_radius():
    dom = DomainSpec.annulus(5, 20)
    pts = np.array([[19.5, 0.0], [0.0, 5.5], [12.0, 0.0]])
    img = reflect_across_boundaries(dom, pts, band=1.0)
    np.testing.assert_allclose(sorted(np.hypot(*img.T)), [4.5, 20.5])
    assert (signed_distance(dom, img) > 0).all()
