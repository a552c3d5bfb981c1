import pytest
from hypothesis import given
from hypothesis import strategies as st

from commingle import bounds as bd
from commingle.labeling import Token
from commingle.recovery import recover
from commingle.regime import nu

from .conftest import DELTA0, DELTA1

E, L, A = bd.LabelClass.EARLY, bd.LabelClass.LATE, bd.LabelClass.A
BREAKS = (0.0, 1.51, 3.02, 4.53, 6.04)
GD = (256, -512, 512, -512, 256)


def test_label_classes():
    assert bd.label_class(Token.F1) is E and bd.label_class(Token.P1) is E
    assert bd.label_class(Token.S2) is L and bd.label_class(Token.P3) is L
    assert bd.label_class(Token.A) is A
    with pytest.raises(ValueError):
        bd.label_class(Token.F2)


def test_locate_examples():
    iv = bd.locate(E, 2, -1.8, nu(256), 1 / 8)
    assert iv.lo == pytest.approx(0.2 - 0.3607, abs=1e-4) and iv.hi == pytest.approx(0.2)
    assert 0.0 in iv
    w = nu(512) / 7
    iv = bd.locate(L, 5, -1.3, nu(512), 1 / 7)
    assert (iv.lo, iv.hi) == pytest.approx((2.7, 2.7 + w))
    iv = bd.locate(A, 5, -1.3, nu(512), 1 / 7)
    assert (iv.lo, iv.hi) == pytest.approx((2.7 + w, 3.7 - w))


def test_locate_vanishing_blur():
    iv = bd.locate(A, 3, -1.5, nu(256), 1e-9)
    assert (iv.lo, iv.hi) == pytest.approx((0.5, 1.5))
    with pytest.raises(bd.EmptyIntervalError):
        bd.locate(L, 3, -1.5, 0.0, 0.1)


def test_distance_examples():
    a, c, s = 2.0, 3.0, 0.1
    iv = bd.distance_bounds(E, E, 4, 7, a, c, s)
    assert (iv.lo, iv.hi) == pytest.approx((3 - 0.3, 3 + 0.2))
    iv = bd.distance_bounds(E, L, 4, 6, a, c, s)
    assert (iv.lo, iv.hi) == pytest.approx((1.0, 1.5))
    iv = bd.distance_bounds(A, A, 1, 3, a, c, s)
    assert (iv.lo, iv.hi) == pytest.approx((1.5, 2.5))


def test_literal_variant_only_changes_late_a():
    args = (2, 4, 2.5, 3.0, 0.1)
    for x in (A, E, L):
        for y in (A, E, L):
            if (x, y) == (L, A):
                continue
            assert bd.distance_bounds(x, y, *args) == bd.distance_bounds(x, y, *args, literal=True)
    assert bd.distance_bounds(L, A, *args).lo == pytest.approx(2 + 0.3 - 0.25)
    assert bd.distance_bounds(L, A, *args, literal=True).lo == pytest.approx(2 + 0.3 + 0.25)


def test_distance_rejects_bad_order():
    with pytest.raises(ValueError):
        bd.distance_bounds(E, E, 4, 4, 1.0, 1.0, 0.1)


@pytest.mark.parametrize("which", [0, 1])
def test_fixture_intervals_contain_truth(which):
    r = recover(DELTA0, DELTA1)
    labels = (r.labels0, r.labels1)[which]
    t0, sigma = ((-1.8, 1 / 8), (-1.3, 1 / 7))[which]
    marks = bd.segmentation_labels(labels)
    nus = [nu(d) for d in GD]
    assert len(marks) == 5
    for j, (cls, io) in enumerate(marks):
        assert BREAKS[j] in bd.locate(cls, io, t0, nus[j], sigma)
    for j in range(5):
        for k in range(j + 1, 5):
            (x, ij), (y, ik) = marks[j], marks[k]
            iv = bd.distance_bounds(x, y, ij, ik, nus[j], nus[k], sigma)
            assert BREAKS[k] - BREAKS[j] in iv


def test_tighten_with_min_gap():
    assert bd.tighten_with_min_gap(bd.LocationInterval(1.2, 2.0), 1).lo == 1.5
    assert bd.tighten_with_min_gap(bd.LocationInterval(1.8, 2.0), 1).lo == 1.8
    assert bd.tighten_with_min_gap(bd.LocationInterval(2.1, 3.4), 2).lo == 3.0
    with pytest.raises(bd.EmptyIntervalError):
        bd.tighten_with_min_gap(bd.LocationInterval(1.0, 1.4), 1)


@given(st.sampled_from([E, L]), st.integers(1, 20), st.floats(-2, -0.01),
       st.floats(0.5, 3.5), st.floats(0.01, 0.14), st.floats(0.1, 0.99))
def test_early_late_intervals_shrink_with_blur(cls, io, t0, n, s, shrink):
    wide = bd.locate(cls, io, t0, n, s)
    narrow = bd.locate(cls, io, t0, n, s * shrink)
    assert wide.lo <= narrow.lo and narrow.hi <= wide.hi


@given(st.integers(1, 20), st.floats(-2, -0.01), st.floats(0.5, 3.5), st.floats(0.01, 0.14), st.floats(0.1, 0.99))
def test_a_interval_grows_as_blur_shrinks(io, t0, n, s, shrink):
    # an A label says the samples on both sides are outside the window, which
    # is a weaker statement for a narrower window
    wide = bd.locate(A, io, t0, n, s)
    narrow = bd.locate(A, io, t0, n, s * shrink)
    assert narrow.lo <= wide.lo and wide.hi <= narrow.hi
