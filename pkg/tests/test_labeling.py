import pytest

from commingle.errors import RegimeViolation
from commingle.forward import DifferenceMatrix, difference_matrix, measurement_matrix, sample
from commingle.labeling import (
    BoundaryCoincidence,
    CategoryId,
    GapGeometry,
    Token,
    classify_gap,
    label_from_truth,
    pairing_violations,
    parse_table,
    predict_parse,
    table_endpoints,
)
from commingle.regime import SegmentationInfo, segmentation
from commingle.signal import BlurMixture, PiecewiseSignal, SamplingGrid

from .conftest import LABELS0, LABELS1

T = Token


def _truth(signal, blur, grid):
    obs = sample(signal, blur, grid)
    MD = difference_matrix(measurement_matrix(signal, blur, grid, obs))
    return tuple(str(t) for t in label_from_truth(MD, segmentation(signal, grid)))


def test_fixture_labels(square_wave, setup0, setup1):
    assert _truth(square_wave, *setup0) == LABELS0
    assert _truth(square_wave, *setup1) == LABELS1


def test_vanishing_blur_gives_only_a_tokens(square_wave):
    labels = _truth(square_wave, BlurMixture.gaussian(1e-4), SamplingGrid(-1.8, 11))
    assert labels == ("Z", "Z", "A", "Z", "A", "A", "Z", "A", "A", "Z", "Z")


def test_illegal_overlap_raises():
    F = __import__("fractions").Fraction
    # two columns both claiming row 1 as an A
    MD = DifferenceMatrix(((F(0), F(0)), (F(1), F(1)), (F(0), F(0))))
    with pytest.raises(RegimeViolation):
        label_from_truth(MD, SegmentationInfo((1, 0, 2), (1, 1)))


def test_pairing_violations():
    assert pairing_violations((T.Z, T.F1, T.F2, T.P1, T.P2, T.P3, T.A)) == []
    assert pairing_violations((T.F1, T.Z))
    assert pairing_violations((T.Z, T.S2))
    assert pairing_violations((T.P1, T.P2, T.Z))


def test_gap_geometry():
    g = GapGeometry.from_gap(1.51, 0.3)
    assert g.n == 2 and g.f == pytest.approx(0.49) and g.delta == 0.3


@pytest.mark.parametrize(
    "a, b, f, expected",
    [
        (0.35, 0.30, 0.40, CategoryId(1, "1.1")),
        (0.25, 0.48, 0.30, CategoryId(1, "1.2")),
        (0.45, 0.30, 0.40, CategoryId(3, "3.1")),
        (0.45, 0.48, 0.40, CategoryId(3, "3.2")),
        (0.20, 0.10, 0.40, CategoryId(2)),
        (0.30, 0.10, 0.25, CategoryId(4)),
        (0.40, 0.05, 0.25, CategoryId(5)),
    ],
)
def test_classify_gap(a, b, f, expected):
    # sigma_max = 1 so nu * sigma equals the window directly
    assert classify_gap(a, b, 1.0, GapGeometry(2, f, 0.5)) == expected


def test_classify_gap_rejects_ties_and_other_geometry():
    with pytest.raises(BoundaryCoincidence):
        classify_gap(0.4, 0.3, 1.0, GapGeometry(2, 0.4, 0.5))
    with pytest.raises(ValueError):
        classify_gap(0.3, 0.3, 1.0, GapGeometry(3, 0.4, 0.5))
    with pytest.raises(ValueError):
        classify_gap(0.3, 0.3, 1.0, GapGeometry(2, 0.6, 0.5))


def _predict(a, b, f, delta):
    geom = GapGeometry(2, f, delta)
    return predict_parse(classify_gap(a, b, 1.0, geom), geom, a, b, 1.0)


def test_case_1_1_rows():
    p = _predict(0.35, 0.30, 0.40, 0.1)
    assert p.admits((T.F1, T.F2), T.A)
    assert not p.admits((T.P1, T.P2), T.P3)
    p = _predict(0.35, 0.30, 0.40, 0.32)
    assert p.admits((T.P1, T.P2), T.P3)
    p = _predict(0.35, 0.30, 0.40, 0.7)
    assert p.admits((T.S2,), T.F1) and p.admits((T.P3,), T.P1)


def test_case_3_1_ambiguous_row():
    p = _predict(0.45, 0.30, 0.40, 0.58)
    assert p.admits((T.S2, T.S1), T.S2)
    assert p.admits((T.P3, T.S1), T.S2)
    assert not p.admits((T.A, T.S1), T.S2)


def test_tables_cover_unit_interval():
    for a, b, f in [(0.35, 0.30, 0.40), (0.25, 0.48, 0.30), (0.45, 0.30, 0.40), (0.45, 0.48, 0.40)]:
        cat = classify_gap(a, b, 1.0, GapGeometry(2, f, 0.5))
        rows = parse_table(cat, a, b, 1.0, f)
        assert rows[0][0] == 0.0 and rows[-1][1] == 1.0
        for r, s in zip(rows, rows[1:]):
            assert r[1] == s[0]
        assert table_endpoints(cat, a, b, 1.0, f)[0] == 0.0


def test_predict_parse_unsupported_and_endpoints():
    geom = GapGeometry(2, 0.4, 0.5)
    assert not predict_parse(CategoryId(2), geom, 0.2, 0.1, 1.0).supported
    assert not predict_parse(CategoryId(1, "1.1"), GapGeometry(3, 0.4, 0.5), 0.2, 0.1, 1.0).supported
    with pytest.raises(BoundaryCoincidence):
        _predict(0.35, 0.30, 0.40, 0.30)


def test_generated_commingled_gap_agrees_with_table():
    # D_1 - D_0 = 1.6 (n = 2, f = 0.4); the window widths put the gap in case 1.1
    sig = PiecewiseSignal((0, 1.6, 3.35), (256, -256))
    blur = BlurMixture.gaussian(0.12)
    grid = SamplingGrid(-0.8, 6)  # first sample after D_0 at delta = 0.2
    labels = _truth(sig, blur, grid)
    seg = segmentation(sig, grid)
    from commingle.regime import nu
    a, b = nu(256) * 0.12, nu(512) * 0.12
    geom = GapGeometry.from_gap(1.6, 0.2)
    cat = classify_gap(nu(256), nu(512), 0.12, geom)
    assert cat.category in (1, 3)
    pred = predict_parse(cat, geom, nu(256), nu(512), 0.12)
    segment = tuple(T(x) for x in labels[seg.iotas[0]:seg.iotas[1]])
    assert pred.admits(segment, T(labels[seg.iotas[1]])), (labels, cat, a, b)
