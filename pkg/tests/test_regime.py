import math
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from commingle.errors import RegimeViolation
from commingle.forward import MeasurementMatrix, difference_matrix, measurement_matrix
from commingle.regime import (
    EARLY_CRITICAL,
    EXACT_STEP,
    LATE_CRITICAL,
    SegmentationInfo,
    check_corollary2,
    check_prop3,
    check_prop4,
    check_prop5,
    check_prop6,
    check_theorem7,
    classify_column,
    critical_halfwidth,
    effective_nu,
    is_critical,
    nu,
    prop1_holds,
    regime_profile,
    segmentation,
)
from commingle.signal import BlurMixture, PiecewiseSignal, SamplingGrid, difference_vector

from .conftest import DELTA0, DELTA1

mpmath.mp.dps = 40


def nu_oracle(counts: int) -> float:
    # Phi(nu) = 1 - 1/(2c)  <=>  erf(nu / sqrt 2) = 1 - 1/c
    return float(mpmath.sqrt(2) * mpmath.erfinv(1 - mpmath.mpf(1) / counts))


def test_nu_examples():
    assert nu(1) == 0.0 and nu(-1) == 0.0
    assert nu(256) == pytest.approx(2.885635, abs=1e-6)
    # Phi(nu) = 1023/1024; 3.09023 would be the 0.999 quantile instead
    assert nu(512) == pytest.approx(3.097269, abs=1e-6)


@pytest.mark.parametrize("c", [2, 3, 256, 512, 768, 1024, 65536])
def test_nu_against_oracle(c):
    assert nu(c) == pytest.approx(nu_oracle(c), abs=1e-12)
    assert nu(-c) == nu(c)


def test_nu_rejects_zero():
    with pytest.raises(ValueError):
        nu(0)


@given(st.integers(1, 10**6))
def test_nu_monotone(c):
    assert nu(c) < nu(c + 1)


def test_prop1(square_wave):
    prof = regime_profile(difference_vector(square_wave))
    assert prof.nu_max == pytest.approx(nu_oracle(512), abs=1e-12)
    assert prof.sigma_bound == pytest.approx(0.16143, abs=1e-5)
    assert prop1_holds(BlurMixture.gaussian(1 / 8), prof)
    assert not prop1_holds(BlurMixture.gaussian(0.5), prof)
    unit = regime_profile((1, -1))
    assert unit.sigma_bound == math.inf and prop1_holds(BlurMixture.gaussian(100.0), unit)


def test_segmentation(square_wave):
    seg = segmentation(square_wave, SamplingGrid(-1.8, 11))
    assert seg.iotas == (2, 4, 5, 7, 8)
    assert seg.etas == (2, 2, 1, 2, 1, 3)
    assert sum(seg.etas) == 11


def _mm(cols):
    return MeasurementMatrix(tuple(zip(*cols)))


def test_classify_column_forms():
    seg = SegmentationInfo((2, 3), (2,))
    assert classify_column(_mm([(F(0), F(0), F(1), F(1), F(1))]), 0, seg).tag == EXACT_STEP
    late = classify_column(_mm([(F(0), F(0), F(9453, 10000), F(1), F(1))]), 0, seg)
    assert (late.tag, late.critical_row, late.critical_value) == (LATE_CRITICAL, 2, F(9453, 10000))
    early = classify_column(_mm([(F(0), F(195, 10000), F(1), F(1), F(1))]), 0, seg)
    assert (early.tag, early.critical_row) == (EARLY_CRITICAL, 1)
    with pytest.raises(RegimeViolation):
        classify_column(_mm([(F(0), F(1, 2), F(1), F(1), F(1))]), 0, seg)
    with pytest.raises(RegimeViolation):
        classify_column(_mm([(F(0), F(1, 3), F(1, 2), F(1), F(1))]), 0, seg)


def test_is_critical():
    assert not is_critical(F(1, 512), 256)
    assert is_critical(F(1, 256), 256)
    assert not is_critical(F(511, 512), 256)
    assert not is_critical(F(1), 1)


def _fixture_parts(signal, blur, grid, obs):
    M = measurement_matrix(signal, blur, grid, obs)
    return M, difference_matrix(M), segmentation(signal, grid)


@pytest.mark.parametrize("which", [0, 1])
def test_all_checks_pass_on_fixture(which, square_wave, setup0, setup1, obs0, obs1):
    blur, grid = (setup0, setup1)[which]
    obs = (obs0, obs1)[which]
    M, MD, seg = _fixture_parts(square_wave, blur, grid, obs)
    gd = difference_vector(square_wave)
    mg = square_wave.min_gap
    delta = (DELTA0, DELTA1)[which]
    for rep in (check_corollary2(M, seg), check_prop3(M, gd, MD, mg), check_prop4(seg, 2, mg),
                check_prop5(MD, mg), check_prop6(MD, mg), check_theorem7(delta, seg, M)):
        assert rep.ok, rep.as_dict()


def test_theorem7_fixture_positions(square_wave, setup0, setup1, obs0, obs1):
    M, _, seg = _fixture_parts(square_wave, *setup0, obs0)
    assert check_theorem7(DELTA0, seg, M).ok and abs(DELTA0[2]) > abs(DELTA0[3])
    M, _, seg = _fixture_parts(square_wave, *setup1, obs1)
    assert check_theorem7(DELTA1, seg, M).ok and abs(DELTA1[3]) > abs(DELTA1[4])


def test_theorem7_vacuous_without_commingling():
    sig = PiecewiseSignal((0, 2.6), (256,))
    grid, blur = SamplingGrid(-1.3, 6), BlurMixture.gaussian(0.05)
    from commingle.forward import difference_sequence, sample
    obs = sample(sig, blur, grid)
    M, _, seg = _fixture_parts(sig, blur, grid, obs)
    rep = check_theorem7(difference_sequence(obs), seg, M)
    assert rep.ok and not rep.notes


def test_theorem7_counterexample_is_detected():
    # a small first step followed by a much larger one: the early part of the
    # second step alone outweighs the whole first step
    sig = PiecewiseSignal((0.0, 1.755262089853543, 3.258203973533183, 5.003053273629535,
                           6.568298766318924, 8.539313594002985), (-512, -768, 256, 0, 512))
    from commingle.forward import difference_sequence, sample
    grid, blur = SamplingGrid(-1.7706443801415914, 13), BlurMixture.gaussian(0.13746970858058408)
    obs = sample(sig, blur, grid)
    M, _, seg = _fixture_parts(sig, blur, grid, obs)
    delta = difference_sequence(obs)
    assert (delta[4], delta[5]) == (-256, 427)
    rep = check_theorem7(delta, seg, M)
    assert rep.violations == ["j=1: |delta[4]|=256 <= |delta[5]|=427"]


def test_prop4_applicability():
    seg = SegmentationInfo((1, 1, 1, 1), (1, 2, 3))
    assert not check_prop4(seg, 2, 1.4).applicable
    assert check_prop4(seg, 2, 1.4).ok
    assert not check_prop4(seg, 2, 1.51).ok
    assert not check_prop4(SegmentationInfo((1, 1, 3), (1, 2)), 1, 2.1).ok
    assert check_prop4(SegmentationInfo((1, 2, 3), (1, 3)), 1, 2.1).ok


def test_prop5_and_prop6_on_synthetic_rows():
    from commingle.forward import DifferenceMatrix
    half = F(1, 2)
    bad = DifferenceMatrix(((F(1, 3), F(1, 4), F(0)), (F(0), F(0), F(0)), (F(0), F(1, 5), F(1, 5))))
    rep5 = check_prop5(bad, 1.6)
    assert rep5.ok
    assert not check_prop6(bad, 1.6).ok
    wide = DifferenceMatrix(((F(2, 3), F(1, 4), F(0)),))
    assert not check_prop5(wide, 1.6).ok
    assert check_prop5(wide, 1.4).ok
    assert not check_prop5(DifferenceMatrix(((half, F(0), half),)), 1.6).ok


def test_effective_nu_matches_gaussian_and_narrows_mixture():
    g = BlurMixture.gaussian(0.1)
    assert effective_nu(g, 256) == nu(256)
    mix = BlurMixture(((0.5, 0.1), (0.5, 0.05)))
    w = critical_halfwidth(mix, 256)
    tail = sum(wt * float(mpmath.ncdf(-w / s)) for wt, s in mix.components)
    assert tail == pytest.approx(1 / 512, rel=1e-9)
    assert effective_nu(mix, 256) < nu(256)
