import math

import pytest
from hypothesis import given, strategies as st

from strongbell import (
    AngleConfig,
    ApparatusParams,
    InequalityReport,
    OutcomePdf,
    correlation_E,
    fold_angle_diff,
    normalize_angle,
    three_axes_config,
)

angles = st.floats(min_value=-720.0, max_value=720.0,
                   allow_nan=False, allow_infinity=False)


def test_fold_examples():
    assert fold_angle_diff(0, 120) == 120
    assert fold_angle_diff(350, 10) == 20
    assert fold_angle_diff(200, 20) == 0


@given(angles, angles)
def test_fold_symmetric_and_in_range(x, y):
    d = fold_angle_diff(x, y)
    assert 0.0 <= d < 180.0
    assert d == fold_angle_diff(y, x)


@given(angles, angles)
def test_fold_idempotent(x, y):
    d = fold_angle_diff(x, y)
    assert fold_angle_diff(d, 0.0) == pytest.approx(d, abs=1e-9)


@given(angles, angles)
def test_fold_half_turn_stays_in_axis_class(x, y):
    # Shifting either axis by 180 deg is the same physical axis; the fold may
    # land on the mirrored representative d <-> 180 - d of the same geometry.
    d = fold_angle_diff(x, y)
    for shifted in (fold_angle_diff(x + 180.0, y), fold_angle_diff(x, y + 180.0)):
        assert min(abs(shifted - d), abs(shifted - (180.0 - d) % 180.0)) < 1e-9
    assert fold_angle_diff(x + 360.0, y) == pytest.approx(d, abs=1e-9)


def test_normalize_angle():
    assert normalize_angle(365.0) == 5.0
    assert normalize_angle(-10.0) == 350.0
    with pytest.raises(ValueError):
        normalize_angle(float("nan"))


def test_correlation_perfect_cases():
    assert correlation_E(OutcomePdf(pp=0.5, pm=0, mp=0, mm=0.5)) == 1.0
    assert correlation_E(OutcomePdf(pp=0, pm=0.5, mp=0.5, mm=0)) == -1.0


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=4, max_size=4))
def test_correlation_bounded_by_joint_sum(vals):
    total = sum(vals)
    if total > 1.0:
        vals = [v / total for v in vals]
    pdf = OutcomePdf(*vals)
    assert abs(correlation_E(pdf)) <= pdf.joint_sum + 1e-12


def test_correlation_is_linear():
    a = OutcomePdf(pp=0.2, pm=0.1, mp=0.05, mm=0.15)
    b = OutcomePdf(pp=0.1, pm=0.2, mp=0.15, mm=0.05)
    mix = OutcomePdf(pp=0.15, pm=0.15, mp=0.1, mm=0.1)
    assert correlation_E(mix) == pytest.approx(
        0.5 * correlation_E(a) + 0.5 * correlation_E(b), abs=1e-15)


def test_outcome_pdf_rejects_bad_values():
    with pytest.raises(ValueError):
        OutcomePdf(pp=1.2, pm=0, mp=0, mm=0)
    with pytest.raises(ValueError):
        OutcomePdf(pp=-0.5, pm=0, mp=0, mm=0)
    with pytest.raises(ValueError):
        OutcomePdf(pp=0.5, pm=0.5, mp=0.5, mm=0.5)
    with pytest.raises(ValueError):
        OutcomePdf(pp=float("nan"), pm=0, mp=0, mm=0)


def test_angle_config_normalizes():
    cfg = AngleConfig(a=-30.0, b=370.0, a_prime=540.0, b_prime=0.0, r=359.5)
    assert cfg.as_tuple() == (330.0, 10.0, 180.0, 0.0, 359.5)
    with pytest.raises(ValueError):
        AngleConfig(a=float("inf"), b=0, a_prime=0, b_prime=0, r=0)


def test_three_axes_config_geometry():
    cfg = three_axes_config()
    assert cfg.a_prime == cfg.b_prime == cfg.r
    for d in (fold_angle_diff(cfg.a, cfg.b), fold_angle_diff(cfg.b, cfg.a_prime),
              fold_angle_diff(cfg.b_prime, cfg.a)):
        assert math.cos(2 * math.radians(d)) == pytest.approx(-0.5, abs=1e-12)


def test_apparatus_params_domain():
    ApparatusParams(eta=1.0, phi_ap=math.pi / 3)
    with pytest.raises(ValueError):
        ApparatusParams(eta=0.0, phi_ap=1.0)
    with pytest.raises(ValueError):
        ApparatusParams(eta=0.5, phi_ap=0.0)
    with pytest.raises(ValueError):
        ApparatusParams(eta=0.5, phi_ap=4.0)


def test_inequality_report_validation():
    rep = InequalityReport(name="x", lhs=-1.5, bound=-1.0, direction="ge",
                           violated=True, violation_factor=1.5)
    assert rep.stderr == 0.0 and rep.n_samples == 0
    with pytest.raises(ValueError):
        InequalityReport(name="x", lhs=0, bound=0, direction="sideways",
                         violated=False, violation_factor=0)
    with pytest.raises(ValueError):
        InequalityReport(name="x", lhs=0, bound=0, direction="ge",
                         violated=False, violation_factor=0, stderr=-1.0)
