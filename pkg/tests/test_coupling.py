import numpy as np
import pytest

from hfh import bloch, effective
from hfh.errors import ValidationError


def cross_keys(report):
    return [key for key in report.averages if key[1] != key[2]]


def test_self_coupling_collapses_to_cell_integral(two_phase):
    mode = bloch.solve_at(two_phase, [np.pi / 2], 16, 1)[0]
    co = effective.effective_coefficients_scalar(mode, two_phase)
    report = effective.coupling_coefficients(mode, mode, two_phase, [4, 8, 16, 32])
    assert report.resonant and report.equivalent
    for j in range(2):
        vals = report.averages[(j, 1, 1)]
        assert np.max(np.abs(vals - co.d[j])) < 1e-10
        assert abs(report.limits[(j, 1, 1)] - co.d[j]) < 1e-10


def test_different_bands_same_k_do_not_couple(two_phase):
    m1, m2 = bloch.solve_at(two_phase, [np.pi / 2], 16, 2)
    report = effective.coupling_coefficients(m1, m2, two_phase, [4, 8, 16, 32])
    assert not report.resonant and not report.equivalent
    assert report.max_cross_limit() < 1e-6
    # the time-slot cross averages vanish already at finite n by b-orthogonality
    for p, l in ((1, 2), (2, 1)):
        assert np.max(np.abs(report.averages[(0, p, l)])) < 1e-12
    for key in cross_keys(report):
        assert report.slopes[key] <= -0.9


def test_opposite_k_same_band_do_not_couple(two_phase):
    ma = bloch.solve_at(two_phase, [1.0], 16, 1)[0]
    mb = bloch.solve_at(two_phase, [-1.0], 16, 1)[0]
    # time reversal makes the frequencies equal; dk*lambda/2pi = 1/pi is not an integer
    assert abs(ma.omega - mb.omega) < 1e-9
    report = effective.coupling_coefficients(ma, mb, two_phase, [4, 8, 16, 32])
    assert not report.resonant
    assert report.max_cross_limit() < 1e-6
    for key in cross_keys(report):
        assert report.slopes[key] <= -0.9
    # C/n bound holds on the computed sequence
    for key, vals in report.averages.items():
        c = report.decay_constants[key]
        res = np.abs(vals - report.limits[key])
        assert np.all(res * np.asarray(report.supercells) <= c + 1e-12)


def test_bands_one_three_do_not_couple(two_phase):
    k = 0.3 * np.pi
    modes = bloch.solve_at(two_phase, [k], 16, 3)
    report = effective.coupling_coefficients(modes[0], modes[2], two_phase, [4, 8, 16, 32])
    assert not report.resonant
    assert report.max_cross_limit() < 1e-6
    for key in cross_keys(report):
        assert report.slopes[key] <= -0.9


def test_reciprocal_shift_is_equivalent(two_phase):
    # the folded solve needs basis margin beyond the medium content to land
    # within the 1e-9 equivalence tolerance
    base = bloch.solve_at(two_phase, [np.pi / 2], 96, 1)[0]
    shifted = bloch.solve_at(two_phase, [np.pi / 2 + 2 * np.pi], 96, 1)[0]
    assert effective.are_equivalent(base, shifted)
    report = effective.coupling_coefficients(base, shifted, two_phase, [4, 8])
    assert report.resonant and report.equivalent


def test_equivalence_predicate_cases(two_phase):
    m1 = bloch.solve_at(two_phase, [np.pi / 2], 16, 1)[0]
    assert effective.are_equivalent(m1, m1)
    # equal omega but dk = pi: (k - m) lambda / 2pi = 1/2, not an integer
    m2 = bloch.solve_at(two_phase, [-np.pi / 2], 16, 1)[0]
    assert abs(m1.omega - m2.omega) < 1e-9
    assert not effective.are_equivalent(m1, m2)


def test_modes_from_different_media_rejected(two_phase, const_medium):
    m1 = bloch.solve_at(two_phase, [0.9], 16, 1)[0]
    m2 = bloch.solve_at(const_medium, [0.9], 4, 1)[0]
    with pytest.raises(ValidationError, match="different media"):
        effective.coupling_coefficients(m1, m2, two_phase, [4, 8])
    with pytest.raises(ValidationError, match="different media"):
        effective.are_equivalent(m1, m2)


def test_time_window_default_and_override(two_phase):
    m1, m2 = bloch.solve_at(two_phase, [np.pi / 2], 16, 2)
    default = effective.coupling_coefficients(m1, m2, two_phase, [4, 8])
    assert abs(default.time_window - 2 * np.pi / m2.omega) < 1e-12
    custom = effective.coupling_coefficients(m1, m2, two_phase, [4, 8], time_window=1.0)
    assert custom.time_window == 1.0
