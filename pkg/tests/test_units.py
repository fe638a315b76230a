import math

import pytest

from nvcavity.units import (
    TWO_PI,
    angular_to_wavelength,
    from_angular,
    to_angular,
    wavelength_to_angular,
)


def test_ordinary_frequencies_gain_two_pi():
    assert to_angular(1.0, "THz") == pytest.approx(TWO_PI * 1e12, rel=1e-15)
    assert to_angular(30.0, "MHz") == pytest.approx(TWO_PI * 30e6, rel=1e-15)


def test_angular_values_only_scale():
    assert to_angular(2.5, "GHz", angular=True) == pytest.approx(2.5e9, rel=1e-15)


def test_round_trip():
    for unit in ("Hz", "kHz", "MHz", "GHz", "THz"):
        for angular in (False, True):
            v = from_angular(to_angular(1.234, unit, angular), unit, angular)
            assert v == pytest.approx(1.234, rel=1e-14)


def test_unknown_unit_rejected():
    with pytest.raises(ValueError):
        to_angular(1.0, "PHz")
    with pytest.raises(ValueError):
        from_angular(1.0, "eV")


def test_wavelength_conversion():
    omega = wavelength_to_angular(637e-9)
    assert omega == pytest.approx(2.957e15, rel=1e-3)
    assert angular_to_wavelength(omega) == pytest.approx(637e-9, rel=1e-14)


def test_wavelength_positivity():
    with pytest.raises(ValueError):
        wavelength_to_angular(0.0)
    with pytest.raises(ValueError):
        angular_to_wavelength(-1.0)


def test_two_pi_constant():
    assert TWO_PI == pytest.approx(2.0 * math.pi, rel=0.0)
