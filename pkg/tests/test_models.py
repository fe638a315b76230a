"""Model builders, the closed-form bare limit, and the sideband container."""

import json
import math

import numpy as np
import pytest

from nvcavity.dynamics import HilbertSpace, basis_state
from nvcavity.merit import channel_yields, exact_emission_metrics
from nvcavity.models import (
    EmitterParams,
    SidebandFileError,
    SidebandModel,
    ThreeLevelParams,
    bare_indistinguishability,
    build_bare_emitter_model,
    build_three_level_model,
    build_two_level_model,
    load_sideband_model,
    sideband_spectrum,
    with_output_filter,
)
from nvcavity.units import BOLTZMANN, HBAR, TWO_PI

EM_200K = EmitterParams(
    gamma=TWO_PI * 30e6, gamma_star=TWO_PI * 1e12, debye_waller=0.02, omega0=2.957e15
)


def test_bare_indistinguishability_closed_form():
    # only the rate ratio enters, so ordinary frequencies can be used directly
    value = bare_indistinguishability(30e6, 15e12, 0.02)
    expected = 0.02**2 * 30e6 / (30e6 + 15e12)
    assert abs(value - expected) / expected < 1e-12
    assert float(f"{value:.1e}") == pytest.approx(8.0e-10)


def test_bare_indistinguishability_trivia():
    assert bare_indistinguishability(1.0, 0.0, 1.0) == pytest.approx(1.0)
    assert bare_indistinguishability(30e6, 30e6, 1.0) == pytest.approx(0.5)


def test_bare_indistinguishability_validation():
    with pytest.raises(ValueError):
        bare_indistinguishability(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        bare_indistinguishability(1.0, -1.0, 0.5)
    with pytest.raises(ValueError):
        bare_indistinguishability(1.0, 1.0, 0.0)


def test_emitter_params_validation():
    with pytest.raises(ValueError):
        EmitterParams(gamma=-1.0, gamma_star=0.0, debye_waller=0.5, omega0=1.0)
    with pytest.raises(ValueError):
        EmitterParams(gamma=1.0, gamma_star=0.0, debye_waller=1.5, omega0=1.0)
    with pytest.raises(ValueError):
        EmitterParams(gamma=1.0, gamma_star=0.0, debye_waller=0.5, omega0=0.0)


def test_two_level_structure():
    model = build_two_level_model(EM_200K, g=1e12, kappa_c=5e12)
    assert model.space.dims == (2, 2)
    assert model.emission_rate == pytest.approx(5e12)
    assert len(model.channels) == 3
    # dephasing conserves excitation, decay and cavity leakage do not
    assert model.loss_channels() == (0, 2)


def test_two_level_g_zero_dark_cavity():
    model = build_two_level_model(EM_200K, g=0.0, kappa_c=1e12)
    f, i = exact_emission_metrics(model)
    assert f == pytest.approx(0.0, abs=1e-12)
    assert i == 0.0


def test_two_level_validation():
    with pytest.raises(ValueError):
        build_two_level_model(EM_200K, g=-1.0, kappa_c=1.0)
    with pytest.raises(ValueError):
        build_two_level_model(EM_200K, g=1.0, kappa_c=0.0)
    with pytest.raises(ValueError):
        build_two_level_model(EM_200K, g=1.0, kappa_c=1.0, photon_cutoff=0)


def test_excitation_conservation_sample():
    rng = np.random.default_rng(23)
    for _ in range(5):
        g = 10.0 ** rng.uniform(9, 13)
        kappa = 10.0 ** rng.uniform(10, 14)
        em = EmitterParams(
            gamma=10.0 ** rng.uniform(7, 9),
            gamma_star=10.0 ** rng.uniform(9, 12),
            debye_waller=0.02,
            omega0=2.957e15,
        )
        model = build_two_level_model(em, g=g, kappa_c=kappa)
        yields = channel_yields(model)
        total = sum(yields[k] for k in model.loss_channels())
        assert total == pytest.approx(1.0, abs=1e-9)


def test_bare_emitter_collects_everything():
    f, i = exact_emission_metrics(build_bare_emitter_model(EM_200K))
    assert f == pytest.approx(1.0, abs=1e-9)
    gamma, gamma_star = EM_200K.gamma, EM_200K.gamma_star
    assert i == pytest.approx(gamma / (gamma + gamma_star), rel=1e-9)


def test_boltzmann_factor_value():
    params = ThreeLevelParams(
        gamma=TWO_PI * 30e6,
        gamma_xy=TWO_PI * 1e12,
        delta=TWO_PI * 100e9,
        temperature=200.0,
    )
    expected = math.exp(-HBAR * TWO_PI * 100e9 / (BOLTZMANN * 200.0))
    assert params.boltzmann_factor == pytest.approx(expected, rel=1e-12)
    assert params.boltzmann_factor == pytest.approx(0.9763, abs=1e-3)


def test_three_level_params_validation():
    with pytest.raises(ValueError):
        ThreeLevelParams(gamma=1.0, gamma_xy=-1.0, delta=1.0, temperature=200.0)
    with pytest.raises(ValueError):
        ThreeLevelParams(gamma=1.0, gamma_xy=1.0, delta=1.0, temperature=0.0)
    with pytest.raises(ValueError):
        ThreeLevelParams(gamma=1.0, gamma_xy=1.0, delta=1.0, temperature=200.0, upper="z")


def test_three_level_structure_and_theta_validation():
    params = ThreeLevelParams(
        gamma=TWO_PI * 30e6, gamma_xy=TWO_PI * 1e12, delta=TWO_PI * 100e9,
        temperature=200.0,
    )
    model = build_three_level_model(params, g=1e12, kappa_c=5e12, theta=0.3)
    assert model.space.dims == (3, 2)
    assert len(model.channels) == 5
    with pytest.raises(ValueError):
        build_three_level_model(params, g=1e12, kappa_c=5e12, theta=2.0)


def test_three_level_reduces_to_two_level():
    # no inter-branch mixing, cavity-resonant branch populated and coupled
    params = ThreeLevelParams(
        gamma=EM_200K.gamma, gamma_xy=0.0, delta=TWO_PI * 100e9,
        temperature=200.0, upper="y",
    )
    space = HilbertSpace((3, 2))
    initial = basis_state(space, (1, 0))  # e_x with empty cavity
    g, kappa = 5e11, 2e12
    three = build_three_level_model(
        params, g=g, kappa_c=kappa, theta=math.pi / 2.0, initial=initial
    )
    em0 = EmitterParams(
        gamma=EM_200K.gamma, gamma_star=0.0, debye_waller=0.02, omega0=EM_200K.omega0
    )
    two = build_two_level_model(em0, g=g, kappa_c=kappa)
    f3, i3 = exact_emission_metrics(three)
    f2, i2 = exact_emission_metrics(two)
    assert i3 == pytest.approx(i2, abs=1e-6)
    assert f3 == pytest.approx(f2, abs=1e-6)


def test_three_level_misaligned_start_loses_power():
    # theta = 0 couples only the y dipole; starting in e_x requires a flip first
    params = ThreeLevelParams(
        gamma=EM_200K.gamma, gamma_xy=TWO_PI * 1e12, delta=TWO_PI * 100e9,
        temperature=200.0, upper="x",
    )
    space = HilbertSpace((3, 2))
    from_x = build_three_level_model(
        params, g=5e11, kappa_c=2e12, theta=0.0, initial=basis_state(space, (1, 0))
    )
    from_y = build_three_level_model(
        params, g=5e11, kappa_c=2e12, theta=0.0, initial=basis_state(space, (2, 0))
    )
    f_x, _ = exact_emission_metrics(from_x)
    f_y, _ = exact_emission_metrics(from_y)
    assert f_x < f_y


def test_three_level_theta_symmetry():
    # theta -> pi/2 - theta with the roles of the two branches swapped
    theta = 0.37
    common = dict(gamma=EM_200K.gamma, gamma_xy=TWO_PI * 1e12,
                  delta=TWO_PI * 100e9, temperature=200.0)
    a = build_three_level_model(
        ThreeLevelParams(upper="x", **common), g=5e11, kappa_c=2e12, theta=theta
    )
    b = build_three_level_model(
        ThreeLevelParams(upper="y", **common), g=5e11, kappa_c=2e12,
        theta=math.pi / 2.0 - theta,
    )
    fa, ia = exact_emission_metrics(a)
    fb, ib = exact_emission_metrics(b)
    assert fa == pytest.approx(fb, abs=1e-8)
    assert ia == pytest.approx(ib, abs=1e-8)


def test_output_filter_wide_limit_transparent():
    model = build_two_level_model(EM_200K, g=1e12, kappa_c=5e12)
    f0, i0 = exact_emission_metrics(model)
    wide = with_output_filter(model, kappa_f=1e4 * 5e12)
    f1, i1 = exact_emission_metrics(wide)
    assert f1 == pytest.approx(f0, abs=1e-4)
    assert i1 == pytest.approx(i0, abs=1e-4)


def test_output_filter_structure():
    model = build_two_level_model(EM_200K, g=1e12, kappa_c=5e12)
    filtered = with_output_filter(model, kappa_f=1e12)
    assert filtered.space.dims == (2, 2, 2)
    assert filtered.emission_rate == pytest.approx(0.5e12)
    with pytest.raises(ValueError):
        with_output_filter(model, kappa_f=0.0)


def test_sideband_model_weight_sum_enforced():
    with pytest.raises(SidebandFileError):
        SidebandModel(
            centers=[-1e13], fwhms=[1e12], weights=[0.5], debye_waller=0.02
        )
    model = SidebandModel.from_raw(
        centers=[-1e13, -2e13], fwhms=[1e12, 2e12], weights=[3.0, 1.0],
        debye_waller=0.02,
    )
    assert float(np.sum(model.weights)) == pytest.approx(0.98, abs=1e-12)
    assert model.weights[0] == pytest.approx(0.75 * 0.98)


def test_sideband_model_validation():
    with pytest.raises(SidebandFileError):
        SidebandModel.from_raw([-1e13], [0.0], [1.0], 0.02)
    with pytest.raises(SidebandFileError):
        SidebandModel.from_raw([-1e13], [1e12], [-1.0], 0.02)
    with pytest.raises(SidebandFileError):
        SidebandModel.from_raw([-1e13, -2e13], [1e12], [1.0, 1.0], 0.02)


def test_sideband_spectrum_peak_and_tail():
    w, fwhm = 0.98, 2e12
    model = SidebandModel(
        centers=[-1e13], fwhms=[fwhm], weights=[w], debye_waller=0.02
    )
    peak = sideband_spectrum(model, np.array([-1e13]))[0]
    assert peak == pytest.approx(w * 2.0 / (math.pi * fwhm), rel=1e-12)
    far = sideband_spectrum(model, np.array([-1e13 + 150 * fwhm]))[0]
    assert far < 1e-3 * peak


def test_sideband_spectrum_normalization():
    import scipy.integrate

    model = load_sideband_model("configs/sideband_nv.toml")
    assert model.centers.size == 7
    total = 0.0
    for c, fw, w in zip(model.centers, model.fwhms, model.weights):
        one = SidebandModel(centers=[c], fwhms=[fw], weights=[w], debye_waller=1.0 - w)
        # integrate in width units so the infinite-interval transform sees O(1) scales
        val, _ = scipy.integrate.quad(
            lambda x, c=c, fw=fw: fw * sideband_spectrum(one, np.array([x * fw + c]))[0],
            -np.inf, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200,
        )
        total += val
    assert total == pytest.approx(0.98, abs=1e-6)


def test_sideband_file_round_trip(tmp_path):
    path = tmp_path / "sb.json"
    path.write_text(json.dumps({
        "angular": True,
        "debye_waller": 0.05,
        "components": [
            {"center_THz": -10.0, "fwhm_THz": 1.0, "weight": 2.0},
            {"center_THz": -20.0, "fwhm_THz": 2.0, "weight": 1.0},
        ],
    }))
    model = load_sideband_model(path)
    assert model.centers[0] == pytest.approx(-1e13)
    assert model.fwhms[1] == pytest.approx(2e12)
    assert float(np.sum(model.weights)) == pytest.approx(0.95)


def test_sideband_file_errors(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("angular = false\n")
    with pytest.raises(SidebandFileError):
        load_sideband_model(bad)
    bad.write_text("[[components]]\ncenter_THz = -10.0\n")
    with pytest.raises(SidebandFileError):
        load_sideband_model(bad)
