import numpy as np
import pytest

from pimd_kubo import (delta_v, harmonic, mildly_anharmonic, potential_eval,
                       potential_grad, quartic)
from pimd_kubo.model import PotentialModel, ThermoParams


def test_harmonic_value():
    assert potential_eval(harmonic(1.0, 1.0), 2.0) == 2.0


def test_quartic_zero():
    assert potential_eval(quartic(1.0), 0.0) == 0.0


def test_mildly_anharmonic_value():
    m = mildly_anharmonic(1.0, 1.0, c3=0.1, c4=0.01)
    assert potential_eval(m, 1.0) == pytest.approx(0.61, abs=1e-15)


def test_grad_harmonic():
    assert potential_grad(harmonic(1.0, 2.0), 1.0) == 4.0


def test_grad_even_at_origin():
    for m in (harmonic(), mildly_anharmonic(c3=0.0, c4=0.3), quartic(2.0)):
        assert potential_grad(m, 0.0) == 0.0


def test_grad_quartic_finite_difference():
    m = quartic(2.0)
    h = 1e-5
    fd = (potential_eval(m, 1.0 + h) - potential_eval(m, 1.0 - h)) / (2 * h)
    g = potential_grad(m, 1.0)
    assert g == pytest.approx(2.0, rel=1e-9)
    assert g == pytest.approx(fd, rel=1e-8)


@pytest.mark.parametrize("model", [
    harmonic(1.0, 1.0),
    harmonic(2.5, 0.7),
    mildly_anharmonic(1.0, 1.0, c3=0.1, c4=0.01),
    mildly_anharmonic(1.3, 2.0, c3=-0.2, c4=0.05),
    quartic(4.0, mass=2.0),
])
def test_grad_matches_finite_difference_grid(model):
    q = np.linspace(-5.0, 5.0, 101)
    h = 1e-5
    fd = (potential_eval(model, q + h) - potential_eval(model, q - h)) / (2 * h)
    g = potential_grad(model, q)
    scale = np.maximum(np.abs(g), 1.0)
    assert np.all(np.abs(g - fd) / scale <= 1e-8)


def test_delta_v_harmonic_closed_form():
    # for a harmonic well the correction is m w^2 eta^2 / 8, independent of q
    m = harmonic(1.0, 1.0)
    assert delta_v(m, 3.0, 2.0) == pytest.approx(0.5, abs=1e-14)
    for q in (-2.0, 0.0, 1.7):
        assert delta_v(m, q, 2.0) == pytest.approx(0.5, abs=1e-12)


def test_delta_v_zero_eta():
    for m in (harmonic(), quartic(3.0), mildly_anharmonic(c3=0.2, c4=0.1)):
        assert delta_v(m, 1.3, 0.0) == 0.0


def test_delta_v_quartic_direct():
    m = quartic(4.0)
    v = lambda q: potential_eval(m, q)
    assert delta_v(m, 1.0, 2.0) == pytest.approx((v(2.0) + v(0.0)) / 2 - v(1.0), abs=1e-14)
    assert delta_v(m, 1.0, 2.0) == pytest.approx(7.0, abs=1e-14)


def test_delta_v_even_in_eta():
    rng = np.random.default_rng(0)
    for m in (harmonic(1.2, 0.8), mildly_anharmonic(c3=0.3, c4=0.05), quartic(2.0)):
        for _ in range(20):
            q, eta = rng.normal(size=2) * 2.0
            assert delta_v(m, q, eta) == pytest.approx(delta_v(m, q, -eta), abs=1e-13)


def test_bounded_below():
    # quartic-dominated wells grow at the sampling boundary used by the package
    for m in (quartic(0.5), mildly_anharmonic(c3=0.4, c4=0.2)):
        q = 10.0 * max(1.0, 1.0 / m.omega)
        assert potential_eval(m, q) > 0
        assert potential_eval(m, -q) > 0


def test_nonfinite_rejected():
    m = harmonic()
    for bad in (np.nan, np.inf, -np.inf):
        with pytest.raises(ValueError):
            potential_eval(m, bad)
        with pytest.raises(ValueError):
            potential_grad(m, bad)


def test_model_validation():
    with pytest.raises(ValueError):
        PotentialModel("harmonic", mass=-1.0)
    with pytest.raises(ValueError):
        PotentialModel("harmonic", omega=0.0)
    with pytest.raises(ValueError):
        PotentialModel("quartic", a4=0.0)
    with pytest.raises(ValueError):
        PotentialModel("mildly_anharmonic", c4=-0.1)
    with pytest.raises(ValueError):
        PotentialModel("unknown")


def test_thermo_validation():
    ThermoParams(1.0, 1)
    with pytest.raises(ValueError):
        ThermoParams(0.0, 4)
    with pytest.raises(ValueError):
        ThermoParams(1.0, 0)
    with pytest.raises(ValueError):
        ThermoParams(1.0, 4, hbar=0.0)


def test_omega_n():
    assert ThermoParams(2.0, 8, hbar=1.0).omega_n == 4.0
