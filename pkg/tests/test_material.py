import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fluxnoise import constants as C
from fluxnoise.errors import GapRequiredError, NumericError, PreconditionError, RegimeError
from fluxnoise.material import (
    TransportCurve,
    WireSample,
    bcs_gap,
    carrier_density_from_kf,
    carrier_density_hall,
    derive_row,
    disorder_power_law,
    fit_power_law,
    flux_variance_check,
    ioffe_regel,
    lambda_from_lk,
    lk_from_el,
    lk_from_lambda,
    lk_from_resistivity,
    load_device_table,
    power_law_pairs,
    resistivity_from_kfl,
    spin_density,
    weak_localization_slope,
)

positive = st.floats(1e-3, 1e3)


def d1_1(rows):
    return next(r for r in rows if r.device == "D1_1")


# -- inductance and penetration depth -------------------------------------------------

def test_lk_from_el_d1_1():
    # (Phi0/2pi)^2 / (h * 0.39 GHz) / 280 squares
    hand = (C.Phi_0 / (2 * math.pi)) ** 2 / (C.h * 0.39e9) / 280
    assert lk_from_el(0.39, 1e-6, 280e-6) == pytest.approx(hand, rel=1e-12)
    assert lk_from_el(0.39, 1e-6, 280e-6) == pytest.approx(1.50e-9, rel=0.01)


def test_lk_from_el_scales_with_perimeter():
    assert lk_from_el(0.39, 1e-6, 560e-6) == pytest.approx(lk_from_el(0.39, 1e-6, 280e-6) / 2, rel=1e-14)


def test_lambda_d1_1():
    assert lk_from_lambda(3.57e-6, 10e-9) == pytest.approx(1.60e-9, rel=0.005)


@given(lk=st.floats(1e-11, 1e-7), t=st.floats(1e-9, 1e-7))
def test_lambda_round_trip(lk, t):
    assert lk_from_lambda(lambda_from_lk(lk, t), t) == pytest.approx(lk, rel=1e-12)
    assert lambda_from_lk(4 * lk, t) == pytest.approx(2 * lambda_from_lk(lk, t), rel=1e-12)


@given(e_l=st.floats(0.1, 2.0), p_over_w=st.floats(10, 1000), t=st.floats(5e-9, 5e-8))
def test_el_lambda_closure(e_l, p_over_w, t):
    lk = lk_from_el(e_l, 1e-6, p_over_w * 1e-6)
    assert lk_from_lambda(lambda_from_lk(lk, t), t) == pytest.approx(lk, rel=1e-12)


def test_lk_from_resistivity_hand_value():
    delta0 = 1.764 * C.k_B * 2.0
    hand = C.hbar * 1e-5 / (math.pi * delta0 * 20e-9)
    assert lk_from_resistivity(1e-5, 20e-9, delta0=delta0) == pytest.approx(hand, rel=1e-12)
    assert lk_from_resistivity(1e-5, 20e-9, t_c=2.0) == pytest.approx(hand, rel=1e-12)
    assert bcs_gap(2.0) == pytest.approx(delta0, rel=1e-15)


def test_lk_from_resistivity_scalings():
    base = lk_from_resistivity(1e-5, 20e-9, t_c=2.0)
    assert lk_from_resistivity(3e-5, 20e-9, t_c=2.0) == pytest.approx(3 * base, rel=1e-12)
    assert lk_from_resistivity(1e-5, 40e-9, t_c=2.0) == pytest.approx(base / 2, rel=1e-12)


def test_gap_required():
    with pytest.raises(GapRequiredError, match="gap"):
        lk_from_resistivity(1e-5, 20e-9)


# -- Ioffe-Regel -----------------------------------------------------------------------

def test_d1_1_ioffe_regel():
    k_f, l = 9.12e9, 0.05e-9
    n_e = carrier_density_from_kf(k_f)
    rho = resistivity_from_kfl(k_f, l)
    assert n_e == pytest.approx(2.56e28, rel=0.005)
    assert rho == pytest.approx(2.9e-5, rel=0.02)
    assert rho < 6e-5
    assert ioffe_regel(rho, n_e) == pytest.approx(0.456, rel=1e-6)


@given(k_f=st.floats(1e9, 3e10), l=st.floats(1e-11, 1e-9))
def test_ioffe_regel_closure(k_f, l):
    kfl = ioffe_regel(resistivity_from_kfl(k_f, l), carrier_density_from_kf(k_f))
    assert kfl == pytest.approx(k_f * l, rel=1e-9)


def test_ioffe_regel_scalings():
    assert ioffe_regel(2e-5, 2.5e28) == pytest.approx(ioffe_regel(1e-5, 2.5e28) / 2, rel=1e-14)
    assert resistivity_from_kfl(9e9, 0.1e-9) == pytest.approx(resistivity_from_kfl(9e9, 0.05e-9) / 2, rel=1e-14)


def test_metal_insulator_threshold():
    assert ioffe_regel(6e-5, 2.5e28) == pytest.approx(0.3, abs=0.1)


# -- Hall ------------------------------------------------------------------------------------

def hall_curve(n_e, t, noise=0.0, seed=0):
    field = np.linspace(-5, 5, 21)
    r_xy = field / (C.e * n_e * t) + noise * np.random.default_rng(seed).standard_normal(21)
    return TransportCurve(np.array([2.0, 4.0]), np.array([100.0, 100.0]), field, r_xy)


def test_hall_exact_recovery():
    assert carrier_density_hall(hall_curve(3e28, 20e-9), 20e-9) == pytest.approx(3e28, rel=1e-10)


def test_hall_table_range(table_rows):
    recovered = []
    for row in table_rows:
        t = row.t_nm * 1e-9
        recovered.append(carrier_density_hall(hall_curve(row.n_e, t), t))
        assert recovered[-1] == pytest.approx(row.n_e, rel=1e-10), row.device
    # lower end matches the quoted ~2.2e22 cm^-3; the k_F = 11.1 nm^-1 rows reach 4.62e22, above the quoted ~4.2e22
    assert min(recovered) == pytest.approx(2.19e28, rel=0.005)
    assert max(recovered) == pytest.approx(4.62e28, rel=0.005)


def test_hall_negative_slope_rejected():
    with pytest.raises(RegimeError):
        carrier_density_hall(hall_curve(-3e28, 20e-9), 20e-9)


def test_hall_insignificant_slope():
    curve = hall_curve(1e40, 20e-9, noise=1.0)
    with pytest.raises(NumericError):
        carrier_density_hall(curve, 20e-9)


def test_hall_needs_data():
    with pytest.raises(PreconditionError):
        carrier_density_hall(TransportCurve(np.array([1.0, 2.0]), np.array([1.0, 1.0])), 1e-8)


# -- spin defects -----------------------------------------------------------------------------

def test_spin_density_d1_1():
    res = spin_density(286e-6, 1e-6, 280e-6)
    hand = 24 * math.log(2) * (286e-6 * C.Phi_0) ** 2 / (C.mu_0**2 * C.mu_B**2) / 280
    assert res.sigma == pytest.approx(hand, rel=1e-12)
    assert res.sigma == pytest.approx(1.5e20, rel=0.05)


def test_spin_density_scalings():
    base = spin_density(100e-6, 1e-6, 200e-6).sigma
    assert spin_density(200e-6, 1e-6, 200e-6).sigma == pytest.approx(4 * base, rel=1e-12)
    assert spin_density(100e-6, 1e-6, 400e-6).sigma == pytest.approx(base / 2, rel=1e-12)
    assert spin_density(100e-6, 1e-6, 200e-6, m=2).sigma == pytest.approx(base / 4, rel=1e-12)


@given(a=st.floats(1e-6, 1e-3), w=st.floats(1e-7, 1e-5), ratio=st.floats(10, 1000), m=st.floats(0.5, 3))
def test_flux_variance_round_trip(a, w, ratio, m):
    p = w * ratio
    res = spin_density(a, w, p, m=m)
    var = flux_variance_check(res.sigma, w, p, m=m)
    assert var == pytest.approx(2 * (a * C.Phi_0) ** 2 * math.log(2), rel=1e-10)


def test_flux_variance_zero():
    assert flux_variance_check(0.0, 1e-6, 1e-4) == 0.0


def test_regime_warning_is_not_fatal():
    wide = WireSample(thickness=20e-9, width=1e-6, perimeter=1e-4, lam=0.5e-6)
    res = spin_density(100e-6, 1e-6, 1e-4, wire=wide)
    assert not res.regime_ok and res.sigma > 0
    thick = WireSample(thickness=200e-9, width=1e-6, perimeter=1e-4, lam=5e-6)
    assert len(thick.regime_violations()) == 1
    ok = WireSample(thickness=10e-9, width=1e-6, perimeter=1e-4, lam=5e-6)
    assert spin_density(100e-6, 1e-6, 1e-4, wire=ok).regime_ok


def test_wire_sample_rejects_nonpositive():
    with pytest.raises(PreconditionError):
        WireSample(thickness=0.0, width=1e-6, perimeter=1e-4)


# -- power law ----------------------------------------------------------------------------------

def test_power_law_exact_cube():
    rho = np.geomspace(1e-6, 1e-4, 12)
    fit = fit_power_law(rho, 7.0 * rho**3)
    assert fit.alpha == pytest.approx(3.0, abs=1e-10)
    assert fit.prefactor == pytest.approx(7.0, rel=1e-8)
    assert fit.r2 == pytest.approx(1.0)


@given(scale=st.floats(1e-3, 1e3))
def test_power_law_scale_invariance(scale):
    rng = np.random.default_rng(1)
    rho = np.geomspace(1e-6, 1e-4, 10)
    sigma = rho**2.5 * np.exp(0.2 * rng.standard_normal(10))
    a = fit_power_law(rho, sigma)
    b = fit_power_law(rho, scale * sigma)
    assert b.alpha == pytest.approx(a.alpha, rel=1e-9, abs=1e-12)
    assert b.alpha_err == pytest.approx(a.alpha_err, rel=1e-6)
    assert b.log_prefactor - a.log_prefactor == pytest.approx(math.log(scale), abs=1e-9)


def test_power_law_needs_four_pairs():
    with pytest.raises(PreconditionError):
        fit_power_law([1.0, 2.0, 3.0], [1.0, 8.0, 27.0])
    with pytest.raises(PreconditionError):
        fit_power_law([1.0, 2.0, -3.0, 4.0], [1.0, 8.0, 27.0, 64.0])


# -- weak localization ------------------------------------------------------------------------

T_FILM = 20e-9


def curve_from_sigma(temp, sigma_e):
    return TransportCurve(temp, 1.0 / (sigma_e * T_FILM))


def test_wl_linear():
    temp = np.linspace(10, 40, 61)
    res = weak_localization_slope(curve_from_sigma(temp, 2e5 + 300 * temp), T_FILM)
    assert res.slope == pytest.approx(1.0, abs=1e-9)
    assert res.r2 == pytest.approx(1.0, abs=1e-12)
    assert res.sigma0 == pytest.approx(2e5, rel=1e-9)


def test_wl_sqrt_with_supplied_sigma0():
    temp = np.linspace(10, 40, 61)
    res = weak_localization_slope(curve_from_sigma(temp, 2e5 + 900 * np.sqrt(temp)), T_FILM, sigma0=2e5)
    assert res.slope == pytest.approx(0.5, abs=1e-9)


def test_wl_realistic_curve():
    temp = np.linspace(2.5, 40, 151)
    # linear background plus a paraconductivity excess that has died off by 15 K
    sigma_e = 1.8e5 + 250 * temp + 4e4 * np.exp(-(temp - 1.5) / 1.5)
    res = weak_localization_slope(curve_from_sigma(temp, sigma_e), T_FILM)
    assert 0.99 <= res.slope <= 1.01
    assert res.r2 > 0.999


def test_wl_negative_correction_is_regime_error():
    temp = np.linspace(10, 40, 61)
    with pytest.raises(RegimeError):
        weak_localization_slope(curve_from_sigma(temp, 2e5 - 300 * temp), T_FILM, sigma0=2e5)


def test_wl_window_must_be_covered():
    temp = np.linspace(18, 40, 30)
    with pytest.raises(PreconditionError):
        weak_localization_slope(curve_from_sigma(temp, 2e5 + 300 * temp), T_FILM)


def test_transport_curve_validation():
    with pytest.raises(PreconditionError):
        TransportCurve(np.array([2.0, 1.0]), np.array([1.0, 1.0]))
    with pytest.raises(PreconditionError):
        TransportCurve(np.array([1.0, 2.0]), np.array([1.0, -1.0]))
    with pytest.raises(PreconditionError):
        TransportCurve(np.array([1.0, 2.0]), np.array([1.0, 1.0]), field=np.array([0.0, 1.0]))


# -- device table -----------------------------------------------------------------------------

def test_table_loader(table_rows):
    assert len(table_rows) == 29
    row = d1_1(table_rows)
    assert (row.t_nm, row.kf_per_nm, row.l_nm, row.lambda_um) == (10, 9.12, 0.05, 3.57)
    assert (row.w_um, row.p_um, row.a_t2_uphi0, row.el_ghz) == (1, 280, 286, 0.39)
    assert row.wafer == "D1"


def test_derived_d1_1(table_rows):
    d = derive_row(d1_1(table_rows))
    assert d.kfl == pytest.approx(0.456, rel=1e-12)
    assert d.lk_from_el == pytest.approx(1.497e-9, rel=1e-3)
    assert d.lk_from_lambda == pytest.approx(1.60e-9, rel=0.005)
    assert d.sigma == pytest.approx(1.53e20, rel=0.01)


def test_kf_nearly_constant(table_rows):
    kf = [r.kf_per_nm for r in table_rows]
    assert max(kf) / min(kf) < 1.3


def test_wafer_grouping(table_rows):
    derived = [derive_row(r) for r in table_rows]
    rho_d, _ = power_law_pairs(derived, "device")
    rho_w, sigma_w = power_law_pairs(derived, "wafer")
    wafers = {r.wafer for r in table_rows}
    assert len(rho_d) == 29 and len(rho_w) == len(sigma_w) == len(wafers)
    d1 = [d for d in derived if d.wafer == "D1"]
    assert rho_w[0] == pytest.approx(np.mean([d.rho_xx for d in d1]))
    with pytest.raises(PreconditionError):
        power_law_pairs(derived, "chip")


def test_disorder_power_law_runs(table_rows):
    fit = disorder_power_law(table_rows)
    assert fit.n == 29 and fit.alpha > 0 and fit.alpha_err > 0
    with pytest.raises(PreconditionError):
        disorder_power_law([])


def test_loader_reports_bad_line(tmp_path):
    from fluxnoise.errors import DataError
    from fluxnoise.material import shipped_table_path

    lines = shipped_table_path().read_text().splitlines()
    lines[3] = lines[3].replace("0.05", "abc", 1)
    bad = tmp_path / "t.csv"
    bad.write_text("\n".join(lines) + "\n")
    with pytest.raises(DataError, match="line 4"):
        load_device_table(bad)
