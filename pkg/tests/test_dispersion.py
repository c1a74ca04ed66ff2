import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chirpedpdc.dispersion import (
    CrystalConfig,
    DetuningGrid,
    InfeasibleDesignError,
    RangeError,
    SellmeierModel,
    center_grating,
    design_grating,
    make_grid,
    omega_to_um,
    phase_matched_band,
    phase_mismatch,
    refractive_index,
    um_to_omega,
    wavevector,
)

# extraordinary index of congruent LiNbO3, evaluated in 30-digit arithmetic
INDEX_GOLDEN = [
    (0.5, 2.2485795077147582),
    (0.84, 2.1713298834460550),
    (1.0, 2.1591403212855414),
    (1.55, 2.1375596497855564),
]


@pytest.mark.parametrize("lam,n", INDEX_GOLDEN)
def test_index_matches_reference(lithium_niobate, lam, n):
    assert refractive_index(lithium_niobate, lam) == pytest.approx(n, rel=1e-14)


def test_index_vectorised_and_range_checked(lithium_niobate):
    out = refractive_index(lithium_niobate, np.array([0.5, 1.0]))
    assert out.shape == (2,)
    with pytest.raises(RangeError):
        refractive_index(lithium_niobate, 0.3)
    with pytest.raises(RangeError):
        refractive_index(lithium_niobate, [1.0, 6.0])
    with pytest.raises(RangeError):
        refractive_index(lithium_niobate, np.nan)


def test_sellmeier_validation_and_round_trip(lithium_niobate):
    with pytest.raises(ValueError):
        SellmeierModel((1.0, 0.1, 2.0), (0.4, 5.0))
    with pytest.raises(ValueError):
        SellmeierModel((1.0, 0.1), (5.0, 0.4))
    assert SellmeierModel.from_dict(lithium_niobate.to_dict()) == lithium_niobate


@given(st.floats(0.2, 20.0))
def test_wavelength_frequency_round_trip(lam):
    assert float(omega_to_um(um_to_omega(lam))) == pytest.approx(lam, rel=1e-14)


def test_mismatch_is_exactly_even(highgain_config):
    om = np.linspace(0, 1.2e15, 101)
    assert np.array_equal(phase_mismatch(highgain_config, om), phase_mismatch(highgain_config, -om))


def test_wavevector_at_degeneracy(highgain_config):
    cfg = highgain_config
    n = refractive_index(cfg.sellmeier, 0.84)
    assert wavevector(cfg, 0.0) == pytest.approx(n * cfg.omega0 / 299792458.0, rel=1e-14)


def test_design_matches_band_edges_at_the_faces(lithium_niobate):
    k0, zeta = design_grating(lithium_niobate, 0.42, (0.46, 0.75), 0.02)
    cfg = CrystalConfig(0.02, zeta, k0, 0.0, 0.42, lithium_niobate)
    a, b = phase_matched_band(cfg)
    w0 = cfg.omega0
    # the band is a signal-wavelength interval: both edges sit on Omega > 0
    assert float(omega_to_um(w0 + b)) == pytest.approx(0.46, rel=1e-12)
    assert float(omega_to_um(w0 + a)) == pytest.approx(0.75, rel=1e-12)
    # red edge matched at the entrance face, blue edge at the exit face
    assert phase_mismatch(cfg, a) == pytest.approx(0.0, abs=1e-6)
    assert phase_mismatch(cfg, b) == pytest.approx(-zeta * 0.02, abs=1e-6)


def test_design_is_order_independent(lithium_niobate):
    assert design_grating(lithium_niobate, 0.42, (0.46, 0.75), 0.02) == design_grating(
        lithium_niobate, 0.42, (0.75, 0.46), 0.02
    )


def test_reversed_design_is_infeasible(lithium_niobate):
    with pytest.raises(InfeasibleDesignError):
        design_grating(lithium_niobate, 0.42, (0.46, 0.75), 0.02, orientation="reversed")
    with pytest.raises(ValueError):
        design_grating(lithium_niobate, 0.42, (0.46, 0.75), 0.02, orientation="sideways")


def test_centering_reproduces_edge_design(lithium_niobate):
    k0, zeta = design_grating(lithium_niobate, 0.42, (0.46, 0.75), 0.02)
    assert center_grating(lithium_niobate, 0.42, (0.46, 0.75), 0.02, zeta) == pytest.approx(k0, rel=1e-12)
    with pytest.raises(InfeasibleDesignError):
        center_grating(lithium_niobate, 0.42, (0.46, 0.75), 0.02, -1.0)
    with pytest.raises(ValueError):
        center_grating(lithium_niobate, 0.42, (0.46, 0.75), 0.02, zeta, center="nowhere")


def test_frequency_centering_matches_mid_frequency_mid_crystal(lithium_niobate):
    zeta = 1.14e7
    k0 = center_grating(lithium_niobate, 0.42, (0.46, 0.75), 0.02, zeta, center="frequency")
    cfg = CrystalConfig(0.02, zeta, k0, 0.0, 0.42, lithium_niobate)
    w0 = cfg.omega0
    mid = 0.5 * (abs(float(um_to_omega(0.46)) - w0) + abs(float(um_to_omega(0.75)) - w0))
    # matched where K(z) = K0 - zeta z cancels the raw mismatch: z = L/2
    assert phase_mismatch(cfg, mid) == pytest.approx(-0.5 * zeta * 0.02, abs=1e-6)


def test_config_derived_quantities(highgain_config):
    cfg = highgain_config
    assert cfg.nu == pytest.approx(0.146, rel=1e-12)
    assert cfg.sigma == pytest.approx(math.sqrt(0.146), rel=1e-12)
    assert cfg.omega_p == pytest.approx(2 * cfg.omega0)
    assert cfg.with_nu(1.0).nu == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        cfg.replace(chirp_zeta=-1.0)
    with pytest.raises(ValueError):
        cfg.replace(length_L=0.0)


def test_grid_is_symmetric_and_paired(highgain_config):
    g = make_grid(highgain_config, 1024)
    assert g.size == 1024
    assert np.array_equal(g.detunings, -g.detunings[g.pairing])
    assert np.all(np.diff(g.detunings) > 0)
    lam = g.wavelengths_um
    lo, hi = highgain_config.sellmeier.valid_range
    assert lam.min() >= lo and lam.max() <= hi


def test_grid_rejects_bad_input(highgain_config):
    with pytest.raises(ValueError):
        DetuningGrid(1.0, np.array([-1.0, 0.0, 2.0]))
    with pytest.raises(ValueError):
        DetuningGrid(1.0, np.array([1.0, -1.0]))
    with pytest.raises(RangeError):
        make_grid(highgain_config, 1024, omega_max=1e17)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.46, 0.48), st.floats(0.70, 0.80), st.floats(0.005, 0.05))
def test_design_round_trip_property(lithium_niobate, blue, red, length):
    k0, zeta = design_grating(lithium_niobate, 0.42, (blue, red), length)
    cfg = CrystalConfig(length, zeta, k0, 0.0, 0.42, lithium_niobate)
    w0 = cfg.omega0
    edges = [abs(float(um_to_omega(x)) - w0) for x in (blue, red)]
    d = phase_mismatch(cfg, np.array(edges))
    # one edge is matched at z = 0 (Delta = 0), the other at z = L (Delta = -zeta L)
    assert sorted(np.round(d / (zeta * length), 9).tolist()) == [-1.0, 0.0]
