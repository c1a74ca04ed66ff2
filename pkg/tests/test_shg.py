import math
import warnings
from types import SimpleNamespace

import numpy as np
import pytest

from chirpedpdc.core import compute_spectra
from chirpedpdc.dispersion import DetuningGrid, make_grid
from chirpedpdc.shg import (
    CompensationMode,
    CompensationProfile,
    GridCoverageError,
    GridCoverageWarning,
    coherent_field,
    coherent_flux,
    correlator_trace,
    first_zero,
    rectangle_approx,
    rectangle_parameters,
    sh_incoherent_spectrum,
    signal_center,
    zero_crossings,
)

# the bundled crystal's blue band edge sits next to the Sellmeier limit, so the
# grid edge carries a few percent of the peak integrand and warns by design
pytestmark = pytest.mark.filterwarnings("ignore::chirpedpdc.shg.GridCoverageWarning")


def _synthetic(UV, n=8192, wmax=1.0e15, omega0=2.2e15, phase=None):
    """Spectra-like object with U = cosh-like real part and prescribed |U V|."""
    om = wmax * (2 * np.arange(n) - (n - 1)) / (n - 1)
    grid = DetuningGrid(omega0, om)
    amp = np.asarray(UV(np.abs(om)), dtype=float)
    # |U|^2 - |V|^2 = 1 with |U||V| = amp
    V = np.sqrt(0.5 * (np.sqrt(1 + 4 * amp ** 2) - 1))
    U = np.sqrt(1 + V ** 2)
    if phase is not None:
        U = U * np.exp(1j * phase(om))
    coeffs = SimpleNamespace(U=U.astype(complex), V=V.astype(complex))
    config = SimpleNamespace(pump_phase_phi=0.0, omega_p=2 * omega0)
    return SimpleNamespace(grid=grid, coeffs=coeffs, config=config, detunings=om)


def _box(a, b, height=2.0):
    return lambda w: np.where((w >= a) & (w <= b), height, 0.0)


def test_flat_band_reproduces_sinc():
    a, b = 2.0e14, 7.0e14
    sp = _synthetic(_box(a, b), n=2 ** 15)
    taus = np.linspace(-30e-15, 30e-15, 121)
    E = coherent_field(sp, CompensationProfile.delayed(0.0), taus=taus, check=False)
    # the box edges fall between samples; the trapezoid of a step carries an O(h) width error
    h = sp.detunings[1] - sp.detunings[0]
    ref = rectangle_approx(1.0, 2.0, 0.5 * (a + b), b - a, taus)
    assert np.max(np.abs(E - ref)) < 2 * h / (b - a) * abs(ref[60]) + 1e-12


def test_rectangle_formula():
    val = rectangle_approx(2.0, 1.5, 1e15, 1e15, 0.0)
    assert val == pytest.approx(2.0 * 1.5 * 1e15 / math.pi)
    t0 = 2 * math.pi / 1e15
    assert abs(rectangle_approx(2.0, 1.5, 1e15, 1e15, t0)) < 1e-12 * abs(val)
    with pytest.raises(ValueError):
        rectangle_approx(1.0, 1.0, 0.0, 0.0, 0.0)


def test_rectangle_matches_exact_at_zero_delay(highgain_spectra):
    U0, V0, ws, dw = rectangle_parameters(highgain_spectra)
    exact = coherent_field(highgain_spectra)
    assert abs(rectangle_approx(U0, V0, ws, dw, 0.0)) == pytest.approx(abs(exact), rel=1e-3)
    assert U0 == pytest.approx(math.exp(math.pi * 0.146), rel=0.05)


def test_exact_compensation_maximises_flux(highgain_spectra):
    sp = highgain_spectra
    om = sp.detunings
    psi = lambda w: np.interp(w, om, sp.psi_unwrapped)
    best = coherent_flux(sp)
    assert coherent_flux(sp, CompensationProfile.custom(psi)) == pytest.approx(best, rel=1e-12)
    rng = np.random.default_rng(11)
    for _ in range(100):
        c = rng.normal(size=4) * 0.3
        bump = lambda w, c=c: sum(ck * np.cos((k + 1) * w / 3e14) for k, ck in enumerate(c))
        theta = lambda w, bump=bump: psi(w) + bump(w)
        assert coherent_flux(sp, CompensationProfile.custom(theta)) <= best * (1 + 1e-12)


def test_no_down_conversion_no_coherent_signal(highgain_spectra):
    sp = highgain_spectra
    zero = SimpleNamespace(U=np.ones_like(sp.coeffs.U), V=np.zeros_like(sp.coeffs.V))
    fake = SimpleNamespace(grid=sp.grid, coeffs=zero, config=sp.config)
    assert coherent_flux(fake) == 0.0
    assert np.all(sh_incoherent_spectrum(fake, sp.config.omega_p + np.linspace(-1e15, 1e15, 5)) == 0)


def test_flux_grows_with_gain(highgain_config):
    fluxes = []
    for nu in (0.05, 0.146, 0.5):
        cfg = highgain_config.with_nu(nu)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            sp = compute_spectra(cfg, make_grid(cfg, 2 ** 13))
        fluxes.append(coherent_flux(sp))
    assert fluxes[0] < fluxes[1] < fluxes[2]


def test_delay_on_idler_mirrors_signal(highgain_spectra):
    taus = np.linspace(-5e-15, 5e-15, 11)
    sig = coherent_field(highgain_spectra, CompensationProfile.delayed(0.0), taus=taus)
    idl = coherent_field(highgain_spectra, CompensationProfile.delayed(0.0, arm="idler"), taus=taus)
    assert np.allclose(idl, sig[::-1], rtol=1e-12, atol=0)
    one = coherent_field(highgain_spectra, CompensationProfile.delayed(taus[3]))
    assert one == pytest.approx(sig[3], rel=1e-12)


def test_trace_normalisation_and_quadrature(highgain_spectra):
    taus = np.linspace(-10e-15, 10e-15, 201)
    tr = correlator_trace(highgain_spectra, taus)
    assert np.max(tr.Phi) == pytest.approx(1.0)
    assert np.allclose(tr.X, 2 * tr.E_coh.real)
    shifted = correlator_trace(highgain_spectra, taus, pump_phase=math.pi)
    assert np.allclose(shifted.X, -tr.X)
    assert tr.Phi[100] == pytest.approx(1.0, abs=1e-12)


def test_first_zero_of_flat_band():
    a, b = 1.0e14, 9.0e14
    sp = _synthetic(_box(a, b), n=2 ** 15)
    taus = np.linspace(-20e-15, 20e-15, 4001)
    tr = correlator_trace(sp, taus)
    assert first_zero(tr) == pytest.approx(2 * math.pi / (b - a), rel=2e-3)


def test_zero_crossings():
    t = np.linspace(0, 10, 1001)
    z = zero_crossings(t, np.sin(t))
    assert np.allclose(z, [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-5)


def test_signal_center_of_box():
    sp = _synthetic(_box(2e14, 6e14), n=2 ** 14)
    assert signal_center(sp) == pytest.approx(4e14, rel=1e-3)


def test_incoherent_total_power_identity(highgain_spectra):
    sp = highgain_spectra
    om = sp.detunings
    P = np.abs(sp.coeffs.V) ** 2
    h = om[1] - om[0]
    delta = np.arange(-om.size + 1, om.size) * h
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GridCoverageWarning)
        S = sh_incoherent_spectrum(sp, sp.config.omega_p + delta)
    total = np.sum(S) * h
    assert total == pytest.approx(2 * (np.sum(P) * h) ** 2 / (2 * math.pi) ** 2, rel=1e-10)
    assert abs(delta[np.argmax(S)]) <= h


def test_incoherent_spectrum_of_box_is_triangle():
    W = 5e14
    sp = _synthetic(lambda w: np.where(w <= W, 1.0, 0.0), n=2 ** 13, wmax=1e15)
    V2 = float(np.abs(sp.coeffs.V[sp.grid.size // 2]) ** 2)
    d = np.array([0.0, 0.5 * W, W, 1.5 * W, 2.5 * W])
    S = sh_incoherent_spectrum(sp, sp.config.omega_p + d)
    peak = 2 * V2 ** 2 * 2 * W / (2 * math.pi) ** 2
    h = sp.detunings[1] - sp.detunings[0]
    expect = peak * np.clip(1 - d / (2 * W), 0, None)
    assert np.allclose(S, expect, atol=4 * h / W * peak)
    assert S[-1] == 0


def test_coverage_checks():
    edge = _synthetic(lambda w: np.ones_like(w))
    with pytest.raises(GridCoverageError):
        coherent_field(edge)
    tail = _synthetic(lambda w: np.where(w < 9e14, 1.0, 0.05))
    with pytest.warns(GridCoverageWarning):
        coherent_field(tail)


def test_profile_validation():
    assert CompensationProfile.exact().mode is CompensationMode.EXACT_PSI
    assert CompensationProfile("psi_plus_delay", 1e-15).mode is CompensationMode.PSI_PLUS_DELAY
    with pytest.raises(ValueError):
        CompensationProfile(CompensationMode.CUSTOM)
    with pytest.raises(ValueError):
        CompensationProfile.delayed(0.0, arm="pump")
    with pytest.raises(ValueError):
        coherent_field(_synthetic(_box(1e14, 5e14)), CompensationProfile.exact(), taus=[0.0])
