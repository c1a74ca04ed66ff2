"""Second-harmonic witnesses of broadband squeezing.

A thin doubling crystal after the amplifier produces a coherent component at
the pump frequency whose field is

    E_coh = (1/pi) int_0 |U V| exp(i[2 psi - theta(Omega) - theta(-Omega)]) dOmega

for a compensating phase ``theta``, plus a broad incoherent background given
by the autocorrelation of ``|V|^2``.  The efficiency factor is set to 1.
"""

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

__all__ = [
    "CompensationMode",
    "CompensationProfile",
    "CorrelatorTrace",
    "GridCoverageError",
    "GridCoverageWarning",
    "QuadratureWarning",
    "coherent_field",
    "coherent_flux",
    "correlator_trace",
    "rectangle_approx",
    "rectangle_parameters",
    "signal_center",
    "sh_incoherent_spectrum",
    "first_zero",
    "zero_crossings",
]

_EDGE_ERROR = 0.5
_EDGE_WARN = 1e-2
_QUAD_RTOL = 1e-3
_SAMPLES_PER_PERIOD = 8


class GridCoverageError(ValueError):
    """The squeezing band runs off the end of the detuning grid."""


class GridCoverageWarning(RuntimeWarning):
    pass


class QuadratureWarning(RuntimeWarning):
    pass


class CompensationMode(str, Enum):
    EXACT_PSI = "exact_psi"
    PSI_PLUS_DELAY = "psi_plus_delay"
    CUSTOM = "custom"


@dataclass(frozen=True)
class CompensationProfile:
    """Phase applied to the down-converted light before doubling.

    ``exact_psi`` sets ``theta = psi``; ``psi_plus_delay`` adds ``tau Omega`` on
    the delayed arm only (``"signal"``, ``Omega > 0``, by default); ``custom``
    uses ``theta`` (a callable of the signed detuning).
    """

    mode: CompensationMode = CompensationMode.EXACT_PSI
    delay_tau: float = 0.0
    theta: Optional[Callable] = None
    delayed_arm: str = "signal"

    def __post_init__(self):
        object.__setattr__(self, "mode", CompensationMode(self.mode))
        if self.mode is CompensationMode.CUSTOM and self.theta is None:
            raise ValueError("custom compensation needs a theta callable")
        if self.delayed_arm not in ("signal", "idler"):
            raise ValueError("delayed_arm must be 'signal' or 'idler'")

    @classmethod
    def exact(cls):
        return cls(CompensationMode.EXACT_PSI)

    @classmethod
    def delayed(cls, tau, arm="signal"):
        return cls(CompensationMode.PSI_PLUS_DELAY, float(tau), delayed_arm=arm)

    @classmethod
    def custom(cls, theta):
        return cls(CompensationMode.CUSTOM, theta=theta)


@dataclass
class CorrelatorTrace:
    """Coherent SH field against signal delay, normalised to unit peak flux.

    ``scale`` is the peak ``|E_coh|`` before normalisation.
    """

    taus: np.ndarray
    E_coh: np.ndarray
    Phi: np.ndarray
    X: np.ndarray
    scale: float = 1.0


def _half_band(spectra):
    om = spectra.grid.detunings
    pos = om > 0
    U, V = spectra.coeffs.U, spectra.coeffs.V
    Vneg = V[spectra.grid.pairing]
    amp = np.abs(U[pos] * V[pos])
    two_psi = np.angle(U[pos] * Vneg[pos])
    return om[pos], amp, two_psi


def _check_coverage(amp):
    peak = float(np.max(amp)) if amp.size else 0.0
    if peak == 0:
        return
    edge = float(amp[-1]) / peak
    if edge > _EDGE_ERROR:
        raise GridCoverageError(
            f"integrand at the grid edge is {edge:.2f} of its peak; band truncated"
        )
    if edge > _EDGE_WARN:
        warnings.warn(
            f"integrand at the grid edge is {edge:.3g} of its peak", GridCoverageWarning, stacklevel=3
        )


def _filon_weights(u):
    """``(e^u - 1)/u`` and ``(e^u (u - 1) + 1)/u^2`` with a series near 0."""
    u = np.asarray(u, dtype=complex)
    small = np.abs(u) < 1e-2
    with np.errstate(divide="ignore", invalid="ignore"):
        e = np.exp(u)
        e1 = np.where(small, 1 + u / 2 + u ** 2 / 6 + u ** 3 / 24 + u ** 4 / 120, (e - 1) / u)
        e2 = np.where(
            small,
            0.5 + u / 3 + u ** 2 / 8 + u ** 3 / 30 + u ** 4 / 144,
            (e * (u - 1) + 1) / (u * u),
        )
    return e1, e2


def _delayed_integral(om, f, taus, chunk=64):
    """``int f(Omega) exp(-i tau Omega) dOmega`` on a uniform grid.

    ``f`` is interpolated linearly and the exponential is integrated exactly,
    so the rule stays accurate however fast the delay factor oscillates.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    h = float(om[1] - om[0])
    e1, e2 = _filon_weights(-1j * taus * h)
    out = np.empty(taus.size, dtype=complex)
    for a in range(0, taus.size, chunk):
        t = taus[a:a + chunk]
        g = f[None, :] * np.exp(-1j * t[:, None] * om[None, :])
        s = g.sum(axis=1)
        k1, k2 = e1[a:a + chunk], e2[a:a + chunk]
        out[a:a + chunk] = h * ((k1 - k2) * (s - g[:, -1]) + k2 * np.exp(1j * t * h) * (s - g[:, 0]))
    return out


def _richardson_check(om, f, taus, value):
    if om.size < 5:
        return
    coarse = _delayed_integral(om[::2], f[::2], taus)
    if om.size % 2 == 0:
        # the coarse grid drops the last sample; compare on a matching range
        value = _delayed_integral(om[:-1], f[:-1], taus)
    scale = max(float(np.max(np.abs(value))), 1e-300)
    err = float(np.max(np.abs(coarse - value))) / 3 / scale
    if err > _QUAD_RTOL:
        warnings.warn(f"quadrature error estimate {err:.2g} exceeds {_QUAD_RTOL:g}", QuadratureWarning, stacklevel=3)


def _theta_terms(spectra, comp, om, two_psi):
    """Phase ``2 psi - theta(Omega) - theta(-Omega)`` excluding any delay."""
    if comp.mode is CompensationMode.CUSTOM:
        return two_psi - np.asarray(comp.theta(om), dtype=float) - np.asarray(comp.theta(-om), dtype=float)
    return np.zeros_like(two_psi)


def _signed_delay(comp):
    if comp.mode is not CompensationMode.PSI_PLUS_DELAY:
        return 0.0
    return comp.delay_tau if comp.delayed_arm == "signal" else -comp.delay_tau


def coherent_field(spectra, comp=None, taus=None, check=True):
    """Coherent SH field for compensation ``comp``.

    With ``taus`` given (delay mode only) returns one value per delay,
    overriding ``comp.delay_tau``.
    """
    comp = comp or CompensationProfile.exact()
    om, amp, two_psi = _half_band(spectra)
    if check:
        _check_coverage(amp)
    f = amp * np.exp(1j * _theta_terms(spectra, comp, om, two_psi))
    if taus is None:
        t = np.array([_signed_delay(comp)])
    else:
        if comp.mode is not CompensationMode.PSI_PLUS_DELAY:
            raise ValueError("delay samples need psi_plus_delay compensation")
        sign = 1.0 if comp.delayed_arm == "signal" else -1.0
        t = sign * np.atleast_1d(np.asarray(taus, dtype=float))
    if check and t.size:
        need = _SAMPLES_PER_PERIOD * float(np.max(np.abs(t))) * (om[-1] - om[0]) / (2 * math.pi)
        if need > om.size:
            warnings.warn(
                f"{om.size} samples resolve the delay factor with fewer than "
                f"{_SAMPLES_PER_PERIOD} per period; relying on exact delay integration",
                QuadratureWarning,
                stacklevel=2,
            )
    val = _delayed_integral(om, f, t) / math.pi
    if check:
        _richardson_check(om, f, t, val)
    if taus is None:
        return complex(val[0])
    return val


def coherent_flux(spectra, comp=None):
    """Photon flux ``|E_coh|^2`` of the coherent SH component."""
    return abs(coherent_field(spectra, comp)) ** 2


def correlator_trace(spectra, tau_samples, pump_phase=None):
    """Normalised flux ``Phi(tau)`` and quadrature ``X(tau)`` against signal delay.

    ``X = 2 Re{exp(-i phi) E_coh}`` with ``E_coh`` scaled so ``max Phi = 1``;
    ``pump_phase`` defaults to the configured pump phase.
    """
    taus = np.asarray(tau_samples, dtype=float)
    phi = spectra.config.pump_phase_phi if pump_phase is None else float(pump_phase)
    E = coherent_field(spectra, CompensationProfile.delayed(0.0), taus=taus)
    scale = float(np.max(np.abs(E)))
    if scale == 0:
        En = np.zeros_like(E)
    else:
        En = E / scale
    Phi = np.abs(En) ** 2
    X = 2 * np.real(np.exp(-1j * phi) * En)
    return CorrelatorTrace(taus, En, Phi, X, scale)


def rectangle_approx(U0, V0, Omega_s, DeltaOmega, tau):
    """Coherent field for a rectangular squeezing band of width ``DeltaOmega``.

    ``(1/pi) U0 V0 DeltaOmega exp(-i Omega_s tau) sinc(DeltaOmega tau / 2)``
    with ``sinc(x) = sin(x)/x``.
    """
    if not DeltaOmega > 0:
        raise ValueError("DeltaOmega must be positive")
    tau = np.asarray(tau, dtype=float)
    out = (U0 * V0 * DeltaOmega / math.pi) * np.exp(-1j * Omega_s * tau) * np.sinc(
        DeltaOmega * tau / (2 * math.pi)
    )
    return complex(out) if out.ndim == 0 else out


def signal_center(spectra):
    """``|UV|``-weighted mean detuning over the signal half."""
    om, amp, _ = _half_band(spectra)
    return float(np.sum(om * amp) / np.sum(amp))


def rectangle_parameters(spectra, margin=None):
    """``(U0, V0, Omega_s, DeltaOmega)`` of the equivalent rectangle.

    ``U0``, ``V0`` are the median in-band moduli and ``DeltaOmega`` the width
    that reproduces ``int |UV| dOmega``, so the rectangle and the exact trace
    agree at zero delay.
    """
    om, amp, _ = _half_band(spectra)
    coords = spectra.coords
    pos = spectra.grid.detunings > 0
    inb = coords.in_band() if margin is None else coords.in_band(margin)
    inb = inb[pos]
    if not inb.any():
        raise ValueError("no in-band detunings")
    U0 = float(np.median(np.abs(spectra.coeffs.U[pos][inb])))
    V0 = float(np.median(np.abs(spectra.coeffs.V[pos][inb])))
    area = float(np.trapezoid(amp, om))
    return U0, V0, signal_center(spectra), area / (U0 * V0)


def sh_incoherent_spectrum(spectra, omega_grid):
    """Incoherent SH spectral density at absolute frequencies ``omega_grid``.

    ``(1/2pi)^2 2 int |V(Omega)|^2 |V(omega - omega_p - Omega)|^2 dOmega``,
    computed as a discrete autocorrelation on the detuning grid and
    interpolated linearly in ``omega``.
    """
    om = spectra.grid.detunings
    h = float(om[1] - om[0])
    P = np.abs(spectra.coeffs.V) ** 2
    conv = np.convolve(P, P) * h
    lags = 2 * om[0] + h * np.arange(conv.size)
    delta = np.asarray(omega_grid, dtype=float) - spectra.config.omega_p
    if np.any(np.abs(delta) > lags[-1]):
        warnings.warn("requested frequencies extend past the support of the grid", GridCoverageWarning, stacklevel=2)
    if max(P[0], P[-1]) > _EDGE_WARN * P.max():
        warnings.warn("|V|^2 is truncated by the grid; the tails are underestimated", GridCoverageWarning, stacklevel=2)
    val = np.interp(delta, lags, conv, left=0.0, right=0.0)
    return 2 * val / (2 * math.pi) ** 2


def first_zero(trace):
    """Delay of the first minimum of ``Phi`` at positive ``tau`` (parabolic refinement)."""
    t, p = trace.taus, trace.Phi
    idx = np.nonzero(t > 0)[0]
    for i in idx:
        if 0 < i < t.size - 1 and p[i] <= p[i - 1] and p[i] < p[i + 1]:
            y0, y1, y2 = p[i - 1], p[i], p[i + 1]
            den = y0 - 2 * y1 + y2
            shift = 0.5 * (y0 - y2) / den if den > 0 else 0.0
            return float(t[i] + shift * (t[i + 1] - t[i]))
    return float("nan")


def zero_crossings(taus, values):
    """Linearly interpolated sign changes of ``values``."""
    v = np.asarray(values)
    t = np.asarray(taus)
    s = np.nonzero(np.signbit(v[:-1]) != np.signbit(v[1:]))[0]
    return t[s] - v[s] * (t[s + 1] - t[s]) / (v[s + 1] - v[s])
