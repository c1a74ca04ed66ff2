"""Bogoliubov transfer coefficients of a chirped-grating parametric amplifier.

In scaled units the signal/idler pair obeys

    du/dx = -(i/2) x u + sigma v,    dv/dx = (i/2) x v + sigma u,

between ``x0 = Delta/sqrt(zeta)`` and ``xL = x0 + L sqrt(zeta)``.  The
fundamental matrix ``[[A, B], [B~, A~]]`` is written in parabolic cylinder
functions on the diagonal rays, so ``A`` and ``B`` follow from four ``D``
values at each end of the crystal.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dispersion import DetuningGrid, phase_mismatch, wavevector
from .specfun import PcfOrder, erfi_c, pcf_basis, pcf_d_diag, pcf_d_reciprocal

__all__ = [
    "LOW_GAIN_NU",
    "IN_BAND_MARGIN",
    "UnitarityError",
    "UndefinedAngleError",
    "PhaseAliasingWarning",
    "ScaledCoords",
    "TransferCoefficients",
    "SpectraResult",
    "transfer_AB",
    "transfer_AB_tilde",
    "transfer_UV",
    "low_gain_A",
    "low_gain_B",
    "optical_spectrum",
    "squeezing_spectrum",
    "squeezing_angle",
    "unwrap_phase",
    "compensation_angle",
    "compute_spectra",
]

LOW_GAIN_NU = 1e-6
IN_BAND_MARGIN = 5.0
_SELF_CHECK = 1e-6


class UnitarityError(ArithmeticError):
    """``|A|^2 - |B|^2`` strays from 1 beyond the allowed residual."""


class UndefinedAngleError(ValueError):
    """Squeezing angle requested where there is no squeezing."""


class PhaseAliasingWarning(RuntimeWarning):
    """Phase samples too sparse to unwrap reliably."""


@dataclass(frozen=True)
class ScaledCoords:
    """Entry and exit coordinates in scaled units plus the scaled coupling."""

    x0: np.ndarray
    xL: np.ndarray
    sigma: float

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float)
        xl = np.asarray(self.xL, dtype=float)
        if x0.shape != xl.shape:
            raise ValueError("x0 and xL must have the same shape")
        if not (np.all(np.isfinite(x0)) and np.all(np.isfinite(xl))):
            raise ValueError("scaled coordinates must be finite")
        if not self.sigma >= 0:
            raise ValueError("sigma must be non-negative")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "xL", xl)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def nu(self):
        return self.sigma * self.sigma

    @classmethod
    def from_config(cls, config, Omega):
        rz = math.sqrt(config.chirp_zeta)
        x0 = np.asarray(phase_mismatch(config, Omega)) / rz
        return cls(x0, x0 + config.length_L * rz, config.sigma)

    @classmethod
    def from_nu(cls, nu, x0, xL):
        return cls(x0, xL, math.sqrt(nu))

    def in_band(self, margin=IN_BAND_MARGIN):
        """Phase matching falls well inside the crystal."""
        return (self.x0 < -margin) & (self.xL > margin)

    def __getitem__(self, idx):
        return ScaledCoords(self.x0[idx], self.xL[idx], self.sigma)


def _free_phase(x0, xL):
    # (xL^2 - x0^2)/4 without squaring large numbers twice
    return 0.25 * (xL - x0) * (xL + x0)


def low_gain_A(coords):
    """Low-gain limit of ``A``: the free phase ``exp(-i (xL^2 - x0^2)/4)``."""
    return np.exp(-1j * _free_phase(coords.x0, coords.xL))


def low_gain_B(coords):
    """First-order (low-gain) ``B`` in terms of the imaginary error function."""
    x0, xl = coords.x0, coords.xL
    c = 0.5 * (1 + 1j)
    diff = erfi_c(c * x0) - erfi_c(c * xl)
    pref = 1j * np.exp(0.25j * math.pi) * coords.sigma * math.sqrt(0.5 * math.pi)
    return pref * np.exp(-0.25j * (x0 * x0 + xl * xl)) * diff


def _check_unitarity(A, B, limit=_SELF_CHECK):
    res = np.abs(np.abs(A) ** 2 - np.abs(B) ** 2 - 1)
    worst = float(np.max(res)) if np.size(res) else 0.0
    if not worst <= limit:
        raise UnitarityError(f"unitarity residual {worst:.3g} exceeds {limit:g}")
    return worst


def _squeeze(v):
    return complex(v) if np.ndim(v) == 0 else v


def transfer_AB(coords):
    """Transfer coefficients ``A`` and ``B`` from ``x0`` to ``xL``.

    Below ``nu = 1e-6`` the first-order formulas are used, with ``|A|`` lifted
    to ``sqrt(1 + |B|^2)`` so the pair stays exactly unitary.

    Raises
    ------
    UnitarityError
        If ``| |A|^2 - |B|^2 - 1 |`` exceeds ``1e-6`` anywhere.
    """
    nu = coords.nu
    if nu < LOW_GAIN_NU:
        B = low_gain_B(coords)
        A = low_gain_A(coords) * np.sqrt(1 + np.abs(B) ** 2)
    else:
        x0, xl, s = coords.x0, coords.xL, coords.sigma
        damp = math.exp(-0.5 * math.pi * nu)
        p1_l = pcf_d_diag(1j * nu, xl, 1)
        p1_0 = pcf_d_diag(1j * nu, x0, 1)
        q2_l = pcf_d_diag(-1 - 1j * nu, xl, -1)
        q2_0 = pcf_d_diag(-1 - 1j * nu, x0, -1)
        r_0 = pcf_d_diag(-1j * nu, x0, -1)
        s_0 = pcf_d_diag(1j * nu - 1, x0, 1)
        A = damp * (p1_l * r_0 + nu * q2_l * s_0)
        B = s * damp * np.exp(0.25j * math.pi) * (q2_l * p1_0 - p1_l * q2_0)
    _check_unitarity(A, B)
    return _squeeze(A), _squeeze(B)


def transfer_AB_tilde(coords):
    """Partner coefficients ``(A~, B~)`` built from the reciprocal functions.

    They should equal ``(conj(A), conj(B))``; computing them separately gives
    an independent consistency check of the basis.
    """
    nu = coords.nu
    if nu < LOW_GAIN_NU:
        A, B = transfer_AB(coords)
        return _squeeze(np.conj(A)), _squeeze(np.conj(B))
    x0, xl, s = coords.x0, coords.xL, coords.sigma
    w = np.exp(-0.25j * math.pi + 0.5 * math.pi * nu)
    ph1_0, ph2_0 = pcf_basis(nu, x0)
    t1_0 = pcf_d_reciprocal(PcfOrder.D_inu, x0, nu)
    t2_0 = pcf_d_reciprocal(PcfOrder.D_minus1_minus_inu, x0, nu)
    t1_l = pcf_d_reciprocal(PcfOrder.D_inu, xl, nu)
    t2_l = pcf_d_reciprocal(PcfOrder.D_minus1_minus_inu, xl, nu)
    At = -(s / w) * (t1_l * ph2_0 - t2_l * ph1_0)
    Bt = (s / w) * (t1_l * t2_0 - t2_l * t1_0)
    return _squeeze(At), _squeeze(Bt)


def _dispersion_phase(config, Omega):
    L = config.length_L
    d = np.asarray(phase_mismatch(config, Omega))
    return wavevector(config, Omega) * L + 0.5 * (d * L + 0.5 * config.chirp_zeta * L * L)


def transfer_UV(config, Omega, A, B):
    """Lab-frame coefficients ``U``, ``V`` from the scaled ``A``, ``B``.

    ``U = A exp(i[kL + (Delta L + zeta L^2/2)/2])`` and ``V`` is ``i B`` with the
    same phase plus the pump phase.
    """
    ph = _dispersion_phase(config, Omega)
    U = np.asarray(A) * np.exp(1j * ph)
    V = 1j * np.asarray(B) * np.exp(1j * (ph + config.pump_phase_phi))
    return _squeeze(U), _squeeze(V)


def optical_spectrum(V):
    """Photon-flux spectral density ``|V|^2 / 2 pi``."""
    out = np.abs(V) ** 2 / (2 * math.pi)
    return float(out) if np.ndim(out) == 0 else out


def squeezing_spectrum(U, V, tol=1e-6):
    """Squeezed and stretched quadrature spectra.

    Returns
    -------
    S2, S1, r
        ``r = ln(|U| + |V|)``, ``S2 = exp(-2r)``, ``S1 = exp(2r)``.
    """
    au, av = np.abs(U), np.abs(V)
    res = np.abs(au * au - av * av - 1)
    if np.any(res > tol):
        raise UnitarityError(f"|U|^2 - |V|^2 deviates from 1 by {float(np.max(res)):.3g}")
    r = np.log(au + av)
    S2, S1 = np.exp(-2 * r), np.exp(2 * r)
    if np.ndim(r) == 0:
        return float(S2), float(S1), float(r)
    return S2, S1, r


def squeezing_angle(U_pos, V_neg):
    """Principal squeezing angle ``arg(U(Omega) V(-Omega)) / 2`` in ``(-pi/2, pi/2]``."""
    if np.any(np.abs(V_neg) < 1e-12):
        raise UndefinedAngleError("|V| < 1e-12: no squeezing direction")
    out = 0.5 * np.angle(np.asarray(U_pos) * np.asarray(V_neg))
    return float(out) if np.ndim(out) == 0 else out


def unwrap_phase(samples, period=math.pi):
    """Remove jumps of ``period`` so adjacent samples differ by less than ``period/2``.

    Warns with :class:`PhaseAliasingWarning` when a raw step, reduced modulo
    ``period``, lies within 10% of the ``period/2`` decision boundary.
    """
    s = np.asarray(samples, dtype=float)
    if s.size < 2:
        return s.copy()
    step = np.diff(s)
    red = step - period * np.round(step / period)
    if np.any(np.abs(red) > 0.9 * 0.5 * period):
        warnings.warn(
            "phase steps approach half the unwrap period; grid may be too coarse",
            PhaseAliasingWarning,
            stacklevel=2,
        )
    return s[0] + np.concatenate(([0.0], np.cumsum(red)))


def compensation_angle(config, Omega):
    """Low-gain compensation angle ``Delta^2/(4 zeta) - [k(Omega) + k(-Omega)] L / 2``."""
    a = np.abs(np.asarray(Omega, dtype=float))
    d = np.asarray(phase_mismatch(config, a))
    ksum = wavevector(config, a) + wavevector(config, -a)
    out = d * d / (4 * config.chirp_zeta) - 0.5 * ksum * config.length_L
    return float(out) if out.ndim == 0 else out


@dataclass
class TransferCoefficients:
    """Per-detuning ``A, B, U, V``, squeeze parameter and unwrapped angle."""

    A: np.ndarray
    B: np.ndarray
    U: np.ndarray
    V: np.ndarray
    r: np.ndarray
    psi: np.ndarray


@dataclass
class SpectraResult:
    """Spectra on a detuning grid for one crystal configuration."""

    grid: DetuningGrid
    config: object
    coeffs: TransferCoefficients = field(repr=False)
    S_optical: np.ndarray = field(repr=False)
    S_squeeze: np.ndarray = field(repr=False)
    S_stretch: np.ndarray = field(repr=False)
    psi_unwrapped: np.ndarray = field(repr=False)
    theta0: np.ndarray = field(repr=False)
    coords: ScaledCoords = field(repr=False, default=None)

    @property
    def detunings(self):
        return self.grid.detunings


def _chunks(n, parts):
    edges = np.linspace(0, n, parts + 1).astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def compute_spectra(config, grid, threads=1):
    """Evaluate every spectral quantity on ``grid``.

    The grid map may be split over ``threads`` worker threads; each chunk is
    a pure function of its detunings, so the result does not depend on the
    thread count.
    """
    Omega = grid.detunings
    coords = ScaledCoords.from_config(config, Omega)
    threads = max(1, int(threads))
    if threads == 1:
        A, B = transfer_AB(coords)
    else:
        parts = _chunks(Omega.size, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            res = list(pool.map(lambda sl: transfer_AB(coords[sl]), parts))
        A = np.concatenate([np.atleast_1d(a) for a, _ in res])
        B = np.concatenate([np.atleast_1d(b) for _, b in res])
    U, V = transfer_UV(config, Omega, A, B)
    S2, S1, r = squeezing_spectrum(U, V)
    pair = grid.pairing
    psi = unwrap_phase(squeezing_angle(U, V[pair]))
    coeffs = TransferCoefficients(A, B, U, V, r, psi)
    return SpectraResult(
        grid=grid,
        config=config,
        coeffs=coeffs,
        S_optical=optical_spectrum(V),
        S_squeeze=S2,
        S_stretch=S1,
        psi_unwrapped=psi,
        theta0=compensation_angle(config, Omega),
        coords=coords,
    )
