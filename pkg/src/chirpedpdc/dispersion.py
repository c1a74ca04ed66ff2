"""Refractive index, wavevectors and phase mismatch for a linearly chirped QPM grating.

Detunings ``Omega`` are angular frequencies (rad/s) measured from the
degenerate frequency ``omega0 = omega_p / 2``; the signal sits at
``omega0 + Omega`` and the idler at ``omega0 - Omega``.  Wavelengths are in
micrometres, lengths in metres and wavevectors in 1/m.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.optimize import brentq

__all__ = [
    "C_LIGHT",
    "RangeError",
    "InfeasibleDesignError",
    "SellmeierModel",
    "CrystalConfig",
    "DetuningGrid",
    "refractive_index",
    "wavevector",
    "phase_mismatch",
    "design_grating",
    "center_grating",
    "phase_matched_band",
    "make_grid",
    "omega_to_um",
    "um_to_omega",
]


class RangeError(ValueError):
    """Wavelength outside the validity range of a dispersion model."""


class InfeasibleDesignError(ValueError):
    """No positive chirp phase-matches the requested band."""


def omega_to_um(omega):
    """Vacuum wavelength in micrometres for angular frequency ``omega`` (rad/s)."""
    return 2e6 * np.pi * C_LIGHT / np.asarray(omega, dtype=float)


def um_to_omega(lambda_um):
    """Angular frequency (rad/s) for a vacuum wavelength in micrometres."""
    return 2e6 * np.pi * C_LIGHT / np.asarray(lambda_um, dtype=float)


@dataclass(frozen=True)
class SellmeierModel:
    """Sellmeier dispersion ``n**2 = constant + sum_i B_i l**2 / (l**2 - C_i)``.

    ``coefficients`` is the flat ordered sequence ``(B_1, C_1, B_2, C_2, ...)``
    with ``l`` in micrometres and ``C_i`` in square micrometres.
    """

    coefficients: tuple
    valid_range: tuple
    label: str = ""
    constant: float = 1.0

    def __post_init__(self):
        coeffs = tuple(float(v) for v in self.coefficients)
        if not coeffs or len(coeffs) % 2:
            raise ValueError("Sellmeier coefficients must come in (B, C) pairs")
        lo, hi = (float(v) for v in self.valid_range)
        if not 0 < lo < hi:
            raise ValueError(f"invalid Sellmeier range {self.valid_range!r}")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "valid_range", (lo, hi))
        object.__setattr__(self, "constant", float(self.constant))

    def to_dict(self):
        return {
            "label": self.label,
            "constant": self.constant,
            "coefficients": list(self.coefficients),
            "valid_range_um": list(self.valid_range),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            coefficients=tuple(d["coefficients"]),
            valid_range=tuple(d["valid_range_um"]),
            label=d.get("label", ""),
            constant=d.get("constant", 1.0),
        )


def refractive_index(model, lambda_um):
    """Index of refraction at vacuum wavelength ``lambda_um`` (scalar or array)."""
    lam = np.asarray(lambda_um, dtype=float)
    lo, hi = model.valid_range
    if np.any(~np.isfinite(lam)) or np.any(lam < lo) or np.any(lam > hi):
        bad = lam[(lam < lo) | (lam > hi) | ~np.isfinite(lam)]
        raise RangeError(
            f"wavelength {float(bad.flat[0]):.6g} um outside the valid range "
            f"[{lo}, {hi}] um of {model.label or 'the Sellmeier model'}"
        )
    l2 = lam * lam
    n2 = np.full(lam.shape, model.constant)
    co = model.coefficients
    for b, cc in zip(co[0::2], co[1::2]):
        n2 = n2 + b * l2 / (l2 - cc)
    n = np.sqrt(n2)
    return float(n) if n.ndim == 0 else n


@dataclass(frozen=True)
class CrystalConfig:
    """Crystal, grating and pump description.

    The local grating wavevector is ``K(z) = grating_K0 - chirp_zeta * z``.
    ``coupling_kappa_mag`` is the modulus of the nonlinear coupling and
    ``pump_phase_phi`` its phase.
    """

    length_L: float
    chirp_zeta: float
    grating_K0: float
    coupling_kappa_mag: float
    pump_wavelength: float
    sellmeier: SellmeierModel
    pump_phase_phi: float = 0.0

    def __post_init__(self):
        if not self.length_L > 0:
            raise ValueError("crystal length must be positive")
        if not self.chirp_zeta > 0:
            raise ValueError("chirp must be positive")
        if not self.coupling_kappa_mag >= 0:
            raise ValueError("coupling magnitude must be non-negative")
        if not self.pump_wavelength > 0:
            raise ValueError("pump wavelength must be positive")

    @property
    def sigma(self):
        return self.coupling_kappa_mag / np.sqrt(self.chirp_zeta)

    @property
    def nu(self):
        return self.coupling_kappa_mag ** 2 / self.chirp_zeta

    @property
    def omega_p(self):
        return float(um_to_omega(self.pump_wavelength))

    @property
    def omega0(self):
        return 0.5 * self.omega_p

    @property
    def k_pump(self):
        n = refractive_index(self.sellmeier, self.pump_wavelength)
        return n * self.omega_p / C_LIGHT

    @property
    def scaled_length(self):
        """``L * sqrt(zeta)``, the crystal length in scaled units."""
        return self.length_L * np.sqrt(self.chirp_zeta)

    def with_nu(self, nu):
        """Copy with the coupling set so that ``kappa**2 / zeta == nu``."""
        return _replace(self, coupling_kappa_mag=float(np.sqrt(nu * self.chirp_zeta)))

    def replace(self, **changes):
        return _replace(self, **changes)


def _replace(cfg, **changes):
    from dataclasses import replace

    return replace(cfg, **changes)


def wavevector(config, Omega):
    """``k(Omega) = n(omega0 + Omega) (omega0 + Omega) / c`` in 1/m."""
    w = config.omega0 + np.asarray(Omega, dtype=float)
    if np.any(w <= 0):
        raise RangeError("omega0 + Omega must be positive")
    return refractive_index(config.sellmeier, omega_to_um(w)) * w / C_LIGHT


def _pair_sum(config, Omega):
    a = np.abs(np.asarray(Omega, dtype=float))
    # symmetric in Omega by construction: only |Omega| enters
    return wavevector(config, a) + wavevector(config, -a)


def phase_mismatch(config, Omega):
    """``Delta(Omega) = k_p - [k(Omega) + k(-Omega) + K0]``, exactly even in Omega."""
    d = config.k_pump - _pair_sum(config, Omega) - config.grating_K0
    return float(d) if np.ndim(d) == 0 else d


def _raw_mismatch(sellmeier, pump_um, Omega):
    cfg = CrystalConfig(1.0, 1.0, 0.0, 0.0, pump_um, sellmeier)
    return phase_mismatch(cfg, Omega)


def design_grating(sellmeier, pump_wavelength, band, length_L, orientation="forward"):
    """Grating start ``K0`` and chirp ``zeta`` that phase-match ``band`` along the crystal.

    ``band`` is a pair of vacuum wavelengths (um).  Each edge is mapped to its
    detuning magnitude; the mismatch is even so the conjugate wavelengths are
    phase-matched as well.  With ``orientation="forward"`` the edge with the
    smaller mismatch magnitude after design is matched at ``z = 0`` and the
    other at ``z = L``; ``"reversed"`` swaps them, which needs a negative chirp
    for normally dispersive crystals and is reported as infeasible.

    Returns
    -------
    (K0, zeta) : tuple of float
    """
    if orientation not in ("forward", "reversed"):
        raise ValueError("orientation must be 'forward' or 'reversed'")
    omega0 = 0.5 * float(um_to_omega(pump_wavelength))
    edges = [abs(float(um_to_omega(lam)) - omega0) for lam in band]
    raw = [_raw_mismatch(sellmeier, pump_wavelength, w) for w in edges]
    hi, lo = max(raw), min(raw)
    if orientation == "forward":
        k0, zeta = hi, (hi - lo) / length_L
    else:
        k0, zeta = lo, (lo - hi) / length_L
    if not zeta > 0:
        raise InfeasibleDesignError(
            f"band {tuple(band)} um needs chirp {zeta:.4g} 1/m^2 (must be > 0)"
        )
    return float(k0), float(zeta)


def center_grating(sellmeier, pump_wavelength, band, length_L, zeta, center="mismatch"):
    """``K0`` that phase-matches the centre of ``band`` at the middle of the crystal.

    ``center="mismatch"`` takes the midpoint of the two edge mismatches, which
    for the chirp of :func:`design_grating` reproduces its ``K0``.
    ``center="frequency"`` takes the mid-frequency of the band instead; with a
    small chirp the matched window is then a narrow slice around the band's
    central frequency.
    """
    if not zeta > 0:
        raise InfeasibleDesignError("chirp must be positive")
    omega0 = 0.5 * float(um_to_omega(pump_wavelength))
    edges = [abs(float(um_to_omega(lam)) - omega0) for lam in band]
    if center == "mismatch":
        raw = [_raw_mismatch(sellmeier, pump_wavelength, w) for w in edges]
        mid = 0.5 * (raw[0] + raw[1])
    elif center == "frequency":
        mid = _raw_mismatch(sellmeier, pump_wavelength, 0.5 * (edges[0] + edges[1]))
    else:
        raise ValueError("center must be 'mismatch' or 'frequency'")
    return float(mid + 0.5 * zeta * length_L)


def _max_detuning(config):
    lo, hi = config.sellmeier.valid_range
    w0 = config.omega0
    # both omega0 + Omega <= omega(lo) and omega0 - Omega >= omega(hi)
    lim = min(float(um_to_omega(lo)) - w0, w0 - float(um_to_omega(hi)))
    if not lim > 0:
        raise RangeError("Sellmeier range does not contain the degenerate wavelength")
    return lim * (1 - 1e-12)


def phase_matched_band(config):
    """Detunings ``(Omega_a, Omega_b)``, ``0 <= Omega_a < Omega_b``, matched at z = 0 and z = L.

    Solves ``Delta(Omega) = 0`` and ``Delta(Omega) = -zeta L`` on the positive
    axis; an endpoint falls back to 0 when the degenerate point is already
    inside the matched window.
    """
    wmax = _max_detuning(config)
    target = (0.0, -config.chirp_zeta * config.length_L)

    def root(t):
        f = lambda w: phase_mismatch(config, w) - t
        f0, f1 = f(0.0), f(wmax)
        if f0 * f1 > 0:
            if (f0 < 0) == (t == 0.0):
                return 0.0
            raise RangeError("phase-matched band extends beyond the Sellmeier range")
        return brentq(f, 0.0, wmax, xtol=1e3, rtol=1e-14)

    a, b = sorted(root(t) for t in target)
    return a, b


@dataclass(frozen=True)
class DetuningGrid:
    """Strictly increasing detunings symmetric about zero.

    ``pairing[j]`` is the index of ``-detunings[j]``.
    """

    omega0: float
    detunings: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.asarray(self.detunings, dtype=float)
        if d.ndim != 1 or d.size < 2:
            raise ValueError("grid needs at least two detunings")
        if np.any(np.diff(d) <= 0):
            raise ValueError("detunings must be strictly increasing")
        if not np.array_equal(d, -d[::-1]):
            raise ValueError("detuning grid must be symmetric about zero")
        d.setflags(write=False)
        object.__setattr__(self, "detunings", d)

    @property
    def pairing(self):
        return np.arange(self.detunings.size)[::-1]

    @property
    def size(self):
        return self.detunings.size

    @property
    def wavelengths_um(self):
        return omega_to_um(self.omega0 + self.detunings)


def make_grid(config, n_points=2 ** 14, omega_max=None):
    """Uniform symmetric grid over ``[-omega_max, omega_max]``.

    ``omega_max`` defaults to the largest detuning that keeps both the signal
    and the idler inside the Sellmeier range.
    """
    wmax = _max_detuning(config)
    if omega_max is None:
        omega_max = wmax
    elif omega_max > wmax:
        raise RangeError(
            f"omega_max {omega_max:.4g} rad/s exceeds the Sellmeier-limited {wmax:.4g} rad/s"
        )
    n = int(n_points)
    j = np.arange(n, dtype=float)
    d = omega_max * (2 * j - (n - 1)) / (n - 1)
    return DetuningGrid(config.omega0, d)
