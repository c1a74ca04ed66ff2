"""Identity checks behind ``chirpedpdc validate``.

Every check returns a :class:`Check` carrying its worst residual and the limit
it is held to, so a report shows how close each identity came.
"""

import math
import time
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .core import (
    ScaledCoords,
    compute_spectra,
    low_gain_A,
    low_gain_B,
    transfer_AB,
    transfer_AB_tilde,
)
from .dispersion import make_grid
from .oracle import IntegrationSettings, integrate_green
from .pipeline import _half_max_edges
from .specfun import PcfOrder, pcf_basis, pcf_d_reciprocal, wronskian_check

__all__ = ["Check", "NU_SET", "fast_checks", "full_checks", "run_checks"]

NU_SET = (1e-4, 0.146, 1.0)


@dataclass
class Check:
    name: str
    residual: float
    limit: float
    seconds: float = 0.0
    detail: str = ""

    @property
    def passed(self):
        return bool(self.residual <= self.limit)

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{tag}  {self.name:<34} residual={self.residual:.3e}  limit={self.limit:.1e}{extra}"

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _timed(name, limit, fn, detail=""):
    t = time.perf_counter()
    r = float(fn())
    if not math.isfinite(r):
        r = math.inf
    return Check(name, r, limit, time.perf_counter() - t, detail)


def _rel(a, b):
    return np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))


def _spectra(config, nu, n):
    cfg = config.with_nu(nu)
    return compute_spectra(cfg, make_grid(cfg, n))


def fast_checks(config, grid_points=1024):
    """Unitarity, evenness, partner and Wronskian checks on coarse grids."""
    out = []
    for nu in NU_SET:
        sp = _spectra(config, nu, grid_points)
        c = sp.coeffs
        out.append(_timed(
            f"unitarity nu={nu:g}", 1e-8,
            lambda: np.max(np.abs(np.abs(c.A) ** 2 - np.abs(c.B) ** 2 - 1)),
        ))
        out.append(_timed(
            f"evenness nu={nu:g}", 1e-8,
            lambda: max(
                _rel(c.A, c.A[::-1]), _rel(c.B, c.B[::-1]),
                np.max(np.abs(sp.S_optical - sp.S_optical[::-1])),
                np.max(np.abs(sp.S_squeeze - sp.S_squeeze[::-1])),
                np.max(np.abs(sp.theta0 - sp.theta0[::-1])),
                _rel(c.A / c.B, (c.A / c.B)[::-1]),
            ),
        ))
        out.append(_timed(
            f"uncertainty product nu={nu:g}", 1e-8,
            lambda: np.max(np.abs(sp.S_squeeze * sp.S_stretch - 1)),
        ))
        if nu >= 1e-6:
            sub = sp.coords[:: max(1, grid_points // 64)]

            def partner():
                A, B = transfer_AB(sub)
                At, Bt = transfer_AB_tilde(sub)
                return max(_rel(At, np.conj(A)), _rel(Bt, np.conj(B)))

            out.append(_timed(f"conjugate partner nu={nu:g}", 1e-8, partner))
    x = np.linspace(-50, 50, 201)
    for nu in (0.01, 0.146, 1.0):
        scale = math.exp(0.5 * math.pi * nu)
        out.append(_timed(f"wronskian nu={nu:g}", 1e-8, lambda: np.max(wronskian_check(nu, x)) / scale))
    return out


def _oracle_check(config, nu, n_points=50, grid_points=2 ** 14):
    cfg = config.with_nu(nu)
    grid = make_grid(cfg, grid_points)
    idx = np.linspace(0, grid.size - 1, n_points).round().astype(int)
    coords = ScaledCoords.from_config(cfg, grid.detunings[idx])
    A, B = transfer_AB(coords)
    g = integrate_green(coords, IntegrationSettings())
    return max(_rel(A, g.A_num), _rel(B, g.B_num))


def _reciprocal_fd(nu, x, h=2e-3):
    """Partner functions against ``(phi' + i x phi / 2) / sigma`` by 6th-order differences.

    The combination cancels by a factor ~x^2 on the decaying branch, so the
    difference formula has to be well below the target on its own.
    """
    s = math.sqrt(nu)
    worst = 0.0
    for k, tag in ((0, PcfOrder.D_inu), (1, PcfOrder.D_minus1_minus_inu)):
        f = lambda t: pcf_basis(nu, t)[k]
        d = (45 * (f(x + h) - f(x - h)) - 9 * (f(x + 2 * h) - f(x - 2 * h))
             + (f(x + 3 * h) - f(x - 3 * h))) / (60 * h)
        ref = (d + 0.5j * x * f(x)) / s
        got = pcf_d_reciprocal(tag, x, nu)
        worst = max(worst, float(np.max(np.abs(got - ref) / np.abs(got))))
    return worst


def full_checks(config, grid_points=2 ** 14):
    """Fast checks plus oracle agreement, low-gain limit, plateau and reciprocal functions."""
    out = fast_checks(config)
    for nu in NU_SET:
        out.append(_timed(f"oracle equivalence nu={nu:g}", 1e-6, lambda: _oracle_check(config, nu, grid_points=grid_points)))

    def low_gain():
        cfg = config.with_nu(1e-4)
        coords = ScaledCoords.from_config(cfg, make_grid(cfg, grid_points).detunings)
        A, B = transfer_AB(coords)
        return max(_rel(low_gain_A(coords), A), _rel(low_gain_B(coords), B))

    out.append(_timed("low-gain limit nu=1e-4", 1e-3, low_gain))

    def plateau():
        nu = 0.146
        sp = _spectra(config, nu, grid_points)
        c = sp.coords
        deep = (c.x0 <= -50 * math.sqrt(nu)) & (c.xL >= 10)
        return np.max(np.abs(np.abs(sp.coeffs.U[deep]) / math.exp(math.pi * nu) - 1))

    out.append(_timed("Rosenbluth plateau nu=0.146", 0.05, plateau))
    x = np.linspace(-30, 30, 61) + 0.123
    for nu in (0.146, 1.0):
        out.append(_timed(f"reciprocal finite difference nu={nu:g}", 1e-6, lambda: _reciprocal_fd(nu, x)))
    return out


def band_report(config, grid_points=2 ** 12):
    """Half-maximum band edges (um) at ``nu = 0.146``; dispersion-sensitive, not a pass/fail check."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sp = _spectra(config, 0.146, grid_points)
    return _half_max_edges(sp)


def run_checks(config, level="fast"):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if level == "fast":
            return fast_checks(config)
        if level == "full":
            return full_checks(config)
    raise ValueError("level must be 'fast' or 'full'")
