"""Scenario execution: spectra, correlator trace, summary and output tables."""

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .core import compute_spectra
from .dispersion import make_grid, omega_to_um, phase_matched_band
from .scenario import dump_scenario
from .shg import correlator_trace, first_zero, sh_incoherent_spectrum, signal_center

__all__ = ["RunResult", "SelfCheckError", "run_scenario", "summarize", "write_outputs", "table"]

_SELF_CHECK = 1e-8


class SelfCheckError(ArithmeticError):
    """A computed run violates an identity it must satisfy."""


@dataclass
class RunResult:
    scenario: object
    config: object
    spectra: object
    trace: Optional[object] = None
    summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)


def _self_checks(spectra):
    c = spectra.coeffs
    vals = {
        "unitarity": float(np.max(np.abs(np.abs(c.A) ** 2 - np.abs(c.B) ** 2 - 1))),
        "uncertainty": float(np.max(np.abs(spectra.S_squeeze * spectra.S_stretch - 1))),
        "spectrum_symmetry": float(np.max(np.abs(spectra.S_optical - spectra.S_optical[::-1]))),
    }
    bad = {k: v for k, v in vals.items() if not v <= _SELF_CHECK}
    if bad:
        msg = ", ".join(f"{k} residual {v:.3g}" for k, v in bad.items())
        raise SelfCheckError(f"self-check failed: {msg} (limit {_SELF_CHECK:g})")
    return vals


def _half_max_edges(spectra):
    om = spectra.grid.detunings
    pos = om > 0
    s = spectra.S_optical[pos]
    above = np.nonzero(s >= 0.5 * s.max())[0]
    w = om[pos]
    i, j = above[0], above[-1]

    def cross(k, k2):
        # linear interpolation of the half-maximum crossing between k and k2
        if k2 < 0 or k2 >= s.size:
            return w[k]
        half = 0.5 * s.max()
        return w[k] + (half - s[k]) * (w[k2] - w[k]) / (s[k2] - s[k])

    lo, hi = cross(i, i - 1), cross(j, j + 1)
    return float(omega_to_um(spectra.grid.omega0 + hi)), float(omega_to_um(spectra.grid.omega0 + lo))


def summarize(result):
    """Headline numbers of a run, as a flat dict."""
    sp, cfg, sc = result.spectra, result.config, result.scenario
    coords = sp.coords
    inb = coords.in_band()
    out = {
        "nu": cfg.nu,
        "zeta_per_m2": cfg.chirp_zeta,
        "K0_per_m": cfg.grating_K0,
    }
    wa, wb = phase_matched_band(cfg)
    out["matched_band_um"] = (float(omega_to_um(cfg.omega0 + wb)), float(omega_to_um(cfg.omega0 + wa)))
    out["half_max_band_um"] = _half_max_edges(sp)
    if inb.any():
        out["plateau_U"] = float(np.median(np.abs(sp.coeffs.U[inb])))
        out["S2_dB"] = float(10 * np.log10(np.median(sp.S_squeeze[inb])))
    else:
        out["plateau_U"] = float("nan")
        out["S2_dB"] = float("nan")
    lam = sp.grid.wavelengths_um
    lo, hi = sorted(sc.band_um)
    sel = (sp.grid.detunings > 0) & (lam >= lo) & (lam <= hi)
    out["psi_span_rad"] = float(np.ptp(sp.psi_unwrapped[sel])) if sel.any() else float("nan")
    if result.trace is not None:
        out["correlation_time_fs"] = first_zero(result.trace) * 1e15
        out["signal_center_rad_s"] = signal_center(sp)
    return out


def run_scenario(scenario, grid_points=None, threads=1):
    """Compute everything a scenario asks for.

    Raises
    ------
    SelfCheckError
        If unitarity, minimum uncertainty or spectral symmetry fail.
    """
    cfg = scenario.crystal()
    n = grid_points or scenario.grid_points
    grid = make_grid(cfg, n)
    sp = compute_spectra(cfg, grid, threads=threads)
    checks = _self_checks(sp)
    trace = None
    if scenario.correlator is not None:
        c = scenario.correlator
        taus = np.linspace(c.tau_min_s, c.tau_max_s, c.tau_points)
        trace = correlator_trace(sp, taus)
    res = RunResult(scenario, cfg, sp, trace, checks=checks)
    res.summary = summarize(res)
    return res


def table(result, quantity):
    """Column names and data array for one output quantity."""
    sp = result.spectra
    om = sp.grid.detunings
    lam = sp.grid.wavelengths_um
    c = sp.coeffs
    if quantity == "optical_spectrum":
        return ["wavelength_um", "detuning_rad_s", "value"], np.column_stack((lam, om, sp.S_optical))
    if quantity == "squeezing_spectrum":
        return ["wavelength_um", "detuning_rad_s", "value"], np.column_stack((lam, om, sp.S_squeeze))
    if quantity in ("squeezing_angle", "compensation_angle"):
        return ["detuning_rad_s", "psi_rad", "theta0_rad"], np.column_stack((om, sp.psi_unwrapped, sp.theta0))
    if quantity in ("shg_flux", "shg_quadrature"):
        t = result.trace
        if t is None:
            raise ValueError(f"{quantity} needs a correlator section")
        return ["tau_s", "phi_norm", "x_norm"], np.column_stack((t.taus, t.Phi, t.X))
    if quantity == "sh_incoherent":
        delta = 2 * om
        w = result.config.omega_p + delta
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            val = sh_incoherent_spectrum(sp, w)
        return ["wavelength_um", "detuning_rad_s", "value"], np.column_stack((omega_to_um(w), delta, val))
    if quantity == "transfer_coeffs":
        cols = ["wavelength_um", "detuning_rad_s"]
        data = [lam, om]
        for name in ("A", "B", "U", "V"):
            v = getattr(c, name)
            cols += [f"{name}_re", f"{name}_im"]
            data += [v.real, v.imag]
        return cols, np.column_stack(data)
    raise ValueError(f"unknown quantity {quantity!r}")


def _header(result, quantity):
    cfg = result.config
    lines = [
        f"chirpedpdc {__version__}",
        f"quantity: {quantity}",
        f"resolved: K0_per_m={cfg.grating_K0!r} zeta_per_m2={cfg.chirp_zeta!r} "
        f"kappa_per_m={cfg.coupling_kappa_mag!r} nu={cfg.nu!r} grid_points={result.spectra.grid.size}",
        "scenario:",
    ]
    lines += ["  " + ln for ln in dump_scenario(result.scenario).splitlines()]
    return lines


def write_outputs(result, out_dir):
    """Write every declared output under ``out_dir``; returns the paths."""
    out_dir = Path(out_dir)
    written = []
    for spec in result.scenario.outputs:
        cols, data = table(result, spec.quantity)
        path = out_dir / spec.path
        path.parent.mkdir(parents=True, exist_ok=True)
        if spec.format == "csv":
            head = "\n".join(_header(result, spec.quantity))
            with open(path, "w", newline="\n") as fh:
                for ln in head.splitlines():
                    fh.write(f"# {ln}\n")
                fh.write(",".join(cols) + "\n")
                np.savetxt(fh, data, fmt="%.17g", delimiter=",")
        else:
            doc = {
                "version": __version__,
                "quantity": spec.quantity,
                "scenario": result.scenario.to_dict(),
                "resolved": {
                    "K0_per_m": result.config.grating_K0,
                    "zeta_per_m2": result.config.chirp_zeta,
                    "kappa_per_m": result.config.coupling_kappa_mag,
                    "nu": result.config.nu,
                },
                "columns": cols,
                "data": [[float(v) for v in row] for row in data],
            }
            with open(path, "w") as fh:
                json.dump(doc, fh, indent=1, allow_nan=True)
                fh.write("\n")
        written.append(path)
    return written


def format_summary(summary):
    """Two-column text table of a summary dict."""
    rows = []
    for k, v in summary.items():
        if isinstance(v, tuple):
            s = " - ".join(f"{x:.6g}" for x in v)
        elif isinstance(v, float):
            s = f"{v:.6g}" if math.isfinite(v) else str(v)
        else:
            s = str(v)
        rows.append((k, s))
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {s}" for k, s in rows)
