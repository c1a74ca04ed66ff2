"""Scenario files: YAML with explicit units in every key.

A scenario fixes the crystal, how its grating is laid out, the coupling, the
detuning grid, the delay scan and which tables to write.  Parsing is strict:
unknown keys, wrong types and out-of-range values raise :class:`ConfigError`
with the offending line.
"""

import copy
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .dispersion import CrystalConfig, SellmeierModel, center_grating, design_grating

__all__ = [
    "ConfigError",
    "QUANTITIES",
    "FORMATS",
    "GratingSpec",
    "CorrelatorSpec",
    "OutputSpec",
    "Scenario",
    "load_scenario",
    "parse_scenario",
    "dump_scenario",
    "load_material",
]

QUANTITIES = (
    "optical_spectrum",
    "squeezing_spectrum",
    "squeezing_angle",
    "compensation_angle",
    "shg_flux",
    "shg_quadrature",
    "sh_incoherent",
    "transfer_coeffs",
)
FORMATS = ("csv", "json")
_MATERIALS = Path(__file__).with_name("data") / "materials.yaml"


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e-14`` (no decimal point) as a float."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


class ConfigError(ValueError):
    """Invalid scenario, with the source line when known."""

    def __init__(self, message, path=None, line=None, source=None, text=None):
        self.path = path
        self.line = line
        self.source = source
        where = ""
        if source is not None or line is not None:
            where = f"{source or '<scenario>'}"
            if line is not None:
                where += f":{line}"
            where += ": "
        key = f"{'.'.join(str(p) for p in path)}: " if path else ""
        msg = f"{where}{key}{message}"
        if text is not None and line is not None:
            lines = text.splitlines()
            if 0 < line <= len(lines):
                msg += f"\n    {line} | {lines[line - 1]}"
        super().__init__(msg)


def load_material(name):
    """Sellmeier set ``name`` from the bundled materials table."""
    with open(_MATERIALS) as fh:
        table = yaml.load(fh, Loader=_Loader)
    if name not in table:
        raise KeyError(f"unknown material {name!r}; known: {', '.join(sorted(table))}")
    return SellmeierModel.from_dict(table[name])


@dataclass(frozen=True)
class GratingSpec:
    """How ``K0`` and ``zeta`` are obtained.

    ``design="edges"`` matches the band edges at the crystal faces;
    ``"centered"`` takes ``zeta_per_m2`` and centres the band (``center`` is
    ``"mismatch"`` or ``"frequency"``); ``"explicit"`` takes both numbers.
    """

    design: str = "edges"
    orientation: str = "forward"
    center: str = "mismatch"
    zeta_per_m2: Optional[float] = None
    K0_per_m: Optional[float] = None


@dataclass(frozen=True)
class CorrelatorSpec:
    tau_min_s: float
    tau_max_s: float
    tau_points: int


@dataclass(frozen=True)
class OutputSpec:
    quantity: str
    path: str
    format: str = "csv"


@dataclass(frozen=True)
class Scenario:
    """Parsed scenario; :meth:`crystal` resolves it into a :class:`CrystalConfig`."""

    name: str
    length_m: float
    pump_um: float
    sellmeier: SellmeierModel
    band_um: tuple
    grating: GratingSpec
    grid_points: int = 2 ** 14
    pump_phase_rad: float = 0.0
    kappa_per_m: Optional[float] = None
    nu_target: Optional[float] = None
    correlator: Optional[CorrelatorSpec] = None
    outputs: tuple = ()
    description: str = ""
    material: Optional[str] = field(default=None, compare=False)

    def grating_parameters(self):
        """``(K0, zeta)`` for this scenario."""
        g = self.grating
        if g.design == "edges":
            return design_grating(self.sellmeier, self.pump_um, self.band_um, self.length_m, g.orientation)
        if g.design == "centered":
            k0 = center_grating(self.sellmeier, self.pump_um, self.band_um, self.length_m, g.zeta_per_m2, g.center)
            return k0, g.zeta_per_m2
        return g.K0_per_m, g.zeta_per_m2

    def crystal(self):
        k0, zeta = self.grating_parameters()
        if self.nu_target is not None:
            kappa = math.sqrt(self.nu_target * zeta)
        else:
            kappa = self.kappa_per_m
        return CrystalConfig(
            length_L=self.length_m,
            chirp_zeta=zeta,
            grating_K0=k0,
            coupling_kappa_mag=kappa,
            pump_wavelength=self.pump_um,
            sellmeier=self.sellmeier,
            pump_phase_phi=self.pump_phase_rad,
        )

    def to_dict(self):
        g = self.grating
        grating = {"design": g.design}
        if g.design == "edges":
            grating["orientation"] = g.orientation
        if g.design == "centered":
            grating["center"] = g.center
        if g.design in ("centered", "explicit"):
            grating["zeta_per_m2"] = g.zeta_per_m2
        if g.design == "explicit":
            grating["K0_per_m"] = g.K0_per_m
        crystal = {
            "length_m": self.length_m,
            "pump_um": self.pump_um,
            "pump_phase_rad": self.pump_phase_rad,
            "sellmeier": self.sellmeier.to_dict(),
        }
        if self.kappa_per_m is not None:
            crystal["kappa_per_m"] = self.kappa_per_m
        d = {"name": self.name}
        if self.description:
            d["description"] = self.description
        d.update(crystal=crystal, grating=grating, band_um=list(self.band_um))
        if self.nu_target is not None:
            d["nu_target"] = self.nu_target
        d["grid_points"] = self.grid_points
        if self.correlator is not None:
            c = self.correlator
            d["correlator"] = {"tau_min_s": c.tau_min_s, "tau_max_s": c.tau_max_s, "tau_points": c.tau_points}
        d["outputs"] = [{"quantity": o.quantity, "path": o.path, "format": o.format} for o in self.outputs]
        return d

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _line_map(node, path=(), out=None):
    """Map key paths to 1-based source lines from a composed YAML tree."""
    if out is None:
        out = {}
    out.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = k.value
            out[path + (key,)] = k.start_mark.line + 1
            _line_map(v, path + (key,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_map(v, path + (i,), out)
    return out


class _Reader:
    def __init__(self, lines, source, text):
        self.lines = lines
        self.source = source
        self.text = text

    def fail(self, path, message):
        line = None
        p = tuple(path)
        while p and p not in self.lines:
            p = p[:-1]
        line = self.lines.get(p)
        raise ConfigError(message, path=tuple(path), line=line, source=self.source, text=self.text)

    def mapping(self, obj, path, allowed, required=()):
        if not isinstance(obj, dict):
            self.fail(path, "expected a mapping")
        for k in obj:
            if k not in allowed:
                self.fail(tuple(path) + (k,), f"unknown key (allowed: {', '.join(allowed)})")
        for k in required:
            if k not in obj:
                self.fail(path, f"missing required key {k!r}")
        return obj

    def number(self, obj, path, positive=False, nonneg=False, optional=False):
        if obj is None and optional:
            return None
        if isinstance(obj, bool) or not isinstance(obj, (int, float)):
            self.fail(path, f"expected a number, got {obj!r}")
        v = float(obj)
        if not math.isfinite(v):
            self.fail(path, "must be finite")
        if positive and not v > 0:
            self.fail(path, f"must be positive, got {v!r}")
        if nonneg and not v >= 0:
            self.fail(path, f"must be non-negative, got {v!r}")
        return v

    def integer(self, obj, path):
        if isinstance(obj, bool) or not isinstance(obj, int):
            self.fail(path, f"expected an integer, got {obj!r}")
        return obj

    def string(self, obj, path, choices=None):
        if not isinstance(obj, str):
            self.fail(path, f"expected a string, got {obj!r}")
        if choices is not None and obj not in choices:
            self.fail(path, f"must be one of {', '.join(choices)}; got {obj!r}")
        return obj


def _parse_sellmeier(r, obj, path):
    if isinstance(obj, str):
        try:
            return load_material(obj), obj
        except KeyError as exc:
            r.fail(path, str(exc.args[0]))
    r.mapping(obj, path, ("label", "constant", "coefficients", "valid_range_um"), ("coefficients", "valid_range_um"))
    co = obj["coefficients"]
    if not isinstance(co, list) or not co:
        r.fail(path + ("coefficients",), "expected a non-empty list of numbers")
    co = [r.number(v, path + ("coefficients", i)) for i, v in enumerate(co)]
    vr = obj["valid_range_um"]
    if not isinstance(vr, list) or len(vr) != 2:
        r.fail(path + ("valid_range_um",), "expected [min, max]")
    vr = [r.number(v, path + ("valid_range_um", i), positive=True) for i, v in enumerate(vr)]
    label = r.string(obj.get("label", ""), path + ("label",))
    const = r.number(obj.get("constant", 1.0), path + ("constant",))
    try:
        return SellmeierModel(tuple(co), tuple(vr), label, const), None
    except ValueError as exc:
        r.fail(path, str(exc))


def parse_scenario(text, source=None):
    """Parse scenario YAML ``text``; ``source`` names it in error messages."""
    try:
        node = yaml.compose(text, Loader=_Loader)
        data = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", line=line, source=source, text=text)
    if node is None:
        raise ConfigError("empty scenario", source=source)
    r = _Reader(_line_map(node), source, text)
    top = ("name", "description", "crystal", "grating", "band_um", "nu_target", "grid_points", "correlator", "outputs")
    r.mapping(data, (), top, ("name", "crystal", "grating", "band_um"))
    name = r.string(data["name"], ("name",))
    desc = r.string(data.get("description", ""), ("description",))

    cr = r.mapping(
        data["crystal"], ("crystal",),
        ("length_m", "pump_um", "pump_phase_rad", "sellmeier", "kappa_per_m"),
        ("length_m", "pump_um", "sellmeier"),
    )
    length = r.number(cr["length_m"], ("crystal", "length_m"), positive=True)
    pump = r.number(cr["pump_um"], ("crystal", "pump_um"), positive=True)
    phase = r.number(cr.get("pump_phase_rad", 0.0), ("crystal", "pump_phase_rad"))
    kappa = r.number(cr.get("kappa_per_m"), ("crystal", "kappa_per_m"), nonneg=True, optional=True)
    sm, material = _parse_sellmeier(r, cr["sellmeier"], ("crystal", "sellmeier"))

    band = data["band_um"]
    if not isinstance(band, list) or len(band) != 2:
        r.fail(("band_um",), "expected [edge_um, edge_um]")
    band = tuple(r.number(v, ("band_um", i), positive=True) for i, v in enumerate(band))
    lo, hi = sm.valid_range
    for i, lam in enumerate(band):
        if not lo <= lam <= hi:
            r.fail(("band_um", i), f"{lam} um outside the Sellmeier range [{lo}, {hi}] um")
    if band[0] == band[1]:
        r.fail(("band_um",), "band has zero width")

    gr = r.mapping(data["grating"], ("grating",), ("design", "orientation", "center", "zeta_per_m2", "K0_per_m"), ("design",))
    design = r.string(gr["design"], ("grating", "design"), ("edges", "centered", "explicit"))
    orient = r.string(gr.get("orientation", "forward"), ("grating", "orientation"), ("forward", "reversed"))
    center = r.string(gr.get("center", "mismatch"), ("grating", "center"), ("mismatch", "frequency"))
    zeta = k0 = None
    if design in ("centered", "explicit"):
        if "zeta_per_m2" not in gr:
            r.fail(("grating",), f"design {design!r} needs zeta_per_m2")
        zeta = r.number(gr["zeta_per_m2"], ("grating", "zeta_per_m2"), positive=True)
    if design == "explicit":
        if "K0_per_m" not in gr:
            r.fail(("grating",), "design 'explicit' needs K0_per_m")
        k0 = r.number(gr["K0_per_m"], ("grating", "K0_per_m"))
    for key, used in (("zeta_per_m2", zeta), ("K0_per_m", k0)):
        if key in gr and used is None:
            r.fail(("grating", key), f"not used by design {design!r}")
    grating = GratingSpec(design, orient, center, zeta, k0)

    nu = r.number(data.get("nu_target"), ("nu_target",), nonneg=True, optional=True)
    if nu is None and kappa is None:
        r.fail(("crystal",), "give either crystal.kappa_per_m or nu_target")

    npts = r.integer(data.get("grid_points", 2 ** 14), ("grid_points",))
    if npts < 2 ** 10 or npts & (npts - 1):
        r.fail(("grid_points",), f"must be a power of two >= 1024, got {npts}")

    corr = None
    if data.get("correlator") is not None:
        c = r.mapping(data["correlator"], ("correlator",), ("tau_min_s", "tau_max_s", "tau_points"), ("tau_min_s", "tau_max_s", "tau_points"))
        tmin = r.number(c["tau_min_s"], ("correlator", "tau_min_s"))
        tmax = r.number(c["tau_max_s"], ("correlator", "tau_max_s"))
        tp = r.integer(c["tau_points"], ("correlator", "tau_points"))
        if not tmax > tmin:
            r.fail(("correlator", "tau_max_s"), "tau_max_s must exceed tau_min_s")
        if tp < 3:
            r.fail(("correlator", "tau_points"), "need at least 3 delay samples")
        corr = CorrelatorSpec(tmin, tmax, tp)

    outs = data.get("outputs") or []
    if not isinstance(outs, list):
        r.fail(("outputs",), "expected a list")
    parsed = []
    for i, o in enumerate(outs):
        p = ("outputs", i)
        r.mapping(o, p, ("quantity", "path", "format"), ("quantity", "path"))
        q = r.string(o["quantity"], p + ("quantity",), QUANTITIES)
        fmt = r.string(o.get("format", "csv"), p + ("format",), FORMATS)
        path = r.string(o["path"], p + ("path",))
        if q in ("shg_flux", "shg_quadrature") and corr is None:
            r.fail(p + ("quantity",), f"{q} needs a correlator section")
        parsed.append(OutputSpec(q, path, fmt))

    scen = Scenario(
        name=name,
        length_m=length,
        pump_um=pump,
        sellmeier=sm,
        band_um=band,
        grating=grating,
        grid_points=npts,
        pump_phase_rad=phase,
        kappa_per_m=kappa,
        nu_target=nu,
        correlator=corr,
        outputs=tuple(parsed),
        description=desc,
        material=material,
    )
    return scen


def load_scenario(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario: {exc.strerror}", source=str(path))
    return parse_scenario(text, source=str(path))


def dump_scenario(scenario):
    """YAML text that parses back to an equal :class:`Scenario`."""
    return yaml.safe_dump(copy.deepcopy(scenario.to_dict()), sort_keys=False, default_flow_style=None)
