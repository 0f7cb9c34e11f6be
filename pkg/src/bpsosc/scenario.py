"""Scenario files: JSON input validated against a versioned schema.

Complex numbers are [re, im] pairs (or {"r", "theta"} for points of the
t grid), rationals are "p/q" strings.  ``load_scenario`` resolves every
optional field and records which defaults were applied.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
import cmath
import hashlib
import json
import math

import jsonschema

from .core import BpsStructure, SkewForm, as_charge
from .errors import BpsoscError, ValidationError
from .gv import CurveClassTable
from .quadrature import PROFILES, default_rule, quad_profile

__all__ = ["Scenario", "load_scenario", "parse_scenario", "scenario_hash", "schema"]

DEFAULTS = {
    "name": "",
    "support_constant": 0.0,
    "ray_angle": -math.pi / 2,
    "hbar": [0.1],
    "t": [[1.0, 0.0]],
    "M": [50, 100, 200, 400],
    "oscillator_m": [1],
    "oscillator_N": 4,
    "tau_h": 1e-4,
    "rh_max_iter": 200,
    "rh_tol": 1e-14,
    "gv_chi": 0,
    "gv_g_max": 3,
    "gv_n_window": 400,
    "gv_tau_t": [0.0, 1.0],
    "seed": 0,
}


def schema():
    text = resources.files("bpsosc").joinpath("schema/scenario.schema.json").read_text()
    return json.loads(text)


def scenario_hash(raw):
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _complex(pair):
    return complex(pair[0], pair[1])


def _point(p):
    if isinstance(p, dict):
        return cmath.rect(p["r"], p["theta"])
    return _complex(p)


@dataclass
class Scenario:
    raw: dict
    hash: str
    name: str
    structure: BpsStructure
    basis_labels: list
    ray_angle: float
    hbar: list
    t: list
    M: list
    quadrature: dict
    oscillators: list
    frobenius_subsets: list
    tau_h: float
    rh: dict
    gv: dict
    seed: int
    defaults_applied: list = field(default_factory=list)

    def rule(self):
        q = self.quadrature
        return default_rule(q["profile"], nodes=q["nodes_per_panel"], levels=q["levels"],
                            width=q["panel_width"], cutoff=q["cutoff"])

    def resolved(self):
        """Every resolved parameter, in JSON-friendly form."""
        s = self.structure
        return {
            "name": self.name,
            "rank": s.rank,
            "pairing": [list(r) for r in s.form.matrix],
            "basis_labels": self.basis_labels,
            "z": [[z.real, z.imag] for z in s.z],
            "spectrum": [{"class": list(c), "omega": str(v)} for c, v in s.omega.items()],
            "support_constant": s.support_constant,
            "ray_angle": self.ray_angle,
            "hbar": self.hbar,
            "t": [[t.real, t.imag] for t in self.t],
            "M": self.M,
            "quadrature": self.quadrature,
            "oscillators": [{"gamma": list(o["gamma"]), "beta": list(o["beta"]), "m": o["m"]}
                            for o in self.oscillators],
            "frobenius_subsets": [[list(c) for c in d] for d in self.frobenius_subsets],
            "tau_h": self.tau_h,
            "rh": {"t": [[t.real, t.imag] for t in self.rh["t"]], "max_iter": self.rh["max_iter"],
                   "tol": self.rh["tol"]},
            "gv": None if self.gv is None else {
                "chi": self.gv["chi"], "g_max": self.gv["g_max"], "n_window": self.gv["n_window"],
                "tau_t": [self.gv["tau_t"].real, self.gv["tau_t"].imag],
                "curve_classes": [{"label": c.label, "gv0": str(c.gv0), "v": [c.v.real, c.v.imag]}
                                  for c in self.gv["table"]],
                "omega": {k: str(v) for k, v in self.gv["omega"].items()},
            },
            "seed": self.seed,
        }


def _with_field(err, path):
    if isinstance(err, BpsoscError) and not err.field:
        err.field = path
    return err


def parse_scenario(raw, seed=None):
    """Validate a decoded scenario and resolve defaults."""
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = errors[0]
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ValidationError(f"scenario does not match schema: {e.message}", path)
    applied = []

    def get(key, default_key=None, src=raw):
        if key in src:
            return src[key]
        dk = default_key or key
        applied.append(dk)
        return DEFAULTS[dk]

    rank = raw["rank"]
    try:
        form = SkewForm(raw["pairing"])
    except BpsoscError as err:
        raise _with_field(err, "pairing")
    if form.rank != rank:
        raise ValidationError(f"pairing is {form.rank}x{form.rank} but rank is {rank}", "pairing")
    if len(raw["z"]) != rank:
        raise ValidationError(f"z needs {rank} entries", "z")
    labels = raw.get("basis_labels")
    if labels is None:
        labels = [f"b{k}" for k in range(rank)]
        applied.append("basis_labels")
    if len(labels) != rank:
        raise ValidationError(f"basis_labels needs {rank} entries", "basis_labels")
    spectrum = {}
    for k, item in enumerate(raw["spectrum"]):
        c = as_charge(item["class"])
        if len(c) != rank:
            raise ValidationError(f"class {c} has wrong length", f"spectrum/{k}/class")
        if c in spectrum:
            raise ValidationError(f"class {c} listed twice", f"spectrum/{k}/class")
        try:
            spectrum[c] = Fraction(item["omega"].replace(" ", ""))
        except ZeroDivisionError:
            raise ValidationError("zero denominator", f"spectrum/{k}/omega")
    try:
        structure = BpsStructure(form, [_complex(z) for z in raw["z"]], spectrum,
                                 get("support_constant"))
    except BpsoscError as err:
        # core names its arguments; point at the scenario field instead
        err.field = {"omega": "spectrum"}.get(err.field, err.field)
        raise _with_field(err, "spectrum")

    quad_raw = raw.get("quadrature", {})
    profile = quad_profile()
    base = PROFILES[profile]
    quadrature = {"profile": profile}
    for key, pkey in (("panel_width", "width"), ("nodes_per_panel", "nodes"), ("cutoff", "cutoff"), ("levels", "levels")):
        if key in quad_raw:
            quadrature[key] = quad_raw[key]
        else:
            quadrature[key] = base[pkey]
            applied.append(f"quadrature.{key}")

    oscillators = []
    osc_raw = raw.get("oscillators")
    if osc_raw is None:
        applied.append("oscillators")
        # every active class in the half-plane paired with every basis vector it sees
        from .largen import half_plane_family
        try:
            fam = half_plane_family(structure, get("ray_angle"))
        except BpsoscError as err:
            raise _with_field(err, "ray_angle")
        for c in fam:
            for j in range(rank):
                b = tuple(int(i == j) for i in range(rank))
                if structure.pairing(c, b) != 0:
                    oscillators.append({"gamma": c, "beta": b, "m": list(DEFAULTS["oscillator_m"])})
    else:
        for k, o in enumerate(osc_raw):
            g, b = as_charge(o["gamma"]), as_charge(o["beta"])
            if len(g) != rank or len(b) != rank:
                raise ValidationError("oscillator charges have wrong length", f"oscillators/{k}")
            if structure.pairing(g, b) == 0:
                raise ValidationError("<gamma, beta> must be nonzero", f"oscillators/{k}")
            if structure.central_charge(g) == 0:
                raise ValidationError("Z(gamma) must be nonzero", f"oscillators/{k}/gamma")
            m = o.get("m")
            if m is None:
                m = list(DEFAULTS["oscillator_m"])
                applied.append(f"oscillators/{k}/m")
            oscillators.append({"gamma": g, "beta": b, "m": sorted(set(m))})

    frob = raw.get("frobenius", {})
    if "subsets" in frob:
        subsets = []
        for k, d in enumerate(frob["subsets"]):
            d = [as_charge(c) for c in d]
            if any(len(c) != rank for c in d):
                raise ValidationError("subset charges have wrong length", f"frobenius/subsets/{k}")
            subsets.append(d)
    else:
        from .frobenius import oscillator_subset
        N = get("oscillator_N", src=frob)
        subsets = [oscillator_subset(o["gamma"], o["beta"], N, form) for o in oscillators]

    gv = None
    if "gv" in raw:
        g = raw["gv"]
        try:
            table = CurveClassTable({c["label"]: (c["gv0"], _complex(c["v"])) for c in g["curve_classes"]})
        except BpsoscError as err:
            raise _with_field(err, "gv/curve_classes")
        omega = {c["label"]: Fraction(c.get("omega", c["gv0"]).replace(" ", "")) for c in g["curve_classes"]}
        gv = {
            "chi": get("chi", "gv_chi", g),
            "table": table,
            "omega": omega,
            "g_max": get("g_max", "gv_g_max", g),
            "n_window": get("n_window", "gv_n_window", g),
            "tau_t": _complex(get("tau_t", "gv_tau_t", g)),
        }

    rh_raw = raw.get("rh", {})
    t_grid = [_point(p) for p in get("t")]
    if "t" in rh_raw:
        rh_t = [_point(p) for p in rh_raw["t"]]
    else:
        rh_t = t_grid
        applied.append("rh.t")
    rh = {"t": rh_t, "max_iter": get("max_iter", "rh_max_iter", rh_raw), "tol": get("tol", "rh_tol", rh_raw)}

    M = sorted(set(get("M")))
    if len(M) < 4:
        raise ValidationError("M needs at least 4 distinct truncations", "M")
    if seed is not None:
        seed_value = int(seed)
    else:
        seed_value = get("seed")
    return Scenario(
        raw=raw,
        hash=scenario_hash(raw),
        name=get("name"),
        structure=structure,
        basis_labels=list(labels),
        ray_angle=float(get("ray_angle")),
        hbar=[float(h) for h in get("hbar")],
        t=t_grid,
        M=M,
        quadrature=quadrature,
        oscillators=oscillators,
        frobenius_subsets=subsets,
        tau_h=float(get("h", "tau_h", raw.get("tau", {}))),
        rh=rh,
        gv=gv,
        seed=seed_value,
        defaults_applied=sorted(set(applied)),
    )


def load_scenario(path, seed=None):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"scenario file not found: {path}", "--scenario")
    except json.JSONDecodeError as err:
        raise ValidationError(f"scenario is not valid JSON: {err}", "--scenario")
    return parse_scenario(raw, seed)
