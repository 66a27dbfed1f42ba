"""JSON configuration documents: validation, defaults, and model building.

Top-level keys are "areas", "ties", "schedules", "sim", "studies"; unknown
keys are rejected anywhere in the document.  Parsing normalizes the document
(fills every default), so a validated config re-serializes and re-parses to
an identical model.
"""

import json
from dataclasses import dataclass

import numpy as np

from .agc import AreaSpec, GeneratorSpec, NetworkSpec, TieLine
from .errors import ConfigError
from .sim import SimConfig

_DEFAULT_KAPPAS = [0.25, 0.5, 1.0, 2.0, 4.0]


def _check_keys(obj, path, required, optional):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    for key in obj:
        if key not in required and key not in optional:
            raise ConfigError(f"{path}: unknown key {key!r}")
    for key in required:
        if key not in obj:
            raise ConfigError(f"{path}: missing required key {key!r}")


def _num(obj, path, key, default=None, positive=False):
    if key not in obj or obj[key] is None:
        val = default
    else:
        val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {val!r}")
    if positive and not val > 0:
        raise ConfigError(f"{path}.{key}: must be positive, got {val!r}")
    return float(val)


def _int(obj, path, key, default):
    val = obj.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {val!r}")
    return val


def _normalize_generator(g, path, n_units):
    _check_keys(g, path, required=(), optional=(
        "droop_r", "turbine_tc", "base_setpoint", "limits", "participation",
        "in_agc",
    ))
    in_agc = g.get("in_agc", True)
    if not isinstance(in_agc, bool):
        raise ConfigError(f"{path}.in_agc: expected a boolean")
    base = _num(g, path, "base_setpoint", default=1.0)
    if "limits" in g:
        lim = g["limits"]
        if (not isinstance(lim, list) or len(lim) != 2
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in lim)):
            raise ConfigError(f"{path}.limits: expected [lo, hi]")
        limits = [float(lim[0]), float(lim[1])]
    elif in_agc:
        limits = [base - 0.5, base + 0.5]
    else:
        limits = [base, base]
    out = {
        "droop_r": _num(g, path, "droop_r", default=0.05 * n_units, positive=True),
        "turbine_tc": _num(g, path, "turbine_tc", default=0.5, positive=True),
        "base_setpoint": base,
        "limits": limits,
        "in_agc": in_agc,
    }
    if in_agc:
        if "participation" in g:
            out["participation"] = _num(g, path, "participation")
    else:
        out["participation"] = 0.0
        if "participation" in g and g["participation"] not in (0, 0.0):
            raise ConfigError(f"{path}: non-AGC unit cannot have participation")
    return out


def _normalize_area(a, path, index):
    _check_keys(a, path, required=("generators",), optional=(
        "name", "inertia_m", "load_damping", "bias_b", "agc_tc", "sched_freq",
        "load_dev",
    ))
    name = a.get("name", f"area{index + 1}")
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{path}.name: expected a nonempty string")
    gens_in = a["generators"]
    if not isinstance(gens_in, list) or not gens_in:
        raise ConfigError(f"{path}.generators: expected a nonempty list")
    gens = [
        _normalize_generator(g, f"{path}.generators[{i}]", len(gens_in))
        for i, g in enumerate(gens_in)
    ]
    agc_units = [g for g in gens if g["in_agc"]]
    if not agc_units:
        raise ConfigError(f"{path}: at least one unit must participate in AGC")
    missing = [g for g in agc_units if "participation" not in g]
    if missing and len(missing) != len(agc_units):
        raise ConfigError(
            f"{path}: give participation for all AGC units or for none"
        )
    if missing:
        for g in agc_units:
            g["participation"] = 1.0 / len(agc_units)
    # derived default: ideal (non-interacting) bias equals the frequency
    # characteristic
    beta = _num(a, path, "load_damping", default=1.0, positive=True) + sum(
        1.0 / g["droop_r"] for g in gens
    )
    return {
        "name": name,
        "inertia_m": _num(a, path, "inertia_m", default=10.0, positive=True),
        "load_damping": _num(a, path, "load_damping", default=1.0, positive=True),
        "bias_b": _num(a, path, "bias_b", default=beta, positive=True),
        "agc_tc": _num(a, path, "agc_tc", default=100.0, positive=True),
        "sched_freq": _num(a, path, "sched_freq", default=60.0),
        "load_dev": _num(a, path, "load_dev", default=0.0),
        "generators": gens,
    }


@dataclass(frozen=True)
class ConfigDoc:
    """A validated, fully-normalized configuration document."""

    doc: dict

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.doc, **kwargs)

    def network(self) -> NetworkSpec:
        areas = []
        for a in self.doc["areas"]:
            gens = tuple(
                GeneratorSpec(
                    droop_r=g["droop_r"],
                    turbine_tc=g["turbine_tc"],
                    base_setpoint=g["base_setpoint"],
                    limits=tuple(g["limits"]),
                    participation=g["participation"],
                    in_agc=g["in_agc"],
                )
                for g in a["generators"]
            )
            areas.append(
                AreaSpec(
                    name=a["name"], inertia_m=a["inertia_m"],
                    load_damping=a["load_damping"], generators=gens,
                    bias_b=a["bias_b"], agc_tc=a["agc_tc"],
                    sched_freq=a["sched_freq"], load_dev=a["load_dev"],
                )
            )
        ties = tuple(
            TieLine(t["from_area"], t["to_area"], t["stiffness_t"])
            for t in self.doc["ties"]
        )
        sched = self.doc["schedules"]["net_interchange"]
        sched_ni = np.array([sched[a["name"]] for a in self.doc["areas"]])
        return NetworkSpec(
            tuple(areas), ties, sched_ni,
            self.doc["schedules"]["meas_filter_tc"],
        )

    def sim_config(self, kind: str = "full") -> SimConfig:
        s = self.doc["sim"]
        if kind == "full":
            return SimConfig(dt=s["dt"], horizon=s["horizon"],
                             record_stride=s["record_stride"], seed=s["seed"])
        if kind == "reduced":
            return SimConfig(dt=s["dt_reduced"], horizon=s["horizon"],
                             record_stride=1, seed=s["seed"])
        raise ConfigError(f"unknown sim kind {kind!r}")

    def study(self, name: str) -> dict:
        return self.doc["studies"][name]


def parse_config(obj) -> ConfigDoc:
    """Validate a raw JSON object and fill every default."""
    _check_keys(obj, "config", required=("areas",),
                optional=("ties", "schedules", "sim", "studies"))
    areas_in = obj["areas"]
    if not isinstance(areas_in, list) or not areas_in:
        raise ConfigError("config.areas: expected a nonempty list")
    areas = [_normalize_area(a, f"config.areas[{i}]", i) for i, a in enumerate(areas_in)]
    names = [a["name"] for a in areas]
    if len(set(names)) != len(names):
        raise ConfigError("config.areas: duplicate area names")

    # parallel lines between the same pair are merged by adding stiffnesses
    ties = []
    by_pair = {}
    for i, t in enumerate(obj.get("ties", [])):
        path = f"config.ties[{i}]"
        _check_keys(t, path, required=("from_area", "to_area"),
                    optional=("stiffness_t",))
        if t["from_area"] not in names or t["to_area"] not in names:
            raise ConfigError(f"{path}: unknown area name")
        stiff = _num(t, path, "stiffness_t", default=5.0, positive=True)
        pair = frozenset((t["from_area"], t["to_area"]))
        if pair in by_pair:
            by_pair[pair]["stiffness_t"] += stiff
        else:
            entry = {"from_area": t["from_area"], "to_area": t["to_area"],
                     "stiffness_t": stiff}
            by_pair[pair] = entry
            ties.append(entry)

    sched_in = obj.get("schedules", {})
    _check_keys(sched_in, "config.schedules", required=(),
                optional=("net_interchange", "meas_filter_tc"))
    ni_in = sched_in.get("net_interchange", {})
    if not isinstance(ni_in, dict):
        raise ConfigError("config.schedules.net_interchange: expected an object")
    for key in ni_in:
        if key not in names:
            raise ConfigError(
                f"config.schedules.net_interchange: unknown area {key!r}"
            )
    schedules = {
        "net_interchange": {
            n: _num(ni_in, "config.schedules.net_interchange", n, default=0.0)
            for n in names
        },
        "meas_filter_tc": _num(sched_in, "config.schedules", "meas_filter_tc",
                               default=1.0, positive=True),
    }

    sim_in = obj.get("sim", {})
    _check_keys(sim_in, "config.sim", required=(),
                optional=("dt", "horizon", "record_stride", "seed", "dt_reduced"))
    min_tau = min(a["agc_tc"] for a in areas)
    sim = {
        "dt": _num(sim_in, "config.sim", "dt", default=0.01, positive=True),
        "horizon": _num(sim_in, "config.sim", "horizon", default=2000.0,
                        positive=True),
        "record_stride": _int(sim_in, "config.sim", "record_stride", 100),
        "seed": _int(sim_in, "config.sim", "seed", 0),
        "dt_reduced": _num(sim_in, "config.sim", "dt_reduced",
                           default=0.1 * min_tau, positive=True),
    }
    if sim["record_stride"] < 1:
        raise ConfigError("config.sim.record_stride: must be >= 1")

    studies_in = obj.get("studies", {})
    _check_keys(studies_in, "config.studies", required=(),
                optional=("bode", "margin"))
    bode_in = studies_in.get("bode", {})
    _check_keys(bode_in, "config.studies.bode", required=(),
                optional=("points_per_decade",))
    margin_in = studies_in.get("margin", {})
    _check_keys(margin_in, "config.studies.margin", required=(),
                optional=("kappas",))
    kappas = margin_in.get("kappas", list(_DEFAULT_KAPPAS))
    if (not isinstance(kappas, list) or not kappas
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0
                   for v in kappas)):
        raise ConfigError("config.studies.margin.kappas: expected positive numbers")
    studies = {
        "bode": {
            "points_per_decade": _int(bode_in, "config.studies.bode",
                                      "points_per_decade", 400),
        },
        "margin": {"kappas": [float(v) for v in kappas]},
    }

    doc = {
        "areas": areas,
        "ties": ties,
        "schedules": schedules,
        "sim": sim,
        "studies": studies,
    }
    cfg = ConfigDoc(doc)
    cfg.network()  # surface semantic errors (connectivity, participations) now
    return cfg


def load_config(path) -> ConfigDoc:
    with open(path) as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(obj)
