"""Run configuration: strict JSON schema plus named desk-scale presets."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from ..errors import ConfigurationError
from ..model import BilliardSpec, GAUSSIAN_SHEET, HARD
from ..units import UnitSystem

_ALLOWED = {
    "units": {"mode"},
    "billiard": {
        "alpha_deg",
        "wall_model",
        "wall_width",
        "trap_depth",
        "sheet_length",
        "gravity_on",
    },
    "perturbation": {"epsilon", "epsilon_list", "omega_hf", "delta_laser"},
    "grid": {"nx", "nz", "e_top", "pad"},
    "thermal": {"temperature", "e_clip", "n_samples"},
    "quantum": {"k_states", "k_states_up", "dt", "tau_max", "n_tau", "tau_fixed"},
    "classical": {"horizon", "lambda_threshold", "n_section_bounces", "section_energy"},
    "top": {
        "units",
        "billiard",
        "perturbation",
        "grid",
        "thermal",
        "quantum",
        "classical",
        "seed",
        "figure",
        "legs",
        "out_dir",
        "emit_svg",
        "trajectory_dumps",
    },
}

_LEGS = ("classical", "quantum", "perturbative")


def _check_keys(section: str, data: dict):
    unknown = set(data) - _ALLOWED[section]
    if unknown:
        raise ConfigurationError(
            f"unknown field(s) {sorted(unknown)} in config section {section!r}"
        )


@dataclass
class RunConfig:
    """Validated, canonically serializable run description."""

    raw: Dict = field(default_factory=dict)

    def __post_init__(self):
        data = self.raw
        if not isinstance(data, dict):
            raise ConfigurationError("config root must be a JSON object")
        _check_keys("top", data)
        for sec in ("units", "billiard", "perturbation", "grid", "thermal",
                    "quantum", "classical"):
            if sec in data:
                if not isinstance(data[sec], dict):
                    raise ConfigurationError(f"config section {sec!r} must be an object")
                _check_keys(sec, data[sec])
        legs = data.get("legs", list(_LEGS))
        bad = set(legs) - set(_LEGS)
        if bad:
            raise ConfigurationError(f"unknown scan legs {sorted(bad)}")
        fig = data.get("figure")
        if fig is not None and fig not in ("fig1", "fig2", "fig3", "fig4"):
            raise ConfigurationError(f"unknown figure id {fig!r}")
        self.raw = copy.deepcopy(data)

    # -- accessors -------------------------------------------------------
    @property
    def units(self) -> UnitSystem:
        return UnitSystem(mode=self.raw.get("units", {}).get("mode", "dimensionless"))

    @property
    def seed(self) -> int:
        return int(self.raw.get("seed", 20060615))

    @property
    def legs(self) -> List[str]:
        return list(self.raw.get("legs", list(_LEGS)))

    @property
    def figure(self) -> Optional[str]:
        return self.raw.get("figure")

    @property
    def out_dir(self) -> str:
        return self.raw.get("out_dir", "wedge-echo-out")

    @property
    def emit_svg(self) -> bool:
        return bool(self.raw.get("emit_svg", True))

    @property
    def trajectory_dumps(self) -> bool:
        return bool(self.raw.get("trajectory_dumps", False))

    def billiard_spec(self) -> BilliardSpec:
        b = self.raw.get("billiard", {})
        return BilliardSpec(
            alpha=math.radians(float(b.get("alpha_deg", 52.5))),
            wall_model=b.get("wall_model", GAUSSIAN_SHEET),
            wall_width=float(b.get("wall_width", 1.0)),
            trap_depth=float(b.get("trap_depth", 15.0)),
            sheet_length=float(b.get("sheet_length", 24.0)),
            gravity_on=bool(b.get("gravity_on", True)),
            units=self.units,
        )

    def epsilon_list(self) -> List[float]:
        p = self.raw.get("perturbation", {})
        if "epsilon_list" in p:
            return [float(e) for e in p["epsilon_list"]]
        if "epsilon" in p:
            return [float(p["epsilon"])]
        if "omega_hf" in p and "delta_laser" in p:
            return [float(p["omega_hf"]) / float(p["delta_laser"])]
        return [0.1]

    def section(self, name: str) -> dict:
        return self.raw.get(name, {})

    # -- serialization ---------------------------------------------------
    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
        return cls(raw=data)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())


# -- desk-scale presets ----------------------------------------------------
#
# Two calibrated quantum systems share the work:
#
#  * thin-wall wedges (w = 1.0) resolve the coherence revival: the LDOS
#    peak, the perturbative regime and the chaotic/mixed contrast;
#  * a fat-wall wedge (w = 3.0, wider grid) maximizes dephasing per wall
#    encounter so the perturbation-independent plateau and the classical
#    correspondence are reached at numerically clean strengths.
#
# Desk temperatures keep ~45-50 states thermally active per system.

_THIN_BILLIARD = {
    "alpha_deg": 52.5,
    "wall_model": GAUSSIAN_SHEET,
    "wall_width": 1.0,
    "trap_depth": 15.0,
    "sheet_length": 24.0,
    "gravity_on": True,
}
_FAT_BILLIARD = dict(_THIN_BILLIARD, wall_width=3.0)

# chaotic thin system (fig2): tau_bl ~ 8.7
CHAOTIC_THERMAL = {"temperature": 1.1, "e_clip": 10.0, "n_samples": 6000}
CHAOTIC_GRID = {"nx": 128, "nz": 128, "e_top": 10.5, "pad": 3.5}
# mixed thin system (fig4): tau_bl ~ 7.2
MIXED_THERMAL = {"temperature": 1.35, "e_clip": 13.0, "n_samples": 6000}
MIXED_GRID = {"nx": 128, "nz": 128, "e_top": 13.5, "pad": 3.5}
# saturation system (fig3): tau_bl ~ 13.2, plateau reached by eps ~ 1.5
SATURATION_THERMAL = {"temperature": 1.5, "e_clip": 12.5, "n_samples": 6000}
SATURATION_GRID = {"nx": 256, "nz": 128, "e_top": 13.0, "pad": 3.0}

EPSILON_WEAK = 0.1
EPSILON_STRONG_MIXED = 3.6
EPSILON_LADDER = [
    0.05, 0.0899, 0.1617, 0.2909, 0.5232, 0.941, 1.6925, 3.0444, 5.4772, 9.8493,
]  # ten log-spaced values spanning [0.05, 9.85]

PRESETS: Dict[str, dict] = {
    "fig1-desk": {
        "billiard": dict(_THIN_BILLIARD, wall_model=HARD),
        "thermal": dict(CHAOTIC_THERMAL),
        "classical": {
            "n_section_bounces": 100000,
            "section_energy": 4.0,
            "lambda_threshold": 0.05,
            "horizon": 1500.0,
        },
        "figure": "fig1",
        "legs": ["classical"],
        "seed": 1001,
    },
    "fig2-desk": {
        "billiard": dict(_THIN_BILLIARD),
        "grid": dict(CHAOTIC_GRID),
        "thermal": dict(CHAOTIC_THERMAL),
        "perturbation": {"epsilon_list": [0.05, EPSILON_WEAK, 0.2, 0.4]},
        "quantum": {"k_states": 90, "k_states_up": 120,
                    "tau_max": 17.5, "n_tau": 21},
        "figure": "fig2",
        "seed": 1002,
    },
    "fig3-desk": {
        "billiard": dict(_FAT_BILLIARD),
        "grid": dict(SATURATION_GRID),
        "thermal": dict(SATURATION_THERMAL),
        "perturbation": {"epsilon_list": list(EPSILON_LADDER)},
        "quantum": {"k_states": 65, "k_states_up": 85,
                    "tau_fixed": 6.0, "tau_max": 12.0, "n_tau": 9},
        "figure": "fig3",
        "seed": 1003,
    },
    "fig4-desk": {
        "billiard": dict(_THIN_BILLIARD, alpha_deg=31.0),
        "grid": dict(MIXED_GRID),
        "thermal": dict(MIXED_THERMAL),
        "perturbation": {"epsilon_list": [EPSILON_WEAK, EPSILON_STRONG_MIXED]},
        "quantum": {"k_states": 75, "k_states_up": 125,
                    "tau_max": 17.5, "n_tau": 21},
        "figure": "fig4",
        "seed": 1004,
    },
    # Physical-units preset for bounce statistics only: Rb-85 at 20 uK in
    # crossed 20 um light sheets spanning the full 500 um beam extent.
    # e_clip <= 0 means "clip at the sheet-end escape energy".
    "bounce-physical-rb": {
        "units": {"mode": "physical-Rb"},
        "billiard": {
            "alpha_deg": 52.5,
            "wall_model": GAUSSIAN_SHEET,
            "wall_width": 20e-6,
            "trap_depth": 6.9e-28,  # ~ k_B * 50 uK
            "sheet_length": 500e-6,
            "gravity_on": True,
        },
        "thermal": {"temperature": 20e-6, "e_clip": -1.0, "n_samples": 300},
        "classical": {"horizon": 1.2},
        "legs": ["classical"],
        "seed": 1005,
    },
    # Small, fast configuration used by smoke tests and CI.
    "mini-echo": {
        "billiard": dict(_THIN_BILLIARD),
        "grid": {"nx": 64, "nz": 128, "e_top": 8.8, "pad": 3.0},
        "thermal": {"temperature": 0.8, "e_clip": 6.5, "n_samples": 1200},
        "perturbation": {"epsilon_list": [0.1]},
        "quantum": {"k_states": 22, "k_states_up": 40,
                    "tau_max": 6.0, "n_tau": 7},
        "classical": {"horizon": 250.0},
        "seed": 1006,
    },
}


def load_preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}"
        )
    return RunConfig(raw=copy.deepcopy(PRESETS[name]))
