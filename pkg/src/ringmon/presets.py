"""Scenario configuration schema and the built-in preset catalogue.

A scenario is a plain JSON document validated against a schema; presets are
builders returning such documents, one per reproduced figure panel set. All
physical quantities are quoted in units of the hop amplitude (J = 1) and
rates in units of the relevant measurement strength.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError

PI = float(np.pi)

_CHANNEL_SCHEMA = {
    "type": "object",
    "properties": {
        "scheme": {"enum": ["asym", "sym", "tls", "spont"]},
        "links": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "gamma": {"type": "number", "minimum": 0},
        "phases": {
            "oneOf": [
                {"const": "auto"},
                {"type": "object",
                 "properties": {"phi_g": {"type": "number"},
                                "phi_R": {"type": "number"},
                                "phi_L": {"type": "number"},
                                "quad": {"type": "number"}},
                 "additionalProperties": False},
            ]
        },
        "monitored": {"type": "boolean"},
    },
    "required": ["scheme", "gamma"],
    "additionalProperties": False,
}

_RUN_SCHEMA = {
    "type": "object",
    "properties": {
        "label": {"type": "string", "minLength": 1},
        "engine": {"enum": ["sse", "sme", "master"]},
        "model": {
            "type": ["object", "null"],
            "properties": {
                "L": {"type": "integer", "minimum": 1},
                "N": {"type": "integer", "minimum": 0},
                "J": {"type": "number", "minimum": 0},
                "theta": {"type": "number"},
                "U": {"type": "number", "minimum": 0},
                "boundary": {"enum": ["ring", "open"]},
            },
            "required": ["L", "N"],
            "additionalProperties": False,
        },
        "tls": {
            "type": ["object", "null"],
            "properties": {"h": {"type": "number"},
                           "omega": {"type": "number"}},
            "required": ["h", "omega"],
            "additionalProperties": False,
        },
        "channels": {"type": "array", "items": _CHANNEL_SCHEMA,
                     "minItems": 1},
        "integrator": {
            "type": "object",
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "t_final": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer", "minimum": 0},
                "record_stride": {"type": "integer", "minimum": 1},
                "renorm_every": {"type": "integer", "minimum": 1},
            },
            "required": ["dt", "t_final", "seed"],
            "additionalProperties": False,
        },
        "n_traj": {"type": "integer", "minimum": 1},
        "initial": {"type": "string", "minLength": 1},
        "probes": {"type": "array", "items": {"type": "string"}},
    },
    "required": ["label", "engine", "channels", "integrator", "initial"],
    "additionalProperties": False,
}

SCENARIO_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "figure": {"type": "string"},
        "description": {"type": "string"},
        "kind": {"enum": ["runs", "landscape", "spectrum_scan"]},
        "runs": {"type": "array", "items": _RUN_SCHEMA},
        "landscape": {
            "type": ["object", "null"],
            "properties": {
                "thetas": {"type": "array", "items": {"type": "number"},
                           "minItems": 1},
                "grid_n": {"type": "integer", "minimum": 8},
                "J": {"type": "number", "exclusiveMinimum": 0},
                "N": {"type": "integer", "minimum": 1},
            },
            "required": ["thetas", "grid_n", "J", "N"],
            "additionalProperties": False,
        },
        "scan": {
            "type": ["object", "null"],
            "properties": {
                "entries": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "label": {"type": "string"},
                            "L": {"type": "integer", "minimum": 3},
                            "N": {"type": "integer", "minimum": 1},
                            "points": {"type": "integer", "minimum": 2},
                        },
                        "required": ["label", "L", "N", "points"],
                        "additionalProperties": False,
                    },
                    "minItems": 1,
                },
                "theta_max": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["entries"],
            "additionalProperties": False,
        },
    },
    "required": ["name", "kind"],
    "additionalProperties": False,
}


def validate_scenario(config: dict) -> dict:
    """Validate a scenario dict, raising ConfigError with a field path."""
    try:
        jsonschema.validate(config, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(exc.json_path, exc.message) from None
    kind = config["kind"]
    if kind == "runs" and not config.get("runs"):
        raise ConfigError("$.runs", "kind 'runs' needs at least one run")
    if kind == "landscape" and not config.get("landscape"):
        raise ConfigError("$.landscape", "kind 'landscape' needs a grid spec")
    if kind == "spectrum_scan" and not config.get("scan"):
        raise ConfigError("$.scan", "kind 'spectrum_scan' needs a scan spec")
    for r, run in enumerate(config.get("runs") or []):
        if run["engine"] in ("sse", "sme", "master"):
            if run.get("model") is None and run.get("tls") is None:
                raise ConfigError(f"$.runs[{r}]",
                                  "needs either a model or a tls block")
    return config


def parse_scenario(path) -> dict:
    try:
        config = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"not valid JSON: {exc}") from None
    return validate_scenario(config)


def serialize_scenario(config: dict) -> str:
    return json.dumps(config, sort_keys=True, indent=1) + "\n"


def _integrator(dt, t_final, seed, stride=10):
    return {"dt": dt, "t_final": t_final, "seed": seed,
            "record_stride": stride}


def _ring(L, N, theta, U=0.0):
    return {"L": L, "N": N, "J": 1.0, "theta": theta, "U": U,
            "boundary": "ring"}


def _fig4():
    return {
        "name": "fig4",
        "figure": "fig4",
        "description": "Phase-representation kinetic landscape: double well "
                       "at half flux and its tilt just off half flux",
        "kind": "landscape",
        "landscape": {"thetas": [PI, 1.02 * PI], "grid_n": 120,
                      "J": 1.0, "N": 3},
    }


def _fig6():
    runs = []
    for i, ratio in enumerate((5.0, 2.0, 1.0, 0.5)):
        runs.append({
            "label": f"ratio{ratio:g}",
            "engine": "sse",
            "model": None,
            "tls": {"h": 0.0, "omega": 1.0 / ratio},
            "channels": [{"scheme": "tls", "gamma": 1.0,
                          "monitored": True}],
            "integrator": _integrator(1e-3, 100.0, 62001 + i),
            "n_traj": 1,
            "initial": "tls_up",
            "probes": ["sigma_z"],
        })
    return {
        "name": "fig6",
        "figure": "fig6",
        "description": "Two-level reduction under global-current monitoring "
                       "across measurement-to-tunnelling ratios 5,2,1,0.5",
        "kind": "runs",
        "runs": runs,
    }


def _global_run(label, theta, U, gamma, seed, n_traj, t_final, dt=1e-3,
                engine="sse", probes=("J_tot",), initial="haar"):
    return {
        "label": label,
        "engine": engine,
        "model": _ring(3, 3, theta, U),
        "tls": None,
        "channels": [{"scheme": "asym", "links": [1, 2, 3], "gamma": gamma,
                      "phases": "auto", "monitored": True}],
        "integrator": _integrator(dt, t_final, seed),
        "n_traj": n_traj,
        "initial": initial,
        "probes": list(probes),
    }


def _fig7(panel: str):
    params = {
        "a": dict(U=0.0, gamma=1.0, n_traj=10, t_final=50.0, dt=1e-3,
                  seed=70001),
        "b": dict(U=2.0, gamma=0.1, n_traj=1, t_final=100.0, dt=1e-3,
                  seed=70002),
        "c": dict(U=0.5, gamma=5.0, n_traj=1, t_final=50.0, dt=2e-4,
                  seed=70003),
        "d": dict(U=2.0, gamma=5.0, n_traj=1, t_final=50.0, dt=2e-4,
                  seed=70004),
    }[panel]
    return {
        "name": f"fig7{panel}",
        "figure": "fig7",
        "description": "Global-current monitoring of the three-site ring at "
                       "one-sixth flux (QND at U=0; interaction-driven "
                       "transitions otherwise)",
        "kind": "runs",
        "runs": [_global_run(f"panel{panel}", PI / 3, **params)],
    }


def _local_run(label, scheme, seed, theta=PI / 3, gamma=1.0, t_final=150.0,
               probes=("J_link:1", "J_tot"), engine="sse", n_traj=4,
               extra_channels=(), initial="haar", dt=1e-3):
    return {
        "label": label,
        "engine": engine,
        "model": _ring(3, 3, theta, 0.0),
        "tls": None,
        "channels": [{"scheme": scheme, "links": [1], "gamma": gamma,
                      "phases": "auto", "monitored": True},
                     *extra_channels],
        "integrator": _integrator(dt, t_final, seed),
        "n_traj": n_traj,
        "initial": initial,
        "probes": list(probes),
    }


def _fig8(panel: str):
    if panel == "a":
        run = _local_run("sym", "sym", 80001)
    else:
        run = _local_run("asym", "asym", 80002,
                         probes=("J_link:1", "J_tot", "overlap_dark"))
    return {
        "name": f"fig8{panel}",
        "figure": "fig8",
        "description": "Single-link current monitoring: symmetric coupling "
                       "never settles, asymmetric coupling reaches the dark "
                       "state",
        "kind": "runs",
        "runs": [run],
    }


def _fig9():
    return {
        "name": "fig9",
        "figure": "fig9",
        "description": "Kinetic many-body spectra against flux for the "
                       "three- and four-site rings",
        "kind": "spectrum_scan",
        "scan": {"entries": [
            {"label": "L3N3", "L": 3, "N": 3, "points": 241},
            {"label": "L4N4", "L": 4, "N": 4, "points": 241},
        ]},
    }


def _fig10():
    runs = []
    cases = [
        ("qnd_global", [1, 2, 3], PI / 3, 1.0),
        ("dark_local", [1], PI / 3, 1.0),
        ("mixing_local", [1], PI / 2, 0.5),
    ]
    for i, (label, links, theta, gamma) in enumerate(cases):
        runs.append({
            "label": label,
            "engine": "master",
            "model": _ring(3, 3, theta, 0.0),
            "tls": None,
            "channels": [{"scheme": "asym", "links": links, "gamma": gamma,
                          "phases": "auto", "monitored": True}],
            "integrator": _integrator(2e-3, 150.0, 100001 + i, stride=50),
            "n_traj": 1,
            "initial": "haar_shared",
            "probes": ["J_tot"],
        })
    return {
        "name": "fig10",
        "figure": "fig10",
        "description": "Purity of the unconditional state: pure dark state, "
                       "full mixing, and initial-state-dependent QND case",
        "kind": "runs",
        "runs": runs,
    }


def _fig11():
    return {
        "name": "fig11",
        "figure": "fig11",
        "description": "Kinetic spectra of the three-site ring for one to "
                       "four particles",
        "kind": "spectrum_scan",
        "scan": {"entries": [
            {"label": f"N{n}", "L": 3, "N": n, "points": 241}
            for n in (1, 2, 3, 4)
        ]},
    }


def _sme_preset(links, probes):
    runs = []
    for i, ratio in enumerate((0.0, 0.05, 0.1, 0.5)):
        channels = [{"scheme": "asym", "links": links, "gamma": 1.0,
                     "phases": "auto", "monitored": True}]
        if ratio > 0:
            channels.append({"scheme": "spont", "links": [1, 2, 3],
                             "gamma": ratio, "monitored": False})
        runs.append({
            "label": f"ratio{ratio:g}",
            "engine": "sme",
            "model": _ring(3, 3, PI, 0.0),
            "tls": None,
            "channels": channels,
            "integrator": _integrator(2.5e-4, 50.0, 120001 + i, stride=200),
            "n_traj": 1,
            "initial": "haar",
            "probes": list(probes),
        })
    return runs


def _fig12():
    return {
        "name": "fig12",
        "figure": "fig12",
        "description": "Conditional global current under increasing "
                       "spontaneous emission",
        "kind": "runs",
        "runs": _sme_preset([1, 2, 3], ("J_tot",)),
    }


def _fig13():
    return {
        "name": "fig13",
        "figure": "fig13",
        "description": "Conditional local current under increasing "
                       "spontaneous emission",
        "kind": "runs",
        "runs": _sme_preset([1], ("J_link:1", "J_tot")),
    }


PRESETS = {
    "fig4": _fig4,
    "fig6": _fig6,
    "fig7a": lambda: _fig7("a"),
    "fig7b": lambda: _fig7("b"),
    "fig7c": lambda: _fig7("c"),
    "fig7d": lambda: _fig7("d"),
    "fig8a": lambda: _fig8("a"),
    "fig8b": lambda: _fig8("b"),
    "fig9": _fig9,
    "fig10": _fig10,
    "fig11": _fig11,
    "fig12": _fig12,
    "fig13": _fig13,
}


def preset(name: str) -> dict:
    key = name.removeprefix("presets/")
    if key not in PRESETS:
        raise ConfigError("$.name", f"unknown preset {name!r}; "
                          f"known: {', '.join(sorted(PRESETS))}")
    return validate_scenario(PRESETS[key]())


def list_presets() -> list[dict]:
    """Catalogue of preset names with their figure mapping."""
    out = []
    for name in sorted(PRESETS):
        cfg = PRESETS[name]()
        out.append({"name": name, "figure": cfg["figure"],
                    "kind": cfg["kind"],
                    "runs": [r["label"] for r in cfg.get("runs") or []],
                    "description": cfg.get("description", "")})
    return out
