"""Versioned CSV/JSON writers and readers for simulation outputs.

Every CSV starts with comment lines ``# schema=<name>.v<k>`` (plus channel
metadata where needed) followed by a header row. Readers reject missing or
mismatched schema versions so downstream consumers can rely on the layout.
Floats are written with round-trip precision; identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from .errors import SchemaError

SCHEMA_TRAJECTORY = "ringmon.trajectory.v1"
SCHEMA_MASTER = "ringmon.master.v1"
SCHEMA_SPECTRUM = "ringmon.spectrum.v1"
SCHEMA_LANDSCAPE = "ringmon.landscape.v1"
SCHEMA_LANDSCAPE_CUT = "ringmon.landscape-cut.v1"
SCHEMA_WINDOW_STATS = "ringmon.windowstats.v1"
SCHEMA_NOISE_SPECTRUM = "ringmon.noisespectrum.v1"
SCHEMA_ENSEMBLE = "ringmon.ensemble.v1"
SCHEMA_MANIFEST = "ringmon.manifest.v1"
SCHEMA_DARKSTATES = "ringmon.darkstates.v1"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path, schema: str, header: list[str], rows,
               extra_comments: list[str] | None = None) -> None:
    lines = [f"# schema={schema}"]
    lines.extend(extra_comments or [])
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _read_csv(path, schema: str):
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("# schema="):
        raise SchemaError(f"{path}: missing schema line")
    found = text[0].split("=", 1)[1].strip()
    if found != schema:
        raise SchemaError(f"{path}: schema {found!r}, expected {schema!r}")
    comments = {}
    i = 1
    while i < len(text) and text[i].startswith("#"):
        body = text[i][1:].strip()
        if "=" in body:
            key, val = body.split("=", 1)
            comments[key.strip()] = val.strip()
        i += 1
    header = text[i].split(",")
    data = np.array([[float(v) for v in line.split(",")]
                     for line in text[i + 1:] if line.strip()])
    return header, data, comments


def write_trajectory_csv(path, record) -> None:
    header = ["t"]
    header += [f"dq_{lab}" for lab in record.channel_labels]
    header += list(record.observables.keys())
    purity = getattr(record, "purity", None)
    if purity is not None:
        header.append("purity")
    n = len(record.times)
    cols = [record.times]
    cols += [record.dq[:, m] for m in range(record.dq.shape[1])]
    cols += [record.observables[k] for k in record.observables]
    if purity is not None:
        cols.append(purity)
    rows = np.column_stack(cols) if cols else np.empty((n, 0))
    chan_meta = ",".join(f"{lab}:{_fmt(g)}" for lab, g in
                         zip(record.channel_labels, record.channel_gammas))
    comments = [f"# channels={chan_meta}",
                f"# dt={_fmt(record.dt)}",
                f"# seed={record.seed}",
                f"# index={record.trajectory_index}"]
    _write_csv(path, SCHEMA_TRAJECTORY, header, rows, comments)


def read_trajectory_csv(path):
    """Load a trajectory CSV into a record-like view usable by the filters."""
    header, data, comments = _read_csv(path, SCHEMA_TRAJECTORY)
    labels, gammas = [], []
    for part in comments.get("channels", "").split(","):
        if not part:
            continue
        lab, g = part.rsplit(":", 1)
        labels.append(lab)
        gammas.append(float(g))
    n_ch = len(labels)
    times = data[:, 0]
    dq = data[:, 1:1 + n_ch]
    observables = {name: data[:, 1 + n_ch + k]
                   for k, name in enumerate(header[1 + n_ch:])}
    view = SimpleNamespace(
        times=times, dq=dq, observables=observables,
        channel_labels=labels, channel_gammas=gammas,
        dt=float(comments.get("dt", "0")),
        seed=int(comments.get("seed", "0")),
        trajectory_index=int(comments.get("index", "0")))
    view.column = lambda name: view.observables[name]
    view.channel_index = (lambda channel: channel if isinstance(channel, int)
                          else view.channel_labels.index(channel))
    return view


def write_master_csv(path, record, label: str = "") -> None:
    header = ["t", "purity"] + list(record.observables.keys())
    cols = [record.times, record.purity]
    cols += [record.observables[k] for k in record.observables]
    comments = [f"# label={label}"] if label else []
    _write_csv(path, SCHEMA_MASTER, header, np.column_stack(cols), comments)


def read_master_csv(path):
    header, data, comments = _read_csv(path, SCHEMA_MASTER)
    obs = {name: data[:, i] for i, name in enumerate(header)}
    return SimpleNamespace(times=data[:, 0], purity=data[:, 1],
                           observables=obs, label=comments.get("label", ""))


def write_spectrum_scan_csv(path, thetas, energy_rows) -> None:
    """Rows are (theta, eigenvalue_index, energy) for a flux sweep."""
    rows = []
    for theta, energies in zip(thetas, energy_rows):
        for idx, en in enumerate(energies):
            rows.append((theta, float(idx), en))
    _write_csv(path, SCHEMA_SPECTRUM, ["theta", "eigenvalue_index", "energy"],
               rows)


def write_landscape_csv(path, phi_grid, values) -> None:
    rows = []
    for i, p12 in enumerate(phi_grid):
        for j, p23 in enumerate(phi_grid):
            rows.append((p12, p23, values[i, j]))
    _write_csv(path, SCHEMA_LANDSCAPE, ["phi12", "phi23", "value"], rows)


def read_landscape_csv(path):
    _, data, _ = _read_csv(path, SCHEMA_LANDSCAPE)
    return data


def write_landscape_cut_csv(path, phi, columns: dict[str, np.ndarray]) -> None:
    header = ["phi"] + list(columns.keys())
    rows = np.column_stack([phi] + [columns[k] for k in columns])
    _write_csv(path, SCHEMA_LANDSCAPE_CUT, header, rows)


def write_window_stats_csv(path, rows) -> None:
    """Rows are (window_start, integrated_value, snr)."""
    _write_csv(path, SCHEMA_WINDOW_STATS,
               ["window_start", "integrated", "snr"], rows)


def write_noise_spectrum_csv(path, spectrum) -> None:
    rows = np.column_stack([spectrum.omega, spectrum.values])
    _write_csv(path, SCHEMA_NOISE_SPECTRUM, ["omega", "S_eta"], rows,
               [f"# n_records={spectrum.n_records}"])


def write_ensemble_summary(path, times, probe_stats: dict, n_traj: int,
                           diagnostics: dict) -> None:
    payload = {
        "schema": SCHEMA_ENSEMBLE,
        "n_traj": n_traj,
        "times": [float(t) for t in times],
        "probes": {name: {"mean": [float(v) for v in stats["mean"]],
                          "var": [float(v) for v in stats["var"]]}
                   for name, stats in probe_stats.items()},
        "diagnostics": diagnostics,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


def canonical_config_text(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict, semantic_keys=("runs", "landscape", "scan")
                ) -> str:
    semantic = {k: config[k] for k in semantic_keys if k in config}
    return hashlib.sha256(
        canonical_config_text(semantic).encode()).hexdigest()


def write_manifest(path, config: dict) -> None:
    from . import __version__
    payload = {
        "schema": SCHEMA_MANIFEST,
        "name": config.get("name", ""),
        "figure": config.get("figure", ""),
        "kind": config.get("kind", ""),
        "config": config,
        "config_hash": config_hash(config),
        "versions": {
            "ringmon": __version__,
            "numpy": np.__version__,
            "python": ".".join(map(str, sys.version_info[:3])),
        },
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


def read_manifest(path) -> dict:
    payload = json.loads(Path(path).read_text())
    if payload.get("schema") != SCHEMA_MANIFEST:
        raise SchemaError(f"{path}: not a manifest")
    return payload


def write_darkstates_json(path, basis, specs, states) -> None:
    entries = []
    for spec, state in zip(specs, states):
        item = asdict(spec)
        item["coeffs1"] = [[c.real, c.imag] for c in spec.coeffs1]
        item["coeffs2"] = ([[c.real, c.imag] for c in spec.coeffs2]
                           if spec.coeffs2 is not None else None)
        item["amplitudes"] = [[a.real, a.imag] for a in state.amplitudes]
        entries.append(item)
    payload = {
        "schema": SCHEMA_DARKSTATES,
        "L": basis.L,
        "N": basis.N,
        "occupations": [list(occ) for occ in basis.states],
        "states": entries,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
