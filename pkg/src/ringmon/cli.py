"""Scenario-driven command line runner.

Subcommands: ``run`` (execute a preset or config file), ``list-presets``,
``scan-spectrum`` (flux sweep CSV), ``darkstate`` (census export) and
``filter`` (window statistics and noise spectra over trajectory CSVs).
Exit codes: 0 ok, 2 configuration error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .darkstate import build_dark_state, dark_census
from .errors import ConfigError, NumericalAbort
from .fock import build_basis
from .master import evolve_master, pure_density, sme_ensemble
from .measure import (asym_channel, spontaneous_channels, sym_channel,
                      tls_channel, MeasurementChannel)
from .model import (ModelParams, TLSParams, build_hamiltonian, build_tls,
                    kinetic_hamiltonian, local_current, momentum_amplitudes,
                    momentum_labels, tls_potential, total_current)
from .presets import (PRESETS, list_presets, parse_scenario, preset,
                      serialize_scenario, validate_scenario)
from .sse import (SseConfig, haar_initial, haar_state, shared_rng,
                  simulate_ensemble)
from .signal import backaction_spectrum, integrate_window, snr


def _model_params(block: dict) -> ModelParams:
    return ModelParams(L=block["L"], N=block["N"], J=block.get("J", 1.0),
                       theta=block.get("theta", 0.0), U=block.get("U", 0.0),
                       boundary=block.get("boundary", "ring"))


def _build_channels(run: dict, basis, p: ModelParams | None):
    channels = []
    for c, spec in enumerate(run["channels"]):
        scheme = spec["scheme"]
        phases = spec.get("phases", "auto")
        monitored = spec.get("monitored", True)
        gamma = spec["gamma"]
        if scheme == "tls":
            channels.append(tls_channel(TLSParams(**run["tls"]), gamma))
            continue
        if basis is None or p is None:
            raise ConfigError(f"$.runs.channels[{c}]",
                              f"scheme {scheme!r} needs a model block")
        links = spec.get("links") or []
        if scheme == "asym":
            phi_g = 0.0 if phases == "auto" else phases.get("phi_g", 0.0)
            channels.append(asym_channel(basis, p, links, gamma,
                                         phi_g=phi_g, monitored=monitored))
        elif scheme == "sym":
            kw = {}
            if phases != "auto":
                kw = {"phi_R": phases.get("phi_R"),
                      "phi_L": phases.get("phi_L"),
                      "quad_phase": phases.get("quad", 0.0)}
            channels.append(sym_channel(basis, p, links, gamma,
                                        monitored=monitored, **kw))
        elif scheme == "spont":
            # gamma is the total spontaneous budget, split equally over the
            # generated decay and dephasing channels
            from .measure import CqedParams
            cq = CqedParams(g_abs=1.0, kappa=1.0)
            group = spontaneous_channels(basis, p, cq, links,
                                         rate_override=1.0)
            channels.extend(c.with_rate(gamma / len(group)) for c in group)
    return channels


def _first_monitored_link(run: dict) -> int:
    for spec in run["channels"]:
        if spec.get("monitored", True) and spec.get("links"):
            return spec["links"][0]
    raise ConfigError("$.runs.channels", "no monitored link for dark probe")


def _resolve_probes(run: dict, basis, p: ModelParams | None):
    probes = {}
    for name in run.get("probes") or []:
        if name == "sigma_z":
            probes[name] = build_tls(TLSParams(**run["tls"]))[2]
        elif name == "J_tot":
            probes[name] = total_current(basis, p)
        elif name.startswith("J_link:"):
            probes[name] = local_current(basis, p, int(name.split(":")[1]))
        elif name.startswith("n:"):
            from .fock import number_operator
            probes[name] = number_operator(basis, int(name.split(":")[1]))
        elif name == "overlap_dark":
            link = _first_monitored_link(run)
            census = dark_census(p.L, p.N, p.theta, link, p.J)
            if len(census) != 1:
                raise ConfigError(
                    "$.runs.probes", "overlap_dark needs a unique dark "
                    f"state; census found {len(census)}")
            probes[name] = build_dark_state(basis, census[0])
        else:
            raise ConfigError("$.runs.probes", f"unknown probe {name!r}")
    return probes


def _resolve_initial(spec: str, run: dict, basis, p, seed: int):
    if spec == "haar":
        return haar_initial
    if spec == "haar_shared":
        dim = basis.dim if basis is not None else 2
        return haar_state(dim, shared_rng(seed))
    if spec == "tls_up":
        return np.array([1.0, 0.0], dtype=complex)
    if spec == "uniform":
        dim = basis.dim if basis is not None else 2
        return np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)
    if spec == "uniform_momentum":
        from .darkstate import polynomial_state
        labels = momentum_labels(p.L)
        vec = np.zeros(basis.dim, dtype=complex)
        for occ in basis.states:
            factors = [(momentum_amplitudes(p.L, a), n)
                       for a, n in zip(labels, occ) if n > 0]
            vec += polynomial_state(basis, factors)
        return vec / np.linalg.norm(vec)
    if spec.startswith("fock:"):
        occ = tuple(int(x) for x in spec.split(":")[1].split("-"))
        return basis.basis_state(occ)
    if spec.startswith("momentum_fock:"):
        from .darkstate import polynomial_state
        counts = [int(x) for x in spec.split(":")[1].split("-")]
        labels = momentum_labels(p.L)
        if len(counts) != len(labels):
            raise ConfigError("$.runs.initial",
                              f"need {len(labels)} mode counts")
        factors = [(momentum_amplitudes(p.L, a), n)
                   for a, n in zip(labels, counts) if n > 0]
        return polynomial_state(basis, factors)
    raise ConfigError("$.runs.initial", f"unknown initial state {spec!r}")


def _sse_config(run: dict, dt_override: float | None,
                seed_override: int | None, offset: int) -> SseConfig:
    block = dict(run["integrator"])
    if dt_override is not None:
        block["dt"] = dt_override
    if seed_override is not None:
        block["seed"] = seed_override + offset
    return SseConfig(**block)


def _setup_run(run: dict):
    if run.get("model") is not None:
        p = _model_params(run["model"])
        basis = build_basis(p.L, p.N)
        H = build_hamiltonian(basis, p)
    else:
        p = None
        basis = None
        H = build_tls(TLSParams(**run["tls"]))[0]
    channels = _build_channels(run, basis, p)
    probes = _resolve_probes(run, basis, p)
    return basis, p, H, channels, probes


def _summarize(records, path, n_traj):
    times = records[0].times
    names = list(records[0].observables)
    stats = {}
    for name in names:
        stack = np.stack([r.observables[name] for r in records])
        stats[name] = {"mean": stack.mean(axis=0), "var": stack.var(axis=0)}
    diag = {
        "max_norm_drift": float(max(r.observables["norm_drift"].max()
                                    for r in records))
        if "norm_drift" in records[0].observables else 0.0,
        "n_steps": int(round(times[-1] / records[0].dt)),
    }
    io.write_ensemble_summary(path, times, stats, n_traj, diag)


def _execute_runs(config: dict, out: Path, seed_override, threads,
                  dt_override) -> None:
    for offset, run in enumerate(config.get("runs") or []):
        basis, p, H, channels, probes = _setup_run(run)
        cfg = _sse_config(run, dt_override, seed_override, offset)
        n_traj = run.get("n_traj", 1)
        initial = _resolve_initial(run["initial"], run, basis, p, cfg.seed)
        label = run["label"]
        if run["engine"] == "sse":
            records = simulate_ensemble(H, channels, cfg, n_traj, initial,
                                        probes=probes, threads=threads)
            for rec in records:
                io.write_trajectory_csv(
                    out / f"{label}_traj{rec.trajectory_index:03d}.csv", rec)
            _summarize(records, out / f"{label}_summary.json", n_traj)
        elif run["engine"] == "sme":
            records = sme_ensemble(initial, H, channels, cfg, n_traj,
                                   probes=probes)
            for rec in records:
                io.write_trajectory_csv(
                    out / f"{label}_traj{rec.trajectory_index:03d}.csv", rec)
        else:  # master
            if callable(initial):
                raise ConfigError("$.runs.initial",
                                  "master runs need a concrete initial state")
            rho0 = pure_density(initial)
            record = evolve_master(rho0, H, channels, cfg.dt, cfg.t_final,
                                   record_stride=cfg.record_stride,
                                   probes=probes)
            io.write_master_csv(out / f"{label}_master.csv", record, label)


def _execute_landscape(config: dict, out: Path) -> None:
    block = config["landscape"]
    n = block["grid_n"]
    grid = np.arange(n) * 2.0 * np.pi / n
    theta0 = block["thetas"][0]
    values = np.empty((n, n))
    for i, p12 in enumerate(grid):
        values[i] = [tls_potential(theta0, p12, p23, block["J"], block["N"])
                     for p23 in grid]
    io.write_landscape_csv(out / "landscape.csv", grid, values)
    cuts = {f"theta{i}": np.array([tls_potential(th, s, s, block["J"],
                                                 block["N"]) for s in grid])
            for i, th in enumerate(block["thetas"])}
    io.write_landscape_cut_csv(out / "landscape_cuts.csv", grid, cuts)


def _execute_scan(config: dict, out: Path) -> None:
    block = config["scan"]
    theta_max = block.get("theta_max", 2.0 * np.pi)
    for entry in block["entries"]:
        thetas = np.linspace(0.0, theta_max, entry["points"], endpoint=False)
        basis = build_basis(entry["L"], entry["N"])
        rows = []
        for th in thetas:
            p = ModelParams(L=entry["L"], N=entry["N"], J=1.0, theta=th)
            rows.append(np.sort(np.linalg.eigvalsh(
                kinetic_hamiltonian(basis, p).dense())))
        io.write_spectrum_scan_csv(out / f"spectrum_{entry['label']}.csv",
                                   thetas, rows)


def run_scenario(config: dict, out_dir, seed_override: int | None = None,
                 threads: int = 1, dt_override: float | None = None) -> Path:
    """Execute one validated scenario; returns the output directory."""
    validate_scenario(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_manifest(out / "manifest.json", config)
    if config["kind"] == "runs":
        _execute_runs(config, out, seed_override, threads, dt_override)
    elif config["kind"] == "landscape":
        _execute_landscape(config, out)
    else:
        _execute_scan(config, out)
    return out


def _resolve_scenario(ref: str) -> dict:
    key = ref.removeprefix("presets/")
    if key in PRESETS:
        return preset(key)
    path = Path(ref)
    if not path.exists():
        raise ConfigError("$", f"{ref!r} is neither a preset nor a file")
    return parse_scenario(path)


def _cmd_run(args) -> int:
    config = _resolve_scenario(args.scenario)
    out = args.out or Path("out") / config["name"]
    run_scenario(config, out, seed_override=args.seed, threads=args.threads,
                 dt_override=args.dt_override)
    print(f"wrote {out}")
    return 0


def _cmd_list(args) -> int:
    for item in list_presets():
        runs = f" [{', '.join(item['runs'])}]" if item["runs"] else ""
        print(f"{item['name']:8s} {item['figure']:6s} {item['kind']:14s}"
              f"{runs}\n         {item['description']}")
    return 0


def _cmd_scan(args) -> int:
    config = {
        "name": f"scan_L{args.sites}N{args.particles}",
        "figure": "scan",
        "kind": "spectrum_scan",
        "scan": {"entries": [{"label": f"L{args.sites}N{args.particles}",
                              "L": args.sites, "N": args.particles,
                              "points": args.points}]},
    }
    out = args.out or Path("out") / config["name"]
    run_scenario(config, out)
    print(f"wrote {out}")
    return 0


def _cmd_darkstate(args) -> int:
    basis = build_basis(args.sites, args.particles)
    specs = dark_census(args.sites, args.particles, args.theta, args.link)
    states = [build_dark_state(basis, s) for s in specs]
    out = Path(args.out or f"darkstates_L{args.sites}N{args.particles}.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_darkstates_json(out, basis, specs, states)
    print(f"{len(specs)} dark state(s) -> {out}")
    return 0


def _cmd_filter(args) -> int:
    records = [io.read_trajectory_csv(p) for p in args.csv]
    if not records:
        raise ConfigError("$", "no trajectory files given")
    channel = args.channel or records[0].channel_labels[0]
    out = Path(args.out or "filtered")
    out.mkdir(parents=True, exist_ok=True)
    spec = None
    if len(records) >= args.min_records:
        spec = backaction_spectrum(records, channel,
                                   min_records=args.min_records)
        io.write_noise_spectrum_csv(out / "spectrum.csv", spec)
    s_eta0 = spec.at_zero() if spec is not None else 0.0
    rows = []
    t0, t_end = records[0].times[0], records[0].times[-1]
    T = args.window
    for rec in records:
        start = t0
        while start + T <= t_end + 1e-12:
            value = integrate_window(rec, channel, start, T)
            stats = snr(value / T, T, s_eta0)
            rows.append((start, value, stats.snr))
            start += T
    io.write_window_stats_csv(out / "window_stats.csv", rows)
    print(f"wrote {out} ({len(rows)} windows"
          f"{', spectrum' if spec is not None else ''})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringmon",
        description="Simulate continuous homodyne monitoring of atomic "
                    "currents on flux rings")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a preset or scenario file")
    p_run.add_argument("scenario", help="preset name (see list-presets) or "
                                        "path to a scenario JSON")
    p_run.add_argument("--out", type=Path, default=None)
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the base RNG seed")
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument("--dt-override", type=float, default=None)
    p_run.set_defaults(func=_cmd_run)

    p_list = sub.add_parser("list-presets", help="show the preset catalogue")
    p_list.set_defaults(func=_cmd_list)

    p_scan = sub.add_parser("scan-spectrum", help="flux sweep of the kinetic "
                                                  "spectrum")
    p_scan.add_argument("--sites", type=int, required=True)
    p_scan.add_argument("--particles", type=int, required=True)
    p_scan.add_argument("--points", type=int, default=241)
    p_scan.add_argument("--out", type=Path, default=None)
    p_scan.set_defaults(func=_cmd_scan)

    p_dark = sub.add_parser("darkstate", help="dark-state census and export")
    p_dark.add_argument("--sites", type=int, required=True)
    p_dark.add_argument("--particles", type=int, required=True)
    p_dark.add_argument("--theta", type=float, required=True)
    p_dark.add_argument("--link", type=int, default=1)
    p_dark.add_argument("--out", type=Path, default=None)
    p_dark.set_defaults(func=_cmd_darkstate)

    p_filt = sub.add_parser("filter", help="window statistics and noise "
                                           "spectrum from trajectory CSVs")
    p_filt.add_argument("csv", nargs="+", type=Path)
    p_filt.add_argument("--channel", default=None)
    p_filt.add_argument("--window", type=float, required=True,
                        help="boxcar window length")
    p_filt.add_argument("--min-records", type=int, default=50)
    p_filt.add_argument("--out", type=Path, default=None)
    p_filt.set_defaults(func=_cmd_filter)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalAbort as exc:
        diag = {"error": str(exc), "t": exc.t, "step": exc.step,
                "label": exc.label}
        Path("ringmon_abort.json").write_text(json.dumps(diag, indent=1))
        print(f"numerical abort: {exc} (diagnostics in ringmon_abort.json)",
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
