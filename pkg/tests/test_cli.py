import json

import numpy as np
import pytest

from ringmon import io
from ringmon.cli import main, run_scenario
from ringmon.errors import SchemaError
from ringmon.presets import (PRESETS, list_presets, parse_scenario, preset,
                             serialize_scenario, validate_scenario)


def test_preset_catalogue():
    names = {item["name"] for item in list_presets()}
    assert {"fig4", "fig6", "fig7a", "fig8a", "fig8b", "fig9", "fig10",
            "fig11", "fig12", "fig13"} <= names
    fig10 = next(i for i in list_presets() if i["name"] == "fig10")
    assert fig10["runs"] == ["qnd_global", "dark_local", "mixing_local"]
    fig13 = next(i for i in list_presets() if i["name"] == "fig13")
    assert len([r for r in fig13["runs"] if r.startswith("ratio")]) == 4
    # every preset validates
    for name in PRESETS:
        validate_scenario(preset(name))


def test_config_round_trip_idempotent(tmp_path):
    config = preset("fig7a")
    path = tmp_path / "scenario.json"
    path.write_text(serialize_scenario(config))
    parsed = parse_scenario(path)
    assert serialize_scenario(parsed) == serialize_scenario(config)


def test_manifest_hash_tracks_semantic_changes():
    config = preset("fig7a")
    h0 = io.config_hash(config)
    relabeled = json.loads(json.dumps(config))
    relabeled["description"] = "different words"
    assert io.config_hash(relabeled) == h0
    changed = json.loads(json.dumps(config))
    changed["runs"][0]["channels"][0]["gamma"] = 2.0
    assert io.config_hash(changed) != h0
    reseeded = json.loads(json.dumps(config))
    reseeded["runs"][0]["integrator"]["seed"] += 1
    assert io.config_hash(reseeded) != h0


def test_validation_error_carries_field_path():
    config = preset("fig7a")
    config["runs"][0]["channels"][0]["gamma"] = -1.0
    with pytest.raises(Exception) as exc:
        validate_scenario(config)
    assert "gamma" in str(exc.value)


def test_run_tls_preset(tmp_path):
    config = preset("fig6")
    for run in config["runs"]:
        run["integrator"]["t_final"] = 2.0
    out = run_scenario(config, tmp_path / "fig6")
    files = sorted(f.name for f in out.iterdir())
    assert "manifest.json" in files
    trajs = [f for f in files if f.endswith(".csv")]
    assert len(trajs) == 4
    view = io.read_trajectory_csv(out / trajs[0])
    assert "sigma_z" in view.observables
    assert abs(view.observables["sigma_z"][0] - 1.0) < 1e-9


def test_run_writes_manifest_and_deterministic_outputs(tmp_path):
    config = preset("fig7a")
    config["runs"][0]["integrator"]["t_final"] = 1.0
    config["runs"][0]["n_traj"] = 2
    out1 = run_scenario(config, tmp_path / "a")
    out2 = run_scenario(config, tmp_path / "b")
    man = io.read_manifest(out1 / "manifest.json")
    assert man["config_hash"] == io.config_hash(config)
    f1 = (out1 / "panela_traj000.csv").read_text()
    f2 = (out2 / "panela_traj000.csv").read_text()
    assert f1 == f2
    summary = json.loads((out1 / "panela_summary.json").read_text())
    assert summary["n_traj"] == 2
    assert "J_tot" in summary["probes"]


def test_run_master_preset(tmp_path):
    config = preset("fig10")
    for run in config["runs"]:
        run["integrator"]["t_final"] = 1.0
    out = run_scenario(config, tmp_path / "fig10")
    rec = io.read_master_csv(out / "dark_local_master.csv")
    assert rec.purity[0] == pytest.approx(1.0, abs=1e-9)


def test_run_landscape_preset(tmp_path):
    out = run_scenario(preset("fig4"), tmp_path / "fig4")
    data = io.read_landscape_csv(out / "landscape.csv")
    n = 120
    assert data.shape == (n * n, 3)
    vals = data[:, 2].reshape(n, n)
    idx = np.argwhere(vals < vals.min() + 1e-9)
    assert {tuple(i) for i in idx} == {(40, 40), (80, 80)}


def test_run_scan_preset(tmp_path):
    config = {
        "name": "mini_scan",
        "figure": "fig9",
        "kind": "spectrum_scan",
        "scan": {"entries": [{"label": "L3N1", "L": 3, "N": 1,
                              "points": 13}]},
    }
    out = run_scenario(config, tmp_path / "scan")
    header, data, _ = io._read_csv(out / "spectrum_L3N1.csv",
                                   io.SCHEMA_SPECTRUM)
    assert header == ["theta", "eigenvalue_index", "energy"]
    assert data.shape == (13 * 3, 3)


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["list-presets"]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x", "kind": "runs", "runs": []}))
    assert main(["run", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert main(["run", "nosuchpreset"]) == 2


def test_cli_run_and_filter_pipeline(tmp_path):
    config = preset("fig7a")
    config["runs"][0]["integrator"]["t_final"] = 2.0
    config["runs"][0]["n_traj"] = 3
    out = tmp_path / "run"
    run_scenario(config, out)
    csvs = sorted(str(p) for p in out.glob("panela_traj*.csv"))
    code = main(["filter", *csvs, "--window", "0.5",
                 "--min-records", "3", "--out", str(tmp_path / "filt")])
    assert code == 0
    stats_text = (tmp_path / "filt" / "window_stats.csv").read_text()
    assert stats_text.startswith(f"# schema={io.SCHEMA_WINDOW_STATS}")
    assert (tmp_path / "filt" / "spectrum.csv").exists()


def test_cli_darkstate_export(tmp_path):
    out = tmp_path / "dark.json"
    code = main(["darkstate", "--sites", "3", "--particles", "3",
                 "--theta", str(np.pi / 3), "--link", "1",
                 "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["schema"] == io.SCHEMA_DARKSTATES
    assert len(payload["states"]) == 1
    amps = np.array([a + 1j * b for a, b in
                     payload["states"][0]["amplitudes"]])
    assert np.linalg.norm(amps) == pytest.approx(1.0)


def test_cli_scan_spectrum(tmp_path):
    code = main(["scan-spectrum", "--sites", "3", "--particles", "1",
                 "--points", "7", "--out", str(tmp_path / "scan")])
    assert code == 0
    assert (tmp_path / "scan" / "spectrum_L3N1.csv").exists()


def test_trajectory_csv_round_trip(tmp_path):
    from ringmon import (ModelParams, SseConfig, asym_channel, build_basis,
                         build_hamiltonian, simulate_trajectory, total_current)
    basis = build_basis(3, 3)
    p = ModelParams(L=3, N=3, theta=np.pi / 3)
    H = build_hamiltonian(basis, p)
    ch = asym_channel(basis, p, [1, 2, 3], gamma=1.0)
    cfg = SseConfig(dt=1e-3, t_final=0.2, seed=3, record_stride=20)
    rec = simulate_trajectory(H, [ch], np.ones(10), cfg,
                              probes={"J_tot": total_current(basis, p)})
    path = tmp_path / "traj.csv"
    io.write_trajectory_csv(path, rec)
    view = io.read_trajectory_csv(path)
    assert np.allclose(view.times, rec.times)
    assert np.allclose(view.dq, rec.dq)
    assert np.allclose(view.observables["J_tot"], rec.observables["J_tot"])
    assert view.channel_gammas == [1.0]


def test_schema_version_enforced(tmp_path):
    path = tmp_path / "wrong.csv"
    path.write_text("# schema=ringmon.trajectory.v999\nt,dq_x\n0,0\n")
    with pytest.raises(SchemaError):
        io.read_trajectory_csv(path)
    path2 = tmp_path / "none.csv"
    path2.write_text("t,dq_x\n0,0\n")
    with pytest.raises(SchemaError):
        io.read_trajectory_csv(path2)
