import json
import os
import subprocess
import sys

import pytest

from ccnls.cli import EXIT_ASSERT, EXIT_OK, EXIT_PARAM, main
from ccnls.container import read_container
from ccnls.fields import Field
from ccnls.report import RunManifest, csv_text, dumps, emit_report, run_dir, tree_hash
from ccnls.studies import DEFAULTS, StudyOutput, resolve

TRAJ_COLUMNS = "t,Q1,Q2,Hs_u,Hs_v,Hs_w,drift1,drift2"


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def only_dir(root):
    dirs = [p for p in root.iterdir() if p.is_dir()]
    assert len(dirs) == 1
    return dirs[0]


def test_classify_example(capsys, tmp_path):
    code, out, _ = run(capsys, "classify", "--set", "alpha=1", "--set", "beta=1", "--set", "gamma=1",
                       "--out", str(tmp_path))
    assert code == EXIT_OK
    assert "ShortTime" in out
    summary = json.loads((only_dir(tmp_path) / "summary.json").read_text())
    assert summary["summary"]["kappa_tilde"] == 0.0


def test_simulate_zero_time_example(capsys, tmp_path):
    code, _, _ = run(capsys, "simulate", "--set", "T=0", "--out", str(tmp_path))
    assert code == EXIT_OK
    d = only_dir(tmp_path)
    frame = read_container(d / "trajectory.bin")
    assert isinstance(frame, Field) and frame.ncomp == 3
    lines = (d / "diagnostics.csv").read_text().splitlines()
    assert lines[0] == TRAJ_COLUMNS
    assert len(lines) == 2


def test_counterexample_a1_assert(capsys, tmp_path):
    code, out, _ = run(capsys, "counterexample-a1", "--set", "a=0.5", "--assert", "--out", str(tmp_path))
    assert code == EXIT_OK and "[pass]" in out
    lines = (only_dir(tmp_path) / "a1.csv").read_text().splitlines()
    assert lines[0] == "scale,member,ratio"


def test_counterexample_a1_assert_fails_outside_band(capsys, tmp_path):
    # with T = 1 the phase is no longer small and the certified bound degrades
    code, out, _ = run(capsys, "counterexample-a1", "--set", "T=1", "--assert", "--out", str(tmp_path))
    assert code == EXIT_ASSERT and "[FAIL]" in out


def test_unknown_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_PARAM
    assert "usage" in capsys.readouterr().err


def test_bad_parameter_exit_code(capsys, tmp_path):
    code, _, err = run(capsys, "picard", "--set", "nonsense=3", "--out", str(tmp_path))
    assert code == EXIT_PARAM and "parameter error" in err
    code, _, _ = run(capsys, "simulate", "--set", "dt=-1", "--out", str(tmp_path))
    assert code == EXIT_PARAM


def test_instability_exit_code(capsys, tmp_path):
    code, _, err = run(capsys, "simulate", "--set", "integrator=\"StrangSplit\"", "--set", "dt=0.5",
                       "--set", "T=20", "--set", "data.amplitude=200", "--out", str(tmp_path))
    assert code == 3
    assert "instability" in err


@pytest.mark.parametrize("sub", sorted(DEFAULTS))
def test_every_subcommand_has_dry_run(capsys, tmp_path, sub):
    code, out, _ = run(capsys, sub, "--dry-run", "--out", str(tmp_path))
    assert code == EXIT_OK and "parameters ok" in out
    assert not any(tmp_path.iterdir())


def test_dry_run_rejects_bad_values(capsys, tmp_path):
    code, _, _ = run(capsys, "picard", "--set", "T=5", "--dry-run", "--out", str(tmp_path))
    assert code == EXIT_PARAM


def test_config_file_and_manifest_roundtrip(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 2, "beta": 1, "gamma": 1}))
    out = tmp_path / "out"
    assert run(capsys, "classify", "--config", str(cfg), "--out", str(out))[0] == EXIT_OK
    d = only_dir(out)
    first = tree_hash(d)
    # re-running from the emitted manifest lands in the same directory with the same bytes
    assert run(capsys, "classify", "--config", str(d / "manifest.json"), "--out", str(out))[0] == EXIT_OK
    assert only_dir(out) == d
    assert tree_hash(d) == first


def test_seed_environment_override(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("CCNLS_SEED", "77")
    assert run(capsys, "simulate", "--set", "T=0", "--out", str(tmp_path))[0] == EXIT_OK
    m = json.loads((only_dir(tmp_path) / "manifest.json").read_text())
    assert m["params"]["data"]["seed"] == 77
    assert set(m["seeds"].values()) == {77}


def test_seed_environment_must_be_integer(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("CCNLS_SEED", "abc")
    assert run(capsys, "simulate", "--set", "T=0", "--out", str(tmp_path))[0] == EXIT_PARAM


def output():
    out = StudyOutput({"x": 1.5, "bad": float("nan")}, {"t": (["scale", "member", "ratio"], [[2.0, 0, 0.25]])})
    out.passed, out.message = True, "ok"
    return out


def test_same_report_twice_identical_bytes(tmp_path):
    m = RunManifest("classify", resolve("classify", {}), {})
    a = emit_report(output(), m, tmp_path / "a")
    b = emit_report(output(), m, tmp_path / "b")
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes()
    again = emit_report(output(), m, tmp_path / "a")
    assert again == a and tree_hash(a) == tree_hash(b)


def test_manifest_hash_tracks_parameters():
    base = resolve("simulate", {})
    h = RunManifest("simulate", base, {}).content_hash()
    assert RunManifest("simulate", resolve("simulate", {}), {}).content_hash() == h
    for key, val in [("T", 0.5), ("K", 8), ("dt", 2.0**-10)]:
        changed = dict(base, **{key: val})
        assert RunManifest("simulate", changed, {}).content_hash() != h
    nested = json.loads(json.dumps(base))
    nested["data"]["seed"] = 99
    assert RunManifest("simulate", nested, {}).content_hash() != h
    assert RunManifest("picard", base, {}).content_hash() != h


def test_manifest_from_json_checks_hash():
    m = RunManifest("classify", {"alpha": 1}, {})
    d = m.to_json()
    assert RunManifest.from_json(d) == m
    d["params"]["alpha"] = 2
    with pytest.raises(ValueError):
        RunManifest.from_json(d)


def test_csv_and_json_formatting():
    assert csv_text(["a", "b"], [[0.1, None]]) == "a,b\n0.1,\n"
    assert json.loads(dumps({"x": float("inf")})) == {"x": "inf"}


def test_report_write_failure_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    m = RunManifest("classify", {}, {})
    with pytest.raises(OSError) as exc:
        emit_report(output(), m, blocker)
    assert str(run_dir(blocker, m)) in str(exc.value)


def test_figures_flag_writes_png(capsys, tmp_path):
    code, _, _ = run(capsys, "counterexample-a1", "--figures", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert list(only_dir(tmp_path).glob("*.png"))


def test_figures_are_deterministic(capsys, tmp_path):
    for root in ("a", "b"):
        run(capsys, "counterexample-a1", "--figures", "--out", str(tmp_path / root))
    assert tree_hash(only_dir(tmp_path / "a")) == tree_hash(only_dir(tmp_path / "b"))


def test_console_script_entry_point(tmp_path):
    env = dict(os.environ)
    env.pop("CCNLS_SEED", None)
    r = subprocess.run([sys.executable, "-m", "ccnls.cli", "classify", "--out", str(tmp_path)],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0
    assert r.stdout.startswith("classify:")
