import json

import numpy as np
import pytest

from lpplab import io as lio
from lpplab.cli import ExperimentConfig, ConfigError, build_config, main


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_simulate_writes_files_with_config_header(tmp_path):
    out = tmp_path / "o"
    code = main(["simulate", "--profile", '{"kind": "narrow_wedge"}', "--n", "100",
                 "--seeds", "1", "--out", str(out)])
    assert code == 0
    meta, header, rows = lio.read_csv(out / "simulate_field.csv")
    assert header == ["seed", "i", "k", "l", "L", "exit_label", "corner_label"]
    assert meta["config"]["n"] == 100 and meta["config"]["profile"] == {"kind": "narrow_wedge"}
    assert "workers" not in meta["config"]
    assert {r[6] for r in rows} == {"0"}  # the wedge has one corner
    summary = json.loads((out / "simulate_summary.json").read_text())
    assert summary["meta"]["config_hash"] == meta["config_hash"]


def test_same_config_twice_is_byte_identical(tmp_path):
    args = ["simulate", "--n", "64", "--seeds", "3"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b"), "--workers", "2"])
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    assert a == b


@pytest.mark.parametrize("argv, message", [
    (["simulate", "--n", "100", "--a", "5"], "n^(1/3)"),
    (["simulate", "--seeds", "0"], "seeds"),
    (["converge", "--t-ladder", "4"], "3 points"),
    (["simulate", "--alpha", "0.5"], "alpha"),
    (["verify", "--fault", "explode"], "fault"),
])
def test_invalid_configs_are_rejected(argv, message, capsys):
    assert main(argv) == 2
    assert message in capsys.readouterr().err


def test_usage_errors_exit_two():
    assert main(["nonsense"]) == 2
    assert main(["simulate", "--n", "abc"]) == 2


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 77, "seeds": 5, "alpha": 0.2}))
    c = build_config(["simulate", "--config", str(cfg), "--seeds", "9"])
    assert (c.n, c.seeds, c.alpha) == (77, 9, 0.2)
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ConfigError):
        build_config(["simulate", "--config", str(cfg)])


def test_corollary_windows_must_fit():
    with pytest.raises(ConfigError):
        ExperimentConfig("converge", n=27, t_ladder=[1, 4, 16], corollary=True).validate()


def test_verify_fault_hook_exits_nonzero(tmp_path):
    base = ["verify", "--seeds", "2", "--n-list", "30", "--oracle-instances", "5"]
    assert main(base + ["--out", str(tmp_path / "ok")]) == 0
    assert main(base + ["--fault", "decouple", "--out", str(tmp_path / "bad")]) == 1
    rep = json.loads((tmp_path / "bad" / "verify_report.json").read_text())["report"]
    assert rep["lemmas"]["30"]["comparison"] > 0


def test_converge_and_exitpoints_outputs(tmp_path):
    assert main(["converge", "--n", "64", "--seeds", "10", "--t-ladder", "1", "2", "4",
                 "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "converge_report.json").read_text())["report"]
    assert rep["tail"]["monotone_trend"] in (True, False)
    assert len(rep["per_t"]) == 3
    assert main(["exitpoints", "--n", "64", "--seeds", "10", "--profile",
                 '{"kind": "narrow_wedge"}', "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "exitpoints_report.json").read_text())["report"]
    assert rep["mean_label"] == 0.0
    assert all(p == 0 for p in rep["tail"]["probabilities"])


def test_io_roundtrip_and_nonfinite(tmp_path):
    p = lio.write_csv(tmp_path / "x.csv", ["a", "b"], [(1, 0.1), (2, np.float64(1 / 3))],
                      {"k": 1})
    meta, header, rows = lio.read_csv(p)
    assert meta == {"k": 1} and float(rows[1][1]) == 1 / 3
    lio.write_json(tmp_path / "y.json", {"v": float("inf"), "w": np.int64(3)})
    assert json.loads((tmp_path / "y.json").read_text()) == {"v": None, "w": 3}
    assert lio.config_hash({"n": 1, "workers": 4}) == lio.config_hash({"n": 1, "workers": 1})
