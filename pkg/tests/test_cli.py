import json
import os

import numpy as np
import pytest

from fracspde.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, main
from fracspde.config import ExperimentConfig
from fracspde.errors import ConfigError
from fracspde.io import atomic_write_text, file_sha256, write_csv

SMALL = {"n_steps": 64, "n_x": 33, "N": 4, "M": 16}


def _config(tmp_path, name="cfg.json", **kw):
    path = tmp_path / name
    path.write_text(json.dumps({**SMALL, **kw}))
    return str(path)


# -- config ------------------------------------------------------------------------


def test_config_roundtrip_and_hash_stability():
    cfg = ExperimentConfig.from_dict({**SMALL, "g": {"kind": "zero"}})
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert again == cfg
    assert again.config_hash() == cfg.config_hash()
    assert cfg.with_overrides(out="elsewhere").config_hash() == cfg.config_hash()
    assert cfg.with_overrides(seed=5).config_hash() != cfg.config_hash()


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown configuration key"):
        ExperimentConfig.from_dict({"n_step": 64})


def test_alpha_range_hypothesis():
    cfg = ExperimentConfig.from_dict({**SMALL, "alpha": 0.2})
    with pytest.raises(ConfigError, match="hypothesis check failed"):
        cfg.require_hypotheses()


def test_mode_count_cannot_exceed_grid():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"n_x": 17, "M": 32})


def test_level_shapes_halve():
    cfg = ExperimentConfig()
    assert cfg.level_shape(2, 3) == (256, 256, 16, 128)
    assert cfg.level_shape(0, 3) == (64, 64, 4, 32)


def test_ensemble_seeds():
    assert ExperimentConfig(seed=7, ensemble=3).ensemble_seeds() == [7, 8, 9]


# -- io ----------------------------------------------------------------------------


def test_csv_roundtrips_floats_exactly(tmp_path):
    vals = np.random.default_rng(0).standard_normal((5, 3))
    p = write_csv(tmp_path / "a.csv", ["a", "b", "c"], vals)
    back = np.loadtxt(p, delimiter=",", skiprows=1)
    assert np.array_equal(back, vals)


def test_atomic_write_leaves_no_temporaries(tmp_path):
    target = tmp_path / "sub" / "f.txt"
    atomic_write_text(target, "one")
    atomic_write_text(target, "two")
    assert target.read_text() == "two"
    assert os.listdir(target.parent) == ["f.txt"]


# -- commands ----------------------------------------------------------------------


def test_simulate_writes_outputs_and_is_deterministic(tmp_path):
    cfg = _config(tmp_path, g={"kind": "zero"}, h={"kind": "zero"}, solvers=["mild"])
    runs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == EXIT_OK
        runs.append(out)
    csvs = sorted(p.relative_to(runs[0]) for p in runs[0].rglob("*.csv"))
    assert [str(p) for p in csvs] == ["seed_0/mild.csv", "seed_0/noise_modes.csv"]
    for rel in csvs:
        assert file_sha256(runs[0] / rel) == file_sha256(runs[1] / rel)
    m = [json.loads((r / "manifest.json").read_text()) for r in runs]
    assert m[0]["config_hash"] == m[1]["config_hash"]
    assert m[0]["files"] == m[1]["files"]
    assert m[0]["seeds"] == [0]


def test_invalid_alpha_exits_with_config_error(tmp_path, capsys):
    cfg = _config(tmp_path, alpha=0.6)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "α ∈ (1−H, 1/2)" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_unknown_key_exits_with_config_error(tmp_path):
    cfg = _config(tmp_path, bogus=1)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG


@pytest.mark.parametrize("which", ["kernel", "lemma1"])
def test_verify_passes(tmp_path, which):
    cfg = _config(tmp_path, n_x=65, M=32)
    out = tmp_path / "o"
    assert main(["verify", which, "--config", cfg, "--out", str(out)]) == EXIT_OK
    assert json.loads((out / f"verify_{which}.json").read_text())["passed"] is True


def test_verify_bound_i_small(tmp_path):
    cfg = _config(tmp_path, ensemble=2)
    out = tmp_path / "o"
    assert main(["verify", "bound-i", "--config", cfg, "--out", str(out), "--n-operators", "5"]) == EXIT_OK
    rep = json.loads((out / "verify_bound-i.json").read_text())
    assert rep["n_checks"] == 10 and rep["violations"] == 0


def test_holder_constant_path_flags_undefined_slope(tmp_path):
    cfg = _config(
        tmp_path,
        g={"kind": "zero"},
        h={"kind": "zero"},
        phi={"kind": "constant", "value": 1.0},
    )
    out = tmp_path / "o"
    assert main(["holder", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rep = json.loads((out / "holder_seed_0.json").read_text())
    assert rep["undefined_slope"] is True


def test_holder_constant_h_ensemble(tmp_path):
    cfg = _config(tmp_path, n_steps=256, h={"kind": "constant", "a": 1.0}, ensemble=3)
    out = tmp_path / "o"
    code = main(["holder", "--config", cfg, "--out", str(out)])
    s = json.loads((out / "holder_summary.json").read_text())
    assert s["bound_used"] == "constant_h"
    assert code == (EXIT_OK if s["pass_rate"] >= 0.9 else EXIT_CHECK)


def test_compare_writes_table(tmp_path):
    cfg = _config(tmp_path, n_steps=128, n_x=128, N=8, M=64)
    out = tmp_path / "o"
    code = main(["compare", "--config", cfg, "--out", str(out), "--refine", "2"])
    rep = json.loads((out / "compare.json").read_text())
    assert len(rep["levels"]) == 2
    assert code == (EXIT_OK if rep["passed"] else EXIT_CHECK)
    assert (out / "compare.csv").read_text().startswith("n_steps,n_x,N,M")
