import json
import subprocess
import sys

import numpy as np
import pytest

from fracreg.cli import main
from fracreg.grids import Grid, GridFunction


SOLVE_CFG = """
[grid]
dim = 1
h = 0.0625
box_radius = 4.0

[kernel]
kind = "constant"

[data]
s = 0.25
f = {{ kind = "constant", value = 1.0 }}

[domain]
balls = [ {{ center = [0.0], radius = 1.0 }} ]
"""

EXP_CFG = """
[grid]
dim = 1
box_radius = 8.0

[kernel]
kind = "rough"
lambda = 2.0

[experiment]
refinements = [0.125, 0.0625]
instances = 2
seed = 11
"""


@pytest.fixture
def solve_cfg(tmp_path):
    path = tmp_path / "solve.toml"
    path.write_text(SOLVE_CFG.format())
    return path


def test_cli_solve_outputs(tmp_path, solve_cfg):
    out = tmp_path / "out"
    assert main(["solve", "--config", str(solve_cfg), "--out", str(out)]) == 0
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["schema"] == 1
    assert diag["residual"] < 1e-9
    assert diag["energy_ratio"] > 0
    grid = Grid.box(1, 0.0625, 4.0)
    u = GridFunction.from_csv(grid, out / "solution.csv")
    v = GridFunction.from_binary(grid, out / "solution.bin")
    assert np.array_equal(u.values, v.values)
    assert u.values.max() > 0


def test_cli_field_pipeline(tmp_path, solve_cfg):
    out = tmp_path / "out"
    main(["solve", "--config", str(solve_cfg), "--out", str(out)])
    field_cfg = tmp_path / "field.toml"
    field_cfg.write_text(f"""
[grid]
dim = 1
h = 0.0625
box_radius = 4.0

[data]
s = 0.25

[domain]
balls = [ {{ center = [0.0], radius = 1.0 }} ]

[field]
path = "{out / 'solution.csv'}"
format = "csv"

[norms]
p = [2.0, 3.0]

[levelsets]
tau = 0.1
beta = 2.0
p = 3.0
""")
    assert main(["sgrad", "--config", str(field_cfg), "--out", str(out)]) == 0
    assert main(["maxfn", "--config", str(field_cfg), "--out", str(out)]) == 0
    assert main(["norms", "--config", str(field_cfg), "--out", str(out)]) == 0
    assert main(["levelsets", "--config", str(field_cfg), "--out", str(out)]) == 0
    mx = json.loads((out / "maximal.json").read_text())
    assert mx["pointwise_bound_holds"] is True
    norms = json.loads((out / "norms.json").read_text())
    assert norms["lp"]["2"] > 0
    ls = json.loads((out / "levelsets.json").read_text())
    assert ls["sandwich_ok"] is True


def test_cli_experiment_exit_code_and_determinism(tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(EXP_CFG)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["experiment", "linf", "--config", str(cfg),
                 "--out", str(out1), "--workers", "2"]) == 0
    assert main(["experiment", "linf", "--config", str(cfg),
                 "--out", str(out2), "--workers", "1"]) == 0
    assert (out1 / "linf.json").read_bytes() == (out2 / "linf.json").read_bytes()


def test_cli_experiment_seed_override_changes_report(tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(EXP_CFG)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["experiment", "linf", "--config", str(cfg), "--out", str(out1)])
    main(["experiment", "linf", "--config", str(cfg), "--out", str(out2),
          "--seed", "99"])
    a = json.loads((out1 / "linf.json").read_text())
    b = json.loads((out2 / "linf.json").read_text())
    assert a["params"]["seed"] == 11 and b["params"]["seed"] == 99
    assert a["refinements"] != b["refinements"]


def test_cli_bad_config_exits_nonzero(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[grid]\ndim = 1\nh = 0.5\nbox_radius = 2.0\n"
                   "[kernel]\nkind = \"weird\"\n")
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_cli_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "fracreg.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "experiment" in proc.stdout
