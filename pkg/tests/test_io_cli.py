import csv
import io as sio
import json

import numpy as np
import pytest

from pieforge import io
from pieforge.cli import main
from pieforge.converter import convert_gpde


def run_cli(*argv):
    out, err = sio.StringIO(), sio.StringIO()
    rc = main(list(argv), out=out, err=err)
    return rc, out.getvalue(), err.getvalue()


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj, indent=2))
    return p


# ------------------------------------------------------------------ files
@pytest.mark.parametrize("name", io.builtin_ids())
def test_save_load_is_idempotent(tmp_path, name):
    model = io.load_builtin(name)
    io.save_model(model, tmp_path / "a.json")
    again = io.load_model(tmp_path / "a.json")
    assert all(again.params[k] == model.params[k] for k in model.params)
    assert again.n == model.n and again.dims == model.dims
    io.save_model(again, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()


def test_unknown_key_names_the_line(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{\n  "n": [0, 0, 1],\n  "bc": {"B": [[1, 0, 0, 0], [0, 0, 0, 1]]},\n  "pdee": {}\n}\n')
    with pytest.raises(io.ModelFileError, match=r"line 4\): unknown key 'pdee'"):
        io.load(p)


def test_malformed_json_reports_position(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"n": [0, 1],,}')
    with pytest.raises(io.ModelFileError, match="line 1"):
        io.load(p)


def test_bad_matrix_entry_names_the_field(tmp_path):
    p = write(tmp_path, "m.json", {"n": [0, 1], "bc": {"B": [[1, 0]]}, "pde": {"A0": [["s**"]]}})
    with pytest.raises(io.ModelFileError, match="pde.A0"):
        io.load(p)


def test_fractions_are_read_exactly(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"n": [0, 1], "domain": [0, 0.1], "bc": {"B": [[1, 0]]}, "pde": {"A0": [[0.1, 0]]}}')
    m = io.load_model(p)
    assert str(m.n.b) == "1/10"
    assert m.A0.to_strings() == [["1/10", "0"]]


def test_unknown_builtin():
    with pytest.raises(io.ModelFileError, match="available"):
        io.load_builtin("nope")


def test_pie_file_round_trip(tmp_path):
    pie = convert_gpde(io.load_builtin("datko"))
    io.save_pie(pie, tmp_path / "p.json", {"simulation": {"dt": 0.01, "M": 8}})
    back, cfg, _, _ = io.load_pie(tmp_path / "p.json", full=True)
    assert all(back.ops[k] == pie.ops[k] for k in pie.ops)
    assert cfg.dt == 0.01 and cfg.M == 8
    with pytest.raises(io.ModelFileError):
        io.load_pie(io.builtin_path("heat"))


# -------------------------------------------------------------------- cli
def test_cli_list():
    rc, out, _ = run_cli("list")
    assert rc == 0 and "heat" in out.split()


def test_cli_check_entropy():
    rc, out, _ = run_cli("check", "entropy")
    assert rc == 0
    assert "B_T = [[2, 1/2], [2, 3/2]]" in out
    assert out.strip().endswith("admissible")


def test_cli_exit_codes(tmp_path):
    assert run_cli()[0] == 1
    assert run_cli("frobnicate")[0] == 1
    assert run_cli("convert", "heat")[0] == 1  # missing -o
    bad = write(tmp_path, "bad.json", {"n": [0, 0, 1], "bc": {"B": [[1, 0, 0, 0], [1, 0, 0, 0]]},
                                      "pde": {"A0": [[0, 0, 1]]}})
    rc, out, err = run_cli("check", str(bad))
    assert rc == 3 and "inadmissible" in out
    assert run_cli("convert", str(bad), "-o", str(tmp_path / "x.json"))[0] == 3
    wrong = write(tmp_path, "wrong.json", {"n": [0, 0, 1], "bc": {"B": [[1, 0, 0, 0], [0, 0, 0, 1]]},
                                          "pde": {"A0": [[0, 1]]}})
    rc, out, _ = run_cli("check", str(wrong))
    assert rc == 2 and "A0" in out
    rc, _, err = run_cli("check", str(write(tmp_path, "k.json", {"n": [0, 1], "extra": 1})))
    assert rc == 2 and "extra" in err
    assert run_cli("check", "no_such_model")[0] == 2


def test_cli_convert_simulate_reconstruct(tmp_path):
    pie_path, out_csv, states = tmp_path / "heat.pie.json", tmp_path / "out.csv", tmp_path / "st.csv"
    assert run_cli("convert", "heat", "-o", str(pie_path))[0] == 0
    rc, msg, _ = run_cli("simulate", str(pie_path), "--dt", "0.002", "--tend", "0.02", "-o", str(out_csv),
                         "--states", str(states))
    assert rc == 0 and "steps=10" in msg
    with open(out_csv) as fh:
        rows = list(csv.DictReader(fh))
    energy = np.array([float(r["energy"]) for r in rows])
    assert len(rows) == 11 and np.all(np.diff(energy) <= 1e-10)
    primal = tmp_path / "primal.csv"
    assert run_cli("reconstruct", str(pie_path), str(states), "-o", str(primal))[0] == 0
    data = np.loadtxt(primal, delimiter=",", skiprows=1)
    first = data[data[:, 0] == 0.0]
    assert np.allclose(first[:, 2], np.sin(np.pi * first[:, 1] / 2), atol=1e-8)


def test_cli_simulate_eigenvalues():
    rc, out, _ = run_cli("simulate", "reaction_diffusion", "--open-loop", "--tend", "0.01", "--dt", "0.01",
                         "--modes", "24", "-o", "/dev/null", "--eigs", "1")
    assert rc == 0
    lam = float(out.splitlines()[-1].split()[1])
    assert lam == pytest.approx(10 - np.pi**2, abs=1e-8)


def test_cli_simulate_rejects_bad_step():
    assert run_cli("simulate", "heat", "--dt", "-1", "-o", "/dev/null")[0] == 2


def test_cli_reconstruct_rejects_foreign_grid(tmp_path):
    pie_path, states = tmp_path / "p.json", tmp_path / "st.csv"
    run_cli("convert", "heat", "-o", str(pie_path))
    states.write_text("t,s,xf1\n0,0,1\n0,0.3,1\n")
    assert run_cli("reconstruct", str(pie_path), str(states))[0] in (2, 4)


def test_cli_verify(tmp_path):
    report = tmp_path / "r.json"
    rc, out, _ = run_cli("verify", "--builtin", "heat", "-o", str(report))
    assert rc == 0 and "PASS=" in out
    data = json.loads(report.read_text())
    assert data["ok"] and data["target"] == "heat"
    assert run_cli("verify", "--builtin", "heat", "--model", "x")[0] == 1
    assert run_cli("verify", "--builtin", "nope")[0] == 2
