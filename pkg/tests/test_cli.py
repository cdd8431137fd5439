import csv
import json
import subprocess
import sys

import jsonschema
import pytest

from affcap.cli import main
from affcap.config import CONFIG_SCHEMA, RESULT_SCHEMA

SEG = {"type": "segment", "a": -0.5, "b": 0.5}


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _strip_wall_time(doc):
    if isinstance(doc, dict):
        return {k: _strip_wall_time(v) for k, v in doc.items() if k != "wall_time"}
    if isinstance(doc, list):
        return [_strip_wall_time(v) for v in doc]
    return doc


def test_compute_ball_collapse(tmp_path, capsys):
    cfg = {"body": {"type": "ball", "n": 3}, "Q": SEG, "p": 2, "quantities": ["cap-ball", "cap-lower", "cap-upper"]}
    out = tmp_path / "r.json"
    assert main(["compute", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, RESULT_SCHEMA)
    r = doc["results"]
    vals = [r[k]["value"] for k in ("cap-ball", "cap-lower", "cap-upper")]
    errs = [r[k]["err"] for k in ("cap-ball", "cap-lower", "cap-upper")]
    assert max(vals) - min(vals) <= 3 * max(errs) + 1e-12
    assert "cap-upper" in capsys.readouterr().out


def test_compute_cube_surface_and_j_star(tmp_path):
    out = tmp_path / "r.json"
    cfg = {"body": {"type": "cube", "n": 2}, "Q": SEG, "p": 1, "quantities": ["sp", "volume"]}
    assert main(["compute", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    res = json.loads(out.read_text())["results"]
    assert res["sp"]["value"] == pytest.approx(8.0) and res["volume"]["value"] == pytest.approx(4.0)
    cfg = {"body": {"type": "ball", "n": 4}, "Q": SEG, "p": 2, "quantities": ["j-star", "j-opt"]}
    assert main(["compute", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    res = json.loads(out.read_text())["results"]
    assert res["j-star"]["value"] == 2.0
    assert abs(res["j-opt"]["value"] - 2.0) < 5e-3


def test_compute_h_proj_directions(tmp_path):
    out = tmp_path / "r.json"
    cfg = {"body": {"type": "cube", "n": 2}, "Q": SEG, "p": 1, "quantities": ["h-proj"],
           "directions": [[1, 0], [0.6, -0.8]]}
    assert main(["compute", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["results"]["h-proj"]["value"] == pytest.approx([2.0, 2.8])


def test_output_is_byte_identical_modulo_wall_time(tmp_path):
    cfg = {"body": {"type": "ellipsoid", "axes": [1, 0.5, 0.8]}, "Q": {"type": "unit_square"}, "p": 1.5,
           "quantities": ["phi", "cap-lower"], "outer": {"kind": "qmc", "level": 1}, "seed": 42}
    path = _write(tmp_path, cfg)
    docs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        assert main(["compute", "--config", path, "--out", str(out)]) == 0
        docs.append(_strip_wall_time(json.loads(out.read_text())))
    assert json.dumps(docs[0], sort_keys=True) == json.dumps(docs[1], sort_keys=True)
    assert docs[0]["results"]["phi"]["seed"] == 42


def test_seed_flag_overrides_config(tmp_path):
    cfg = {"body": {"type": "ball", "n": 3}, "Q": {"type": "unit_square"}, "p": 1.5, "quantities": ["phi"],
           "outer": {"kind": "qmc", "level": 1}}
    out = tmp_path / "r.json"
    assert main(["compute", "--config", _write(tmp_path, cfg), "--seed", "5", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["results"]["phi"]["seed"] == 5


def test_document_round_trip(tmp_path):
    cfg = {"body": {"type": "cube", "n": 3}, "Q": SEG, "p": 1.5, "quantities": ["sp", "cap-lower"]}
    out = tmp_path / "r.json"
    assert main(["compute", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    text = out.read_text()
    assert json.dumps(json.loads(text), indent=2, sort_keys=True) + "\n" == text


def test_csv_format(tmp_path, capsys):
    cfg = {"body": {"type": "cube", "n": 2}, "Q": SEG, "p": 1, "quantities": ["sp"]}
    assert main(["compute", "--config", _write(tmp_path, cfg), "--format", "csv"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert rows[0]["quantity"] == "sp" and float(rows[0]["value"]) == pytest.approx(8.0)


def test_sweep_scale_axis(tmp_path):
    cfg = {"body": {"type": "cube", "n": 3}, "Q": SEG, "p": 1.5, "quantities": ["phi"], "sweep": {"a": [1, 2, 4]}}
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", _write(tmp_path, cfg), "--out", str(out), "--format", "csv"]) == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    vals = [float(r["phi"]) for r in rows]
    assert vals[1] / vals[0] == pytest.approx(2 ** 1.5, rel=1e-12)
    assert vals[2] / vals[1] == pytest.approx(2 ** 1.5, rel=1e-12)
    doc = json.loads((tmp_path / "sweep.json").read_text())
    jsonschema.validate(doc, RESULT_SCHEMA)
    assert len(doc["rows"]) == 3


def test_sweep_level_axis_errors_decrease(tmp_path):
    cfg = {"body": {"type": "ellipsoid", "axes": [1, 0.6]}, "Q": SEG, "p": 1, "quantities": ["phi"],
           "sweep": {"level": [2, 3, 4]}}
    out = tmp_path / "sweep.json"
    assert main(["sweep", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    errs = [r["phi_err"] for r in json.loads(out.read_text())["rows"]]
    assert errs[0] > errs[1] > errs[2]


def test_sweep_p_and_tau_and_b(tmp_path):
    base = {"body": {"type": "cross_polytope", "n": 2}, "Q": SEG, "p": 1, "quantities": ["d-np"]}
    out = tmp_path / "s.json"
    cfg = dict(base, sweep={"p": [1, 1.01, 1.1]})
    assert main(["sweep", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    assert [r["p"] for r in json.loads(out.read_text())["rows"]] == [1, 1.01, 1.1]
    cfg = dict(base, quantities=["phi"], sweep={"tau": [-1, 0, 1]})
    assert main(["sweep", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    rows = json.loads(out.read_text())["rows"]
    assert rows[0]["phi"] == pytest.approx(rows[2]["phi"], rel=1e-12)  # symmetric body
    cfg = dict(base, quantities=["phi"], sweep={"b": [1, 3]})
    assert main(["sweep", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    rows = json.loads(out.read_text())["rows"]
    assert rows[1]["phi"] / rows[0]["phi"] == pytest.approx(3.0, rel=1e-12)


def test_sweep_rejects_two_axes(tmp_path, capsys):
    cfg = {"body": {"type": "cube", "n": 2}, "Q": SEG, "p": 1, "sweep": {"a": [1], "p": [1]}}
    assert main(["sweep", "--config", _write(tmp_path, cfg)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "InputError" and err["exit_code"] == 2


def test_verify_command(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["verify", "--suite", "phi-affine", "--trials", "2", "--seed", "7", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, RESULT_SCHEMA)
    assert doc["reports"][0]["name"] == "phi-affine" and doc["reports"][0]["passed"]
    assert "phi-affine" in capsys.readouterr().out


def test_verify_failure_exit_code(tmp_path, monkeypatch, capsys):
    from affcap import verify

    monkeypatch.setitem(verify.PROPERTIES, "proj-sublinear", lambda rng, tol, family: (1.0, {"n": 2}))
    assert main(["verify", "--suite", "proj-sublinear", "--trials", "1"]) == 1
    assert "proj-sublinear" in json.loads(capsys.readouterr().err)["message"]


def test_verify_unknown_property(capsys):
    assert main(["verify", "--suite", "unknown"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert "phi-affine" in err["message"]


@pytest.mark.parametrize(
    "cfg,code",
    [
        ({"body": {"type": "cube", "n": 2}, "Q": SEG, "p": 2, "quantities": ["cap-lower"]}, 2),
        ({"body": {"type": "cube", "n": 2}, "Q": {"type": "segment", "a": 1, "b": 2}, "p": 1}, 2),
        ({"body": {"type": "cube", "n": 2}, "Q": SEG, "p": 1, "n": 3}, 2),
        ({"body": {"type": "cube", "n": 2}, "Q": SEG}, 2),
    ],
)
def test_error_paths_write_nothing(tmp_path, capsys, cfg, code):
    out = tmp_path / "never.json"
    assert main(["compute", "--config", _write(tmp_path, cfg), "--out", str(out)]) == code
    assert not out.exists()
    assert list(tmp_path.iterdir()) == [tmp_path / "cfg.json"]
    json.loads(capsys.readouterr().err)


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    from affcap import cli
    from affcap.errors import PositivityError

    def boom(*args, **kwargs):
        raise PositivityError("support value 0 <= floor", node=None, value=0.0)

    monkeypatch.setattr(cli, "phi", boom)
    cfg = {"body": {"type": "cube", "n": 2}, "Q": SEG, "p": 1, "quantities": ["phi"]}
    assert main(["compute", "--config", _write(tmp_path, cfg)]) == 3


def test_missing_or_malformed_config(tmp_path):
    assert main(["compute", "--config", str(tmp_path / "absent.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["compute", "--config", str(bad)]) == 2


def test_schema_and_list_properties(capsys):
    assert main(["schema"]) == 0
    assert json.loads(capsys.readouterr().out) == json.loads(json.dumps(CONFIG_SCHEMA))
    assert main(["schema", "result"]) == 0
    assert json.loads(capsys.readouterr().out)["title"] == "ResultDocument"
    assert main(["list-properties"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 15


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "affcap.cli", "list-properties"], capture_output=True, text=True)
    assert proc.returncode == 0 and "tau-reduction" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "affcap.cli", "compute", "--bogus"], capture_output=True, text=True)
    assert proc.returncode == 2
