import csv
import json

import pytest

from specbill import __version__
from specbill.cli import main


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    return {
        "disk": write(tmp_path / "two_disk.json", {"type": "two_disk", "radius": 1.0, "gap": 2.0}),
        "germ": write(tmp_path / "germ.json", {"type": "germ", "L": 2.0, "coeffs": {"2": 1.0, "3": 0.5, "4": -0.25}}),
        "dir": tmp_path,
    }


def read_csv(path):
    lines = [l for l in open(path) if not l.startswith("#")]
    return list(csv.DictReader(lines))


def test_hessian_row(tmp_path):
    out = tmp_path / "h.json"
    assert main(["hessian", "--r", "2", "--c", "2", "--out", str(out)]) == 0
    body = json.loads(out.read_text())
    assert body["inverse_row"] == pytest.approx([0.291666666666666, -0.0833333333333333, 0.0416666666666666,
                                                 -0.0833333333333333], abs=1e-15)
    assert body["meta"]["version"] == __version__ and body["meta"]["config"]["r"] == [2]


def test_hessian_exact(tmp_path):
    out = tmp_path / "h.json"
    assert main(["hessian", "--r", "2", "--c", "2", "--exact", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["exact"]["inverse_row"] == ["7/24", "-1/12", "1/24", "-1/12"]


def test_orbits_csv(files):
    out = files["dir"] / "orbits.csv"
    assert main(["orbits", "--domain", files["disk"], "--lmax", "10", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [float(r["length"]) for r in rows] == [4.0, 8.0]
    assert rows[0]["pattern"] == "+-" and rows[0]["ghost_flag"] == "0"
    text = out.read_text()
    assert text.startswith("# {") and '"version": "%s"' % __version__ in text


def test_roundtrip_report(files):
    out = files["dir"] / "rt.json"
    assert main(["roundtrip", "--germ", files["germ"], "--r", "2,4", "--order", "3", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["max_relative_error"] < 1e-9
    assert rep["meta"]["padded_orders"] == [5, 6]


def test_forward_recover_through_files(files):
    from specbill.geometry import GraphGerm
    from specbill.inverse import forward_table, recover_germ

    d = files["dir"]
    germ = write(d / "g6.json", {"L": 1.5, "coeffs": {"2": 0.8, "3": 0.3, "4": -0.2, "5": 0.7, "6": 1.1}})
    assert main(["forward", "--germ", germ, "--out", str(d / "t.json")]) == 0
    assert main(["recover", "--table", str(d / "t.json"), "--out", str(d / "back.json")]) == 0
    back = json.loads((d / "back.json").read_text())
    mem = recover_germ(forward_table(GraphGerm(1.5, {2: 0.8, 3: 0.3, 4: -0.2, 5: 0.7, 6: 1.1})))
    assert {int(k): v for k, v in back["coeffs"].items()} == mem.coeffs


def test_float_tables_also_round_trip(files):
    d = files["dir"]
    assert main(["forward", "--germ", files["germ"], "--float", "--out", str(d / "t.json")]) == 0
    assert "exact" not in json.loads((d / "t.json").read_text())
    assert main(["recover", "--table", str(d / "t.json"), "--out", str(d / "b.json")]) == 0


def test_deterministic_output(files):
    out = files["dir"] / "o.csv"
    argv = ["orbits", "--domain", files["disk"], "--lmax", "9", "--seed", "3", "--out", str(out)]
    assert main(argv) == 0
    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first


def test_specfun_check(tmp_path):
    out = tmp_path / "s.json"
    assert main(["specfun-check", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["checks"]["continuity_below_1e-10"]


def test_resonances_csv(files):
    out = files["dir"] / "res.csv"
    assert main(["resonances", "--domain", files["disk"], "--kmin", "7.3", "--kmax", "8.3",
                 "--grid", "11,13", "--n", "64", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 1 and rows[0]["winding"] == "1"
    assert float(rows[0]["re_k"]) == pytest.approx(7.8483756, abs=1e-5)


def test_poisson_outputs(files):
    d = files["dir"]
    assert main(["poisson", "--domain", files["disk"], "--kmin", "20", "--kmax", "26", "--n", "32",
                 "--dk-grid", "0.5", "--out", str(d / "p.csv"), "--peaks", str(d / "p.json")]) == 0
    assert read_csv(d / "p.csv")[0].keys() == {"t", "amplitude"}
    assert "peaks" in json.loads((d / "p.json").read_text())


@pytest.mark.parametrize("argv", [
    ["hessian", "--r", "2"],
    ["hessian", "--r", "2", "--c", "abc"],
    ["orbits", "--domain", "missing.json", "--lmax", "5"],
    ["orbits", "--lmax", "5"],
    ["frobnicate"],
    ["resonances", "--domain", "x.json", "--kmin", "5", "--kmax", "4"],
])
def test_config_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    write(tmp_path / "x.json", {"type": "two_disk", "radius": 1.0, "gap": 2.0})
    assert main(argv) == 2


def test_unknown_domain_keys_exit_2(files):
    bad = write(files["dir"] / "bad.json", {"type": "two_disk", "radius": 1.0, "gap": 2.0, "colour": "red"})
    assert main(["orbits", "--domain", bad, "--lmax", "5"]) == 2


def test_range_check_before_compute(files):
    assert main(["poisson", "--domain", files["disk"], "--kmin", "20", "--kmax", "30", "--n", "17"]) == 2


def test_numerical_failure_exit_3(files, capsys):
    assert main(["hessian", "--r", "2", "--c", "1"]) == 3
    assert "NotHyperbolic" in capsys.readouterr().err
    zero = write(files["dir"] / "flat.json", {"L": 2.0, "coeffs": {"2": 0.0, "3": 1.0, "4": 0.0}})
    assert main(["forward", "--germ", zero]) == 3
