import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from rabistark import ModelParams, Parity, diagonalize, pole_0, pole_n
from rabistark.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    lines = text.strip("\n").split("\n")
    assert lines[0].startswith("# ")
    config = json.loads(lines[0][2:])
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    return config, rows


class TestGcurve:
    def test_sign_changes_match_ed(self, capsys, tmp_path):
        out = tmp_path / "g.csv"
        argv = ["gcurve", "--delta", "0.5", "--u", "1", "--g", "0.1", "--emin", "-1",
                "--emax", "4", "--samples", "4001", "--out", str(out)]
        assert main(argv) == 0
        config, rows = parse_csv(out.read_text())
        assert config["delta"] == 0.5 and config["samples"] == 4001
        ref = diagonalize(ModelParams(0.5, 0.1, 1.0), 300)
        for col, par in (("G_plus", Parity.EVEN), ("G_minus", Parity.ODD)):
            count, prev = 0, None
            for r in rows:
                if r["is_break"] == "1":
                    prev = None
                    continue
                v = float(r[col])
                if prev is not None and np.sign(v) != np.sign(prev):
                    count += 1
                prev = v
            lv = ref.sector(par)
            assert count == np.count_nonzero((lv > -1) & (lv < 4))
        poles = json.loads((tmp_path / "g.poles.json").read_text())
        p = ModelParams(0.5, 0.1, 1.0)
        assert poles["pole0"] == pytest.approx(pole_0(p), abs=1e-14)
        assert poles["poles"][0] == pytest.approx(pole_n(1, p), abs=1e-14)

    def test_empty_window(self, capsys):
        code, out, _ = run(["gcurve", "--delta", "0.5", "--u", "1", "--g", "0.1",
                            "--emin", "2", "--emax", "2", "--samples", "0"], capsys)
        assert code == 0
        lines = out.strip().split("\n")
        assert len(lines) == 2 and lines[1] == "E,G_plus,G_minus,is_break"

    def test_json(self, capsys):
        code, out, _ = run(["gcurve", "--delta", "0.5", "--u", "1", "--g", "0.1", "--emin", "-1",
                            "--emax", "1", "--samples", "5", "--format", "json"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["config"]["g"] == 0.1
        assert set(doc["rows"][0]) == {"E", "G_plus", "G_minus", "is_break"}
        assert "pole0" in doc["poles"]

    def test_fifteen_digits(self, capsys):
        _, out, _ = run(["gcurve", "--delta", "0.5", "--u", "1", "--g", "0.1", "--emin", "-1",
                         "--emax", "1", "--samples", "3"], capsys)
        _, rows = parse_csv(out)
        mant = rows[1]["G_plus"].lstrip("-").split("e")[0].replace(".", "").lstrip("0")
        assert len(mant) <= 15


class TestOtherCommands:
    def test_spectrum_ground_crossing(self, capsys):
        code, out, _ = run(["spectrum", "--delta", "0.5", "--u", "1", "--gmax", "1.2",
                            "--gsteps", "13", "--emin", "-1.5", "--emax", "1", "--n-general", "1"],
                           capsys)
        assert code == 0
        levels, crossings = out.split("\n\n")
        _, rows = parse_csv(crossings)
        ground = [r for r in rows if r["ground_state"] == "1"]
        assert len(ground) == 1
        assert float(ground[0]["g"]) == pytest.approx(0.6124, abs=1e-4)
        assert float(ground[0]["E"]) == -0.5

    def test_collapse_accumulates(self, capsys):
        code, out, _ = run(["collapse", "--delta", "0.5", "--g", "0.3", "--levels", "20"], capsys)
        assert code == 0
        config, rows = parse_csv(out)
        assert config["E_c"] == pytest.approx(-0.43)
        lower = [float(r["E"]) for r in rows if r["branch"] == "lower"]
        assert len(lower) == 20
        assert all(e < -0.43 for e in lower)
        assert np.all(np.diff(lower) > 0)

    def test_exceptional(self, capsys):
        code, out, _ = run(["exceptional", "--delta", "1", "--u", "1.9", "--m", "1",
                            "--parity", "+", "--gmax", "0.6"], capsys)
        assert code == 0
        _, rows = parse_csv(out)
        assert rows and all(r["m"] == "1" and r["parity"] == "+" for r in rows)

    def test_ed_and_convergence(self, capsys):
        code, out, _ = run(["ed", "--delta", "0.5", "--u", "1", "--g", "0.3", "--levels", "4"],
                           capsys)
        _, rows = parse_csv(out)
        assert code == 0 and len(rows) == 4
        assert float(rows[0]["E"]) == pytest.approx(-0.298208475756402, abs=1e-12)
        code, out, _ = run(["ed", "--delta", "0.5", "--u", "1", "--g", "0.3", "--levels", "2",
                            "--ntr-list", "50,100", "--format", "json"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["converged"] == [True, True]

    def test_validate_standard(self, capsys):
        code, out, _ = run(["validate", "--grid", "standard"], capsys)
        assert code == 0
        assert "FAIL" not in out


class TestErrors:
    def test_usage(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["gcurve", "--delta", "0.5"])
        assert info.value.code == 1
        with pytest.raises(SystemExit) as info:
            main(["nope"])
        assert info.value.code == 1

    def test_bad_values(self, capsys):
        code, _, err = run(["gcurve", "--delta", "-1", "--g", "0.1"], capsys)
        assert code == 1 and "delta" in err
        code, _, err = run(["spectrum", "--delta", "0.5", "--u", "1", "--tol", "0"], capsys)
        assert code == 1
        code, _, _ = run(["spectrum", "--delta", "0.5", "--u", "1", "--gsteps", "0"], capsys)
        assert code == 1

    def test_regime(self, capsys):
        code, _, err = run(["gcurve", "--delta", "0.5", "--u", "2", "--g", "0.1"], capsys)
        assert code == 2 and "regime" in err
        code, _, _ = run(["collapse", "--delta", "0.5", "--u", "1", "--g", "0.1"], capsys)
        assert code == 2
        code, _, _ = run(["ed", "--delta", "0.5", "--u", "2.5", "--g", "0.1"], capsys)
        assert code == 2

    def test_io_error(self, capsys, tmp_path):
        code, _, err = run(["ed", "--delta", "0.5", "--g", "0.1", "--out",
                            str(tmp_path / "missing" / "x.csv")], capsys)
        assert code == 1 and "I/O" in err

    def test_validation_failure_exit(self, capsys, monkeypatch):
        from rabistark import validation
        monkeypatch.setattr(validation, "run",
                            lambda grid: [validation.Check("fake", 1.0, 0.1, False)])
        code, out, _ = run(["validate"], capsys)
        assert code == 3 and "FAIL" in out


def test_deterministic(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.csv"
        subprocess.run([sys.executable, "-m", "rabistark", "spectrum", "--delta", "0.5", "--u",
                        "1", "--gsteps", "4", "--emin", "-1", "--emax", "1", "--n-general", "1",
                        "--out", str(path)], check=True)
        outs.append(path.read_bytes() + (tmp_path / f"run{k}.crossings.csv").read_bytes())
    # config echo contains the output-independent fields only
    assert outs[0] == outs[1]


def test_help_lists_columns():
    res = subprocess.run([sys.executable, "-m", "rabistark", "gcurve", "--help"],
                         capture_output=True, text=True, check=True)
    assert "E,G_plus,G_minus,is_break" in res.stdout
