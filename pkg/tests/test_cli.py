import csv
import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from rhsdamp import cli
from rhsdamp.eigen import ModelParams
from rhsdamp.errors import ConfigError
from rhsdamp.testfn import make_bump

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "report.schema.json").read_text())

FUNCS = """
[[functions]]
name = "b"
kind = "bump"
lo = 1.0
hi = 2.0

[[functions]]
name = "c"
kind = "bump"
lo = -0.5
hi = 1.5

[[functions]]
name = "g"
kind = "gauss_hermite"
sigma = 1.0
k = 0
"""

CONFIGS = {
    "expand": '[expand]\nfunction = "b"\nbasis = "minus"\nN = 5\n',
    "evolve": '[evolve]\nfunction = "b"\nt = [0.0, 1.0, 2.0]\nN = 4\n',
    "reconstruct": '[reconstruct]\nfunction = "b"\nx = [0.5, 1.5]\nfamily = "psi"\n',
    "residues": '[residues]\nfunction = "g"\nn_max = 2\nbranch = "plus"\n',
    "hardy": '[hardy]\nfunction = "b"\n',
    "classical": '[classical]\nt = [0.5, 1.0]\n',
}


def write_config(tmp_path, experiment, body=None, gamma=1.0):
    text = f'gamma = {gamma}\nexperiment = "{experiment}"\n' + FUNCS + "\n" + (
        CONFIGS.get(experiment, "") if body is None else body)
    path = tmp_path / f"{experiment}.toml"
    path.write_text(text)
    return path


def run(tmp_path, experiment, *extra, body=None, out="out"):
    cfg = write_config(tmp_path, experiment, body)
    code = cli.main(["--config", str(cfg), "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(autouse=True)
def fixed_clock(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")


class TestExperiments:
    @pytest.mark.parametrize("experiment", sorted(CONFIGS))
    def test_report_validates(self, tmp_path, experiment):
        code, out = run(tmp_path, experiment)
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        jsonschema.validate(report, SCHEMA)
        s = report["summary"]
        assert s["total"] == len(report["entries"]) == s["passed"] + s["failed"]
        assert s["failed"] == 0
        ids = [e["check_id"] for e in report["entries"]]
        assert ids == sorted(ids)
        assert report["environment"]["seed"] == 0
        assert report["environment"]["timestamp"].startswith("1970-01-01")

    @pytest.mark.parametrize("experiment,name", [
        ("expand", "expand"), ("evolve", "decay"), ("evolve", "concentration"),
        ("reconstruct", "reconstruct"), ("residues", "residues"), ("hardy", "hardy"),
        ("classical", "classical"),
    ])
    def test_csv_headers(self, tmp_path, experiment, name):
        _, out = run(tmp_path, experiment)
        assert read_csv(out / f"{name}.csv")[0] == cli.HEADERS[name]

    def test_classical_row(self, tmp_path):
        _, out = run(tmp_path, "classical", body="[classical]\nx0 = 1.0\np0 = 1.0\nt = [1.0]\n")
        row = [float(v) for v in read_csv(out / "classical.csv")[1]]
        assert row == pytest.approx([1.0, 0.36787944, 2.71828183], abs=1e-8)

    def test_expand_real_moments(self, tmp_path):
        _, out = run(tmp_path, "expand")
        rows = read_csv(out / "expand.csv")[1:]
        assert [int(r[0]) for r in rows] == list(range(6))
        assert all(float(r[2]) == 0.0 for r in rows)
        assert all(float(r[1]) > 0 for r in rows)

    def test_expand_plus_basis(self, tmp_path):
        body = ('[[functions]]\nname = "z"\nkind = "fourier_of"\nchild = {kind = "bump", lo = -1.0, hi = 1.0}\n'
                '[expand]\nfunction = "z"\nbasis = "plus"\nN = 6\n')
        code, out = run(tmp_path, "expand", body=body)
        assert code == 0
        rows = read_csv(out / "expand.csv")[1:]
        assert all(abs(complex(float(r[1]), float(r[2]))) < 1e-14 for r in rows[1::2])

    def test_evolve_entries(self, tmp_path):
        _, out = run(tmp_path, "evolve")
        report = json.loads((out / "report.json").read_text())
        assert len(report["entries"]) == 3 * 5
        assert all(e["pass"] for e in report["entries"])
        conc = read_csv(out / "concentration.csv")[1:]
        assert float(conc[0][1]) == 0.0

    def test_hardy_json(self, tmp_path):
        _, out = run(tmp_path, "hardy")
        reports = json.loads((out / "hardy.json").read_text())["reports"]
        assert {r["family"] for r in reports} == {"psi", "fpsi"}
        for r in reports:
            assert 0.0 <= r["halfline_mass_ratio"] <= 1.0
            assert r["classification"] in ("UpperLikely", "LowerLikely", "Neither", "Inconclusive")

    def test_verify_suite(self, tmp_path):
        code, out = run(tmp_path, "verify", "--jobs", "2")
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        jsonschema.validate(report, SCHEMA)
        assert report["summary"]["failed"] == 0
        assert report["summary"]["total"] >= 30

    def test_default_experiment_without_config(self, tmp_path, capsys):
        code = cli.main(["--experiment", "classical", "--out", str(tmp_path / "o")])
        assert code == 0
        assert "classical: 2/2" in capsys.readouterr().out


class TestDeterminism:
    @pytest.mark.parametrize("experiment", ["evolve", "residues", "hardy"])
    def test_byte_identical(self, tmp_path, experiment):
        run(tmp_path, experiment, out="a")
        run(tmp_path, experiment, out="b")
        for f in sorted((tmp_path / "a").iterdir()):
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()

    def test_timestamp_is_the_only_difference(self, tmp_path, monkeypatch):
        run(tmp_path, "classical", out="a")
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "86400")
        run(tmp_path, "classical", out="b")
        a = json.loads((tmp_path / "a" / "report.json").read_text())
        b = json.loads((tmp_path / "b" / "report.json").read_text())
        assert a["environment"]["timestamp"] != b["environment"]["timestamp"]
        a["environment"].pop("timestamp")
        b["environment"].pop("timestamp")
        assert a == b


class TestExitCodes:
    def test_check_failure(self, tmp_path, capsys):
        code, out = run(tmp_path, "classical", "--tolerance-scale", "1e-30")
        assert code == 1
        report = json.loads((out / "report.json").read_text())
        assert report["summary"]["failed"] >= 1
        assert "FAIL classical." in capsys.readouterr().out

    @pytest.mark.parametrize("body,field", [
        ('[expand]\nfunction = "b"\nbasis = "sideways"\n', "expand.basis"),
        ('[expand]\nfunction = "nope"\n', "expand.function"),
        ('[expand]\nfunction = "b"\nN = -3\n', "expand.N"),
        ('[expand]\nfunction = "b"\nbogus = 1\n', "expand.bogus"),
    ])
    def test_config_errors_name_field_and_line(self, tmp_path, capsys, body, field):
        code, _ = run(tmp_path, "expand", body=body)
        assert code == 2
        err = capsys.readouterr().err
        assert f"'{field}'" in err
        text = write_config(tmp_path, "expand", body).read_text().splitlines()
        key = field.split(".")[1]
        line = next(i for i, s in enumerate(text, 1) if s.startswith(key + " ") and i > 20)
        assert f"(line {line})" in err

    def test_invalid_toml(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("gamma = = 1\n")
        assert cli.main(["--config", str(p), "--out", str(tmp_path / "o")]) == 2

    def test_missing_file(self, tmp_path):
        assert cli.main(["--config", str(tmp_path / "none.toml")]) == 2

    @pytest.mark.parametrize("flags", [["--jobs", "0"], ["--tolerance-scale", "0"],
                                       ["--tolerance-scale", "nan"]])
    def test_bad_flags(self, tmp_path, flags):
        assert cli.main(["--experiment", "classical", "--out", str(tmp_path), *flags]) == 2

    def test_bad_gamma(self):
        with pytest.raises(ConfigError, match="gamma"):
            cli.parse_config("gamma = -1.0\n")

    def test_runtime_error(self, tmp_path, capsys):
        code, _ = run(tmp_path, "expand", body='[expand]\nfunction = "b"\nbasis = "plus"\n')
        assert code == 3
        assert "ClassViolationError" in capsys.readouterr().err

    def test_experiment_flag_overrides(self, tmp_path):
        rc = cli.parse_config('experiment = "hardy"\n' + FUNCS + CONFIGS["classical"], "classical")
        assert rc.experiment == "classical"


class TestDecayTable:
    def test_examples(self):
        p = ModelParams(1.0)
        rows = cli.emit_decay_table(make_bump(1, 2, 1), [0.0, 2.0], 4, p)
        for t, n, _, ratio, expected in rows:
            assert abs(ratio - expected) <= 1e-10 * expected
            if t == 0.0:
                assert ratio == 1.0
        r = next(r for r in rows if r[0] == 2.0 and r[1] == 1)
        assert r[3] == pytest.approx(0.0497870684, abs=1e-10)
        assert r[3] == pytest.approx(math.exp(-3), rel=1e-10)

    def test_independent_of_function(self):
        a = cli.emit_decay_table(make_bump(1, 2, 1), [0.5, 1.5], 6)
        b = cli.emit_decay_table(make_bump(-0.5, 1.5, 2), [0.5, 1.5], 6)
        ra = np.array([r[3] for r in a])
        rb = np.array([r[3] for r in b if math.isfinite(r[3])])
        assert np.allclose(ra, rb, rtol=1e-10, atol=0)

    def test_complex_serialisation(self):
        assert cli.complex_json(1 + 2j) == {"re": 1.0, "im": 2.0}
        assert cli.complex_json(complex(math.inf, 0)) == {"re": None, "im": 0.0}
