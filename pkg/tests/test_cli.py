from __future__ import annotations

import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from pqadic.cli import run
from pqadic.digits import parse_point, parse_rational
from pqadic.fseries import closed_form, parse_spec

CHI3_JSON = '{"p":2,"a":["1/2","3/2"],"b":["0","1/2"],"integer_map":["n/2","(3n+1)/2"]}'


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def chi3_file(tmp_path):
    path = tmp_path / "chi3.json"
    path.write_text(CHI3_JSON)
    return str(path)


class TestExamples:
    def test_closed_form(self):
        code, out, _ = call("closed-form", "--series", "p=2,d=2,q=1,3", "--z", "p=2;pre=;per=1")
        assert code == 0
        data = json.loads(out)
        assert data["value"] == "-2"

    def test_hydra_search(self, chi3_file, capsys):
        code, out, _ = call("hydra-search", "--map", chi3_file, "--pre-max", "2", "--per-max", "4")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["z", "preperiod", "period", "chi", "kind", "cycle"]
        assert any(r[0] == "-2/3" and r[3] == "1" and r[4] == "PERIODIC_CONFIRMED" for r in rows[1:])
        assert "cursor=" in capsys.readouterr().err

    def test_measure_check(self):
        code, out, _ = call("measure-check", "--p", "2", "--c", "3", "--N", "1")
        assert code == 0
        last = out.strip().splitlines()[-1].split()
        assert last[0] == "max_abs_error" and float(last[1]) <= 1e-9

    def test_measure_check_json(self):
        code, out, _ = call("measure-check", "--p", "3", "--c", "1/3", "--N", "3", "--format", "json")
        data = json.loads(out)
        assert float(data["max_error"]) <= 1e-9
        assert len(data["rows"]) == 2 * 27


class TestCommands:
    def test_eval_and_classify(self):
        code, out, _ = call("eval", "--series", "p=2,d=2,q=1,3", "--z", "-1", "--N", "3")
        assert code == 0 and json.loads(out)["partial_sum"] == "19/4"
        code, out, _ = call("classify", "--series", "p=2,d=7,q=1,6", "--z", "-1")
        assert json.loads(out) == {"places": ["inf", "2", "3"], "ratio": "6/7", "period_length": 1}

    def test_negative_rational_argument(self):
        code, out, _ = call("hydra-chi", "--z", "-2/3")
        assert code == 0
        data = json.loads(out)
        assert data["value"] == "1" and data["z_value"] == "-2/3"

    def test_frame_report(self):
        code, out, _ = call("frame-report", "--series", "p=3,d=2,q=1,3,5",
                            "--z", "0", "--z", "p=3;pre=;per=1", "--z", "p=3;pre=;per=2", "--z", "p=3;pre=;per=00012")
        assert code == 0
        assert json.loads(out)["degree_lower_bound"] == 3

    def test_adele(self):
        code, out, _ = call("adele", "--series", "p=2,d=7,q=1,6", "--z", "-1")
        assert json.loads(out) == {"diagonal": "7"}
        code, out, _ = call("adele", "--series", "p=2,d=2,q=1,3", "--stream", "squares:1", "--tail-policy", "infinity")
        data = json.loads(out)
        assert data["tail"] == "infinity" and data["explicit"]["3"]["approx_mod"] == "3^12"

    def test_digits(self):
        code, out, _ = call("digits", "--z", "-1/3", "--p", "2", "--n", "4")
        data = json.loads(out)
        assert data["per"] == [1, 0] and data["project"] == "5"

    def test_config_overrides(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"z": "5"}))
        code, out, _ = call("--config", str(cfg), "closed-form", "--series", "p=2,d=2,q=1,3", "--z", "1")
        assert code == 0
        assert json.loads(out)["value"] == str(closed_form(parse_spec("p=2,d=2,q=1,3"), parse_point("5", 2)).value)

    def test_resume(self, chi3_file, capsys):
        _, full, _ = call("hydra-search", "--map", chi3_file, "--pre-max", "2", "--per-max", "4")
        _, first, _ = call("hydra-search", "--map", chi3_file, "--pre-max", "2", "--per-max", "2")
        cursor = int(capsys.readouterr().err.strip().splitlines()[-1].split("cursor=")[1])
        _, rest, _ = call("hydra-search", "--map", chi3_file, "--pre-max", "2", "--per-max", "4", "--resume", str(cursor))
        body = lambda s: s.splitlines()[1:]  # noqa: E731
        assert body(first) + body(rest) == body(full)


class TestErrors:
    def test_usage(self):
        assert call()[0] == 1
        assert call("closed-form")[0] == 1
        assert call("frame-report", "--series", "p=2,d=2,q=1,3", "--frame", "standard")[0] == 1

    def test_parse_error_has_position(self):
        code, _, err = call("closed-form", "--series", "p=2,d=2,q=1,3", "--z", "p=2;pre=;per=1x")
        assert code == 1
        assert err.startswith("error: PARSE_ERROR")
        assert "position" in err

    def test_domain_errors(self):
        code, _, err = call("closed-form", "--series", "p=2,d=2,q=1,2", "--z", "-1")
        assert code == 2 and "RATIO_ONE" in err
        code, _, err = call("measure-check", "--p", "2", "--c", "2", "--N", "1")
        assert code == 2 and "BAD_CONSTANT" in err
        code, _, err = call("digits", "--z", "3", "--p", "6")
        assert code == 2 and "NOT_PRIME" in err

    def test_bad_config_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"nonsense": 1}))
        code, out, _ = call("--config", str(cfg), "closed-form", "--series", "p=2,d=2,q=1,3", "--z", "1")
        assert code == 1 and out == ""


class TestSerialization:
    @pytest.mark.parametrize("series,z", [
        ("p=2,d=2,q=1,3", "p=2;pre=;per=1"),
        ("p=3,d=2,q=1,3,5", "p=3;pre=;per=00012"),
        ("p=2,d=3/2,q=1/2,5", "p=2;pre=101;per=011"),
    ])
    def test_closed_form_round_trip(self, series, z):
        _, out, _ = call("closed-form", "--series", series, "--z", z)
        data = json.loads(out)
        cf = closed_form(parse_spec(series), parse_point(z))
        assert parse_rational(data["value"]) == cf.value
        assert parse_rational(data["A"]) == cf.A and parse_rational(data["B"]) == cf.B
        assert parse_rational(data["r"]) == cf.r

    def test_deterministic(self, chi3_file):
        cmds = [
            ("measure-check", "--p", "3", "--c", "2/7", "--N", "4"),
            ("hydra-search", "--map", chi3_file, "--pre-max", "2", "--per-max", "3", "--workers", "2"),
            ("frame-report", "--series", "p=2,d=2,q=1,3", "--z", "-1", "--z", "5"),
        ]
        for argv in cmds:
            assert call(*argv)[1] == call(*argv)[1]

    def test_script_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "pqadic", "closed-form", "--series", "p=2,d=7,q=1,6", "--z", "-1"],
            capture_output=True, text=True, check=True,
        )
        assert json.loads(proc.stdout)["value"] == "7"
        assert Fraction(json.loads(proc.stdout)["r"]) == Fraction(6, 7)
