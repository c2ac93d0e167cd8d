import json
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hosplab.cli import (
    ConfigError,
    format_complex,
    main,
    parse_complex_exact,
    parse_config,
    run_command,
    table_from_json,
    table_to_json,
    worker_count,
    write_outputs,
)
from hosplab.coeffkernel import GaussianRational as G
from hosplab.recurrences import model_base_coefficients, trinh_base_coefficients


def _run(argv):
    status, arts = run_command(parse_config(argv))
    return status, arts.get("output", arts.get("report"))


class TestLiterals:
    @pytest.mark.parametrize("text,want", [
        ("0.5+1i", G(Fraction(1, 2), 1)),
        ("-1-1i", G(-1, -1)),
        ("1/2+i", G(Fraction(1, 2), 1)),
        ("-0.7+1i", G(Fraction(-7, 10), 1)),
        ("i", G(0, 1)),
        ("-i", G(0, -1)),
        ("2i", G(0, 2)),
        ("3", G(3)),
        ("1e-3-2.5i", G(Fraction(1, 1000), Fraction(-5, 2))),
    ])
    def test_parse(self, text, want):
        assert parse_complex_exact(text) == want

    @pytest.mark.parametrize("bad", ["", "1+", "a+bi", "1 + 2i", "1+2j", "++1"])
    def test_reject(self, bad):
        with pytest.raises(ValueError):
            parse_complex_exact(bad)

    @given(st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e12))
    def test_format_round_trip(self, z):
        assert complex(parse_complex_exact(format_complex(z))) == z


class TestConfig:
    def test_coeffs(self):
        cfg = parse_config(["coeffs", "--case", "model", "--n", "10"])
        assert cfg.command == "coeffs" and cfg.get("n") == 10 and cfg.case == "model"

    def test_borel_pade(self):
        cfg = parse_config(["borel-pade", "--case", "model", "--z", "0.5+1i", "--N", "250"])
        assert cfg.get("N") == 250
        assert cfg.get("z") == (G(Fraction(1, 2), 1),)

    def test_negative_values_after_flags(self):
        cfg = parse_config(["latefit", "--case", "trinh", "--a", "-1+1i", "--z", "-0.7+1i"])
        assert cfg.get("a") == G(-1, 1) and cfg.get("z") == (G(Fraction(-7, 10), 1),)

    def test_missing_a_names_key(self, capsys):
        with pytest.raises(ConfigError, match="'a'"):
            parse_config(["coeffs", "--case", "trinh", "--n", "3"])
        assert main(["coeffs", "--case", "trinh", "--n", "3"]) == 2
        assert "'a'" in capsys.readouterr().err

    def test_ill_typed_names_key(self):
        with pytest.raises(ConfigError, match="'n'"):
            parse_config(["coeffs", "--n", "ten"])
        with pytest.raises(ConfigError, match="'z'"):
            parse_config(["borel-pade", "--z", "1+2j"])

    def test_unknown_command_and_case(self):
        with pytest.raises(ConfigError):
            parse_config(["plot"])
        with pytest.raises(ConfigError):
            parse_config(["borel-pade", "--case", "pearcey", "--z", "1"])

    def test_config_file_and_override(self, tmp_path):
        f = tmp_path / "run.json"
        f.write_text(json.dumps({"case": "trinh", "a": "-1+1i", "n": 4, "seed": 7}))
        cfg = parse_config(["coeffs", "--config", str(f)])
        assert cfg.case == "trinh" and cfg.get("n") == 4 and cfg.seed == 7
        assert cfg.get("a") == G(-1, 1)
        cfg = parse_config(["coeffs", "--config", str(f), "--n", "6", "--seed", "1"])
        assert cfg.get("n") == 6 and cfg.seed == 1
        f.write_text(json.dumps({"n": 4, "colour": "red"}))
        with pytest.raises(ConfigError, match="'colour'"):
            parse_config(["coeffs", "--config", str(f)])

    def test_worker_count(self, monkeypatch):
        monkeypatch.delenv("HOSP_LAB_THREADS", raising=False)
        assert worker_count(parse_config(["verify"])) == 1
        monkeypatch.setenv("HOSP_LAB_THREADS", "3")
        assert worker_count(parse_config(["verify"])) == 3
        assert worker_count(parse_config(["verify", "--threads", "2"])) == 2


class TestOutputs:
    def test_coeffs_json_round_trip(self):
        _, text = _run(["coeffs", "--case", "model", "--n", "12"])
        t = table_from_json(text)
        ref = model_base_coefficients(12)
        assert all(a == b for a, b in zip(t.entries, ref.entries)) and len(t) == len(ref)
        assert table_to_json(t) == text
        doc = json.loads(text)
        # exact integers as digit strings, never floats
        assert doc["entries"][2]["numerator"]["re"] == ["3", "3", "2"]

    def test_trinh_json_round_trip(self):
        _, text = _run(["coeffs", "--case", "trinh", "--a", "-1+1i", "--n", "4"])
        t = table_from_json(text)
        ref = trinh_base_coefficients(4, G(-1, 1))
        assert all(a == b for a, b in zip(t.entries, ref.entries))
        assert t.params == ref.params

    @pytest.mark.parametrize("argv", [
        ["coeffs", "--case", "model", "--n", "20", "--kind", "amplitude"],
        ["latefit", "--case", "model", "--z", "2/5", "--N", "80"],
        ["borel-pade", "--z", "0.5+1i;-1-1i", "--N", "30"],
        ["stokes-map", "--case", "model", "--format", "json"],
    ])
    def test_deterministic(self, argv, tmp_path):
        outs = []
        for k in range(2):
            path = tmp_path / f"out{k}"
            assert main(argv + ["--out", str(path)]) == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]
        assert b"\r" not in outs[0]

    def test_parallel_matches_serial(self):
        argv = ["borel-pade", "--z", "0.5+1i;-1-1i;0.5", "--N", "30"]
        assert _run(argv + ["--threads", "1"]) == _run(argv + ["--threads", "3"])

    def test_csv_headers(self):
        heads = {
            "borel-pade": (["borel-pade", "--z", "0.5+1i", "--N", "30"], "z,re_w,im_w,residual,label"),
            "stokes-map": (["stokes-map", "--case", "model"], "re,im,label,active"),
            "smoothing-scan": (["smoothing-scan", "--n", "30", "--num", "5"],
                               "s,re_z,im_z,T,re_meas,im_meas,re_model,im_model,normalized"),
            "oracle": (["oracle", "--path", "-2.5-4.33i;-1-1i", "--eps", "0.1", "--spacing", "1"],
                       "z,re_y,im_y,log10_residual,fitted_rate"),
        }
        for name, (argv, head) in heads.items():
            status, text = _run(argv)
            assert status == 0
            assert text.splitlines()[0] == head, name

    def test_latefit_json(self):
        _, text = _run(["latefit", "--case", "model", "--z", "2/5", "--N", "200"])
        doc = json.loads(text)
        assert set(doc) >= {"chi_hat", "alpha_hat", "prefactor_hat", "status", "convergence_table"}
        chi = complex(parse_complex_exact(doc["chi_hat"]))
        assert abs(chi - 0.08) <= 1e-4

    def test_stokes_map_b2_mask(self):
        _, text = _run(["stokes-map", "--case", "model", "--format", "json"])
        doc = json.loads(text)
        assert {c["label"] for c in doc["curves"]} == {"B>1", "B>2", "1>2", "HOSL"}
        (b2,) = [c for c in doc["curves"] if c["label"] == "B>2"]
        for re_, act in zip(b2["re"], b2["active"]):
            x = float(re_)
            if 0.5 < x < 1:
                assert not act
            elif x > 1:
                assert act

    def test_write_outputs(self, tmp_path):
        p = tmp_path / "a.txt"
        assert write_outputs({"output": "x\ny\n"}, {"output": str(p)}) == [str(p)]
        assert p.read_bytes() == b"x\ny\n"

    def test_runtime_error_exit(self, capsys):
        assert main(["latefit", "--case", "model", "--z", "0", "--N", "20"]) == 1
        assert "latefit" in capsys.readouterr().err


class TestVerify:
    @pytest.mark.parametrize("argv", [["verify", "--case", "model"], ["verify", "--case", "pearcey"],
                                      ["verify", "--case", "kelvin"],
                                      ["verify", "--case", "trinh", "--a", "-1+1i"]])
    def test_passes(self, argv, capsys):
        assert main(argv) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out and out.strip().endswith("checks)")

    def test_failure_exit(self, monkeypatch, capsys):
        import hosplab.verify_checks as vc
        monkeypatch.setitem(vc._CHECKS, "kelvin", [lambda: (False, "forced")])
        assert main(["verify", "--case", "kelvin"]) == 1
        assert "FAIL" in capsys.readouterr().out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "hosplab", "coeffs", "--n", "2"],
                       capture_output=True, text=True, check=True)
    assert json.loads(r.stdout)["case"] == "model"
