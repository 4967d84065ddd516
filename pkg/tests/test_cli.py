"""End-to-end runs of the command-line front end, in process."""

import json

from kusuoka import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_unknown_subcommand(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 64
    assert "unknown subcommand" in err
    code, _, _ = run(capsys)
    assert code == 64


def test_help_exits_zero(capsys):
    code, out, _ = run(capsys, "theta1", "--help")
    assert code == 0
    assert "--builtin" in out


def test_bad_flag_is_config_error(capsys):
    code, _, _ = run(capsys, "theta1", "--no-such-flag")
    assert code == 65
    code, _, err = run(capsys, "theta1")  # no system source
    assert code == 65
    assert "no system given" in err
    code, _, _ = run(capsys, "theta1", "--builtin", "sg", "--in", "also.json")
    assert code == 65
    code, _, _ = run(capsys, "theta1", "--builtin", "no-such-system")
    assert code == 65


def test_theta1_stdout(capsys):
    code, out, _ = run(capsys, "theta1", "--builtin", "sg")
    assert code == 0
    assert out.strip() == "4/5 (exact)"
    code, out, _ = run(capsys, "theta1", "--builtin", "sg3")
    assert code == 0
    assert out.strip() == "5/7 (exact)"


def test_theta1_json_out(capsys, tmp_path):
    dest = tmp_path / "t1.json"
    code, _, _ = run(capsys, "theta1", "--builtin", "sg", "--out", str(dest))
    assert code == 0
    body = json.loads(dest.read_text())
    assert body["exact"] == "4/5"
    assert body["irreducible"] is True


def test_validate_pass_and_fail(capsys):
    code, out, _ = run(capsys, "validate", "--builtin", "bernoulli:1/4,3/4")
    assert code == 0
    assert "overall: pass" in out
    code, out, _ = run(capsys, "validate", "--builtin", "bernoulli:1/4,1/4")
    assert code == 2
    assert "FAIL" in out


def test_validate_json_format(capsys):
    code, out, _ = run(capsys, "validate", "--builtin", "sg", "--format", "json")
    assert code == 0
    assert json.loads(out)["ok"] is True


def test_ck_and_theta2(capsys):
    code, out, _ = run(capsys, "ck", "--builtin", "sg", "--k", "1")
    assert code == 0
    assert out.strip() == "c_1 = 8/75"
    code, out, _ = run(capsys, "theta2", "--builtin", "sg")
    assert code == 0
    assert "theta2_theorem = 67/75" in out
    # dimension-one systems have no trace-free directions: config error
    code, _, _ = run(capsys, "ck", "--builtin", "bernoulli:1/2,1/2", "--k", "1")
    assert code == 65


def test_measure_csv(capsys):
    code, out, _ = run(capsys, "measure", "--builtin", "sg", "--depth", "1")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "word,nu"
    assert lines[1] == "0,1/3"
    assert len(lines) == 4


def test_measure_budget_exit(capsys):
    code, _, err = run(
        capsys, "measure", "--builtin", "sg", "--depth", "4", "--budget-k", "2"
    )
    assert code == 3
    assert "budget exceeded" in err
    code, _, _ = run(capsys, "measure", "--builtin", "sg", "--depth", "4", "--budget-k", "-1")
    assert code == 65


def test_gfun_csv(capsys):
    code, out, _ = run(capsys, "gfun", "--builtin", "sg", "--depth", "2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "prefix,g"
    assert "00,41/75" in lines
    code, _, _ = run(capsys, "gfun", "--builtin", "sg", "--depth", "0")
    assert code == 65


def test_sample_deterministic(capsys):
    code, out1, _ = run(capsys, "sample", "--builtin", "sg", "--length", "5",
                        "--count", "3", "--seed", "9")
    assert code == 0
    _, out2, _ = run(capsys, "sample", "--builtin", "sg", "--length", "5",
                     "--count", "3", "--seed", "9")
    assert out1 == out2
    words = out1.strip().splitlines()
    assert len(words) == 3
    assert all(len(w) == 5 and set(w) <= set("012") for w in words)


def test_correlate_csv(capsys):
    code, out, _ = run(capsys, "correlate", "--builtin", "sg",
                       "--alpha", "0", "--beta", "0", "--nmax", "2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,alpha,beta,gap,bound"
    assert lines[1] == "0,0,0,16/225,2"
    assert lines[2].startswith("1,0,0,64/1125,8/5")


def test_mixing_bound_csv(capsys):
    code, out, _ = run(capsys, "mixing-bound", "--builtin", "sg", "--k", "1", "--nmax", "3")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 5
    assert all(line.split(",")[3] == "True" for line in lines[1:])


def test_gasket_roundtrip(capsys, tmp_path):
    dest = tmp_path / "sg3.json"
    code, _, _ = run(capsys, "gasket", "--n", "3", "--out", str(dest))
    assert code == 0
    data = json.loads(dest.read_text())
    assert data["dim"] == 2
    assert len(data["maps"]) == 6
    code, out, _ = run(capsys, "theta1", "--in", str(dest))
    assert code == 0
    assert out.strip() == "5/7 (exact)"


def test_gasket_bad_n(capsys):
    code, _, _ = run(capsys, "gasket", "--n", "9")
    assert code == 65


def test_float_backend_flag(capsys):
    code, out, _ = run(capsys, "theta1", "--builtin", "sg", "--backend", "float")
    assert code == 0
    assert "(float)" in out
    assert out.lstrip().startswith("0.8")


def test_float_file_cannot_promote(capsys, tmp_path):
    dest = tmp_path / "sgf.json"
    code, _, _ = run(capsys, "gasket", "--n", "2", "--backend", "float", "--out", str(dest))
    assert code == 0
    code, _, err = run(capsys, "theta1", "--in", str(dest), "--backend", "exact")
    assert code == 65
    assert "cannot be promoted" in err


def test_renormalize_from_file(capsys, tmp_path):
    raw = tmp_path / "raw.json"
    raw.write_text(json.dumps({"maps": {
        "a": [["3/5", "0"], ["0", "1/5"]],
        "b": [["3/10", "-1/10*sqrt(3)"], ["-1/10*sqrt(3)", "1/2"]],
        "c": [["3/10", "1/10*sqrt(3)"], ["1/10*sqrt(3)", "1/2"]],
    }}))
    code, out, _ = run(capsys, "renormalize", "--in", str(raw))
    assert code == 0
    data = json.loads(out)
    assert data["alphabet"] == ["a", "b", "c"]
    assert data["backend"] == "exact"
    sysfile = tmp_path / "sys.json"
    sysfile.write_text(out)
    code, out, _ = run(capsys, "theta1", "--in", str(sysfile))
    assert code == 0
    assert out.strip() == "4/5 (exact)"


def test_renormalize_needs_file(capsys):
    code, _, err = run(capsys, "renormalize", "--builtin", "sg")
    assert code == 65
    assert "--in" in err


def test_dilation_residual(capsys):
    code, out, _ = run(capsys, "dilation", "--builtin", "sg", "--k", "2")
    assert code == 0
    assert out.strip() == "residual = 0"


def test_dilation_custom_function(capsys, tmp_path):
    ffile = tmp_path / "f.json"
    ffile.write_text(json.dumps({"depth": 2, "values": {"01": "1", "20": "-1/2"}}))
    code, out, _ = run(capsys, "dilation", "--builtin", "sg", "--k", "1",
                       "--f", str(ffile), "--level", "2")
    assert code == 0
    assert out.strip() == "residual = 0"


def test_qdecay_csv(capsys):
    code, out, _ = run(capsys, "qdecay", "--builtin", "sg", "--k", "1",
                       "--jmax", "3", "--trials", "5", "--seed", "2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "j,max_ratio,bound,ok"
    assert len(lines) == 4
    assert all(line.endswith("True") for line in lines[1:])


def test_threads_env_warning(capsys, monkeypatch):
    monkeypatch.setenv("KUSUOKA_THREADS", "bogus")
    code, _, err = run(capsys, "qdecay", "--builtin", "sg", "--k", "1",
                       "--jmax", "2", "--trials", "3")
    assert code == 0
    assert "KUSUOKA_THREADS" in err
    monkeypatch.setenv("KUSUOKA_THREADS", "2")
    code, out, _ = run(capsys, "qdecay", "--builtin", "sg", "--k", "1",
                       "--jmax", "2", "--trials", "3")
    assert code == 0


def test_report_deterministic(capsys, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    code, _, _ = run(capsys, "report", "--builtin", "sg", "--seed", "5", "--out", str(a))
    assert code == 0
    code, _, _ = run(capsys, "report", "--builtin", "sg", "--seed", "5", "--out", str(b))
    assert code == 0
    assert a.read_bytes() == b.read_bytes()
    body = json.loads(a.read_text())
    assert body["theta1"] == "4/5"
    assert body["c"]["1"] == "8/75"
    assert body["theta2_theorem"] == "67/75"
    assert body["nu_depth1"]["0"] == "1/3"
    assert body["nu_depth2"]["00"] == "41/225"
    assert all(row["ok"] for row in body["mixing_k1"])
    assert len(body["samples_len5"]) == 5


def test_report_rejects_invalid_system(capsys):
    code, _, err = run(capsys, "report", "--builtin", "bernoulli:1/4,1/4")
    assert code == 2
    assert "validation failure" in err


def test_missing_file_is_config_error(capsys, tmp_path):
    code, _, _ = run(capsys, "theta1", "--in", str(tmp_path / "absent.json"))
    assert code == 65
    garbled = tmp_path / "garbled.json"
    garbled.write_text("{not json")
    code, _, _ = run(capsys, "theta1", "--in", str(garbled))
    assert code == 65
