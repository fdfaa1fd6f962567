import json

import pytest
from hypothesis import given, settings, strategies as st

from subdiff.cli import main
from subdiff.config import ConfigError, RunConfig, parse_config, serialize_config

MINIMAL = "[problem]\ndim = 1\nalpha = 0.5\n[datum]\nspec = gaussian\n"


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert isinstance(cfg, RunConfig)
    assert (cfg.dim, cfg.alpha) == (1, 0.5)
    assert cfg.datum == "gaussian(scale=1.0,mass=1.0)"
    assert cfg.norm == "p=inf" and cfg.decades == (2, 6) and cfg.method == "auto"
    assert cfg.times() == (1e2, 1e3, 1e4, 1e5, 1e6)


def test_alpha_one_rejected():
    with pytest.raises(ConfigError, match="alpha must lie in"):
        parse_config(MINIMAL.replace("0.5", "1.0"))


def test_intermediate_scale_too_fast_rejected():
    with pytest.raises(ConfigError, match="line 7"):
        parse_config(MINIMAL + "[scale]\nscale = intermediate(t^0.3,0,1)\n")


def test_every_problem_is_listed_with_its_line():
    text = "[problem]\ndim = 4\nalpha = 0.5\n[run]\ncolour = red\nmethod = magic\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    probs = exc.value.problems
    assert any(p.startswith("line 2:") for p in probs)
    assert any(p.startswith("line 5:") and "colour" in p for p in probs)
    assert any(p.startswith("line 6:") for p in probs)


def test_syntax_error_has_line_number():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("[problem]\ndim = 1\nthis is not a key value pair\n")


@settings(max_examples=40, deadline=None)
@given(dim=st.sampled_from([1, 2, 3]), alpha=st.floats(0.01, 0.99),
       datum=st.sampled_from(["gaussian(scale=2)", "ball_indicator(radius=0.5,height=3)", "smooth_bump",
                              "power_tail(A=2,beta=7)"]),
       scale=st.sampled_from(["compact(1)", "characteristic(0.5,2)", "very_fast(3)"]),
       lo=st.integers(0, 4), tol=st.floats(1e-9, 1e-2))
def test_round_trip(dim, alpha, datum, scale, lo, tol):
    text = MINIMAL.replace("dim = 1", "dim = %d" % dim).replace("0.5", repr(alpha)).replace("gaussian", datum)
    text += "[scale]\nscale = %s\n[run]\ndecades = %d,%d\nmass_tol = %r\n" % (scale, lo, lo + 4, tol)
    cfg = parse_config(text)
    assert parse_config(serialize_config(cfg)) == cfg


def test_cli_ml(capsys):
    assert main(["ml", "--alpha", "0.5", "--x", "1"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.427583576155807, rel=1e-14)


def test_cli_usage_errors():
    assert main(["frobnicate"]) == 2
    assert main(["ml", "--alpha", "1.5", "--x", "1"]) == 2
    assert main(["solve", "--dim", "1"]) == 2


def test_cli_solve_is_reproducible(tmp_path):
    out = tmp_path / "snap.csv"
    args = ["solve", "--dim", "2", "--alpha", "0.5", "--datum", "gaussian", "--t", "10", "--out", str(out)]
    assert main(args) == 0
    first = json.loads((tmp_path / "snap.csv.manifest.json").read_text())
    assert main(args) == 0
    second = json.loads((tmp_path / "snap.csv.manifest.json").read_text())
    assert first["outputs"] == second["outputs"]
    assert first["version"] and first["backend"] in ("cython", "python")
    assert out.read_text().splitlines()[0] == "r,u"


def test_cli_profile_manifest_has_checksum(tmp_path):
    out = tmp_path / "table.csv"
    assert main(["profile", "--dim", "3", "--alpha", "0.5", "--out", str(out)]) == 0
    man = json.loads((tmp_path / "table.csv.manifest.json").read_text())
    assert "dim=3,alpha=0.5" in man["tables"]
    assert "# kappa=" in out.read_text()


def test_cli_tolerance_failure_exit_code(tmp_path):
    cfg = tmp_path / "tight.ini"
    cfg.write_text("[problem]\ndim = 1\nalpha = 0.45\n[run]\nmass_tol = 1e-300\n")
    assert main(["profile", "--config", str(cfg), "--out", str(tmp_path / "t.csv")]) == 3


def test_cli_rates_pass_and_fail(tmp_path):
    cfg = tmp_path / "run.ini"
    text = "[problem]\ndim = 3\nalpha = 0.5\n[scale]\nscale = characteristic(1,2)\n[norm]\nnorm = p=2\n"
    cfg.write_text(text)
    assert main(["rates", "--config", str(cfg), "--out", str(tmp_path / "ok")]) == 0
    assert (tmp_path / "ok" / "rates.csv").exists()
    assert (tmp_path / "ok" / "manifest.json").exists()
    cfg.write_text(text + "[run]\nrate_tol = 1e-9\n")
    assert main(["rates", "--config", str(cfg), "--out", str(tmp_path / "bad")]) == 1


def test_cli_verify_report(tmp_path):
    assert main(["verify", "--id", "V10", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "V10.csv").exists() and (tmp_path / "summary.csv").exists()
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert set(man["outputs"]) == {"summary.csv", "V10.csv"}
