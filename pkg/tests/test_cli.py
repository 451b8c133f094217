import csv
import math

import pytest

from randifs.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_GUARD, EXIT_PASS, load_config, main
from randifs.exceptions import ConfigError

OSC = """[system]
variant = two-map
r1 = 0.3333333333333333
r2 = 0.3333333333333333
p = 0.5, 0.5
q = 0.5, 0.5
[sampling]
n = 50000
n_orbits = 500
seed = 3
[dimension]
n_basepoints = 40
"""


def run(tmp_path, command, text, *extra):
    cfg = tmp_path / "run.ini"
    cfg.write_text(text)
    out = tmp_path / "out"
    return main([command, "--config", str(cfg), "--out", str(out), *extra]), out


def records(path):
    with open(path, newline="") as fh:
        return {row["key"]: row["value"] for row in csv.DictReader(fh)}


def test_config_errors_are_exhaustive():
    text = OSC.replace("[dimension]", "[dimension]\nfoo = 2\n") + "[extra]\nx = 1\n"
    text = text.replace("n = 50000", "n = 0").replace("r1 = 0.3333333333333333", "r1 = 1.5")
    with pytest.raises(ConfigError) as exc:
        load_config(text=text)
    errs = exc.value.errors
    assert any("foo" in e for e in errs) and any("[extra]" in e for e in errs)
    assert any("n must be" in e for e in errs)
    assert any("r1" in e for e in errs)


def test_variant_key_mismatch():
    with pytest.raises(ConfigError) as exc:
        load_config(text="[system]\nvariant = jump\nlam_lo = 0.4\nlam_hi = 0.5\nrho = 0.3\n")
    assert "not used by variant" in exc.value.errors[0]


def test_malformed_config_writes_nothing(tmp_path):
    code, out = run(tmp_path, "dimension", "[system]\nvariant = 9.9\n")
    assert code == EXIT_CONFIG and not out.exists()


def test_bounds_upper_two(tmp_path):
    # [DERIVED] p = q = (1/2, 1/2), r = (1/2, 1/2): 2 log 2 / log 2 = 2
    text = "[system]\nvariant = two-map\nr1 = 0.5\nr2 = 0.5\np = 0.5, 0.5\nq = 0.5, 0.5\n"
    code, out = run(tmp_path, "bounds", text)
    assert code == EXIT_PASS
    rows = {r["quantity"]: r["value"] for r in csv.DictReader(open(out / "bounds.csv"))}
    assert float(rows["dim_upper"]) == pytest.approx(2.0)


def test_bounds_log_base_two(tmp_path):
    code, out = run(tmp_path, "bounds", OSC, "--log-base", "2")
    rows = {r["quantity"]: r["value"] for r in csv.DictReader(open(out / "bounds.csv"))}
    assert float(rows["chi_closed_form"]) == pytest.approx(math.log2(3))
    assert float(rows["dim_lower_fiber"]) == pytest.approx(math.log(2) / math.log(3))


def test_bounds_discs(tmp_path):
    code, out = run(tmp_path, "bounds", "[system]\nvariant = discs\nlam = 1.0\n")
    rows = {r["quantity"]: r["value"] for r in csv.DictReader(open(out / "bounds.csv"))}
    assert code == EXIT_PASS and rows["overlap_k"] == "2"


def test_dimension_summary_matches_csv(tmp_path):
    code, out = run(tmp_path, "dimension", OSC)
    assert code == EXIT_PASS
    summary = records(out / "summary.csv")
    slopes = [float(r["slope"]) for r in csv.DictReader(open(out / "basepoints.csv"))]
    assert abs(sum(slopes) / len(slopes) - float(summary["mean_slope"])) <= 1e-12
    assert summary["verdict"] == "PASS"
    assert records(out / "metadata.csv")["seed"] == "3"


def test_seed_override_changes_output(tmp_path):
    _, out = run(tmp_path, "sample", OSC, "--seed", "4")
    a = (out / "sample.csv").read_bytes()
    _, out = run(tmp_path, "sample", OSC, "--seed", "5")
    assert a != (out / "sample.csv").read_bytes()
    assert len(a.splitlines()) == 50001


def test_mixture_fails(tmp_path):
    code, out = run(tmp_path, "dimension", "[system]\nvariant = mixture\n[sampling]\nn = 20000\n")
    assert code == EXIT_FAIL and records(out / "summary.csv")["verdict"] == "FAIL"


def test_oracle_guard(tmp_path):
    code, out = run(tmp_path, "oracle", OSC + "[oracle]\ndepths = 30\n")
    assert code == EXIT_GUARD and not out.exists()


def test_oracle_passes(tmp_path):
    code, out = run(tmp_path, "oracle", OSC + "[oracle]\ndepths = 2 4 6\nn_pairs = 20\n")
    assert code == EXIT_PASS
    widths = list(csv.DictReader(open(out / "oracle_widths.csv")))
    assert float(widths[-1]["max_width"]) < 2.0 ** -5


def test_cf_check(tmp_path):
    text = ("[system]\nvariant = jump\nlam = 0.4\nlam_lo = 0.4\nlam_hi = 0.4\n"
            "[sampling]\nn = 100000\n[cf_check]\nks_tol = 0.02\n")
    code, out = run(tmp_path, "cf-check", text)
    assert code == EXIT_PASS
    assert float(records(out / "cf_check.csv")["ks_distance"]) < 0.02
