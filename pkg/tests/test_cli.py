import json
import re

import numpy as np
import pytest

from uavrcs.cli import main
from uavrcs.distributions import sample
from uavrcs.io import read_signature, read_sweep_counts, signature_csv, write_text
from uavrcs.recognition import ModelDatabase
from uavrcs.signature import RcsSignature, full_azimuth_grid

GATE = ["--gate-start", "35e-9", "--gate-stop", "45e-9"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def lognormal_fixture(path, mu, s, seed):
    az = full_azimuth_grid()
    write_text(str(path), signature_csv(RcsSignature(az, sample("Lognormal", (mu, s), az.size, seed=seed))))
    return str(path)


@pytest.fixture(scope="module")
def chamber(tmp_path_factory):
    d = tmp_path_factory.mktemp("chamber")
    assert main(["synth", "--out-dir", str(d), "--noise-floor", "-70", "--seed", "4"]) == 0
    return d


@pytest.fixture(scope="module")
def classes(tmp_path_factory):
    d = tmp_path_factory.mktemp("classes")
    return {
        "alpha": lognormal_fixture(d / "alpha.csv", -3.0, 0.4, 1),
        "beta": lognormal_fixture(d / "beta.csv", -1.5, 0.4, 2),
    }


class TestMie:
    def test_optical_row(self, capsys):
        code, out, _ = run(capsys, "mie", "--radius", 0.1524, "--freq", 15e9)
        assert code == 0
        sigma, dbsm, region = out.strip().split(",")
        assert region == "Optical"
        assert float(sigma) == pytest.approx(0.07296, rel=0.05)

    def test_approx(self, capsys):
        code, out, _ = run(capsys, "mie", "--radius", 0.1524, "--freq", 15e9, "--approx")
        assert code == 0 and out.strip().endswith("Optical")

    def test_missing_flag(self, capsys):
        code, _, err = run(capsys, "mie", "--radius", 0.1)
        assert code == 2 and "usage" in err

    def test_exclusive_modes(self, capsys):
        code, _, _ = run(capsys, "mie", "--radius", 0.1, "--freq", 1e9, "--approx", "--exact")
        assert code == 2

    def test_domain_error(self, capsys):
        code, _, err = run(capsys, "mie", "--radius", -1, "--freq", 1e9)
        assert code == 2 and "error" in err


class TestProcess:
    def test_round_trip_within_half_db(self, capsys, chamber, tmp_path):
        out = tmp_path / "sig.csv"
        code, _, _ = run(
            capsys, "process", "--sweep", chamber / "sweep.csv", "--background", chamber / "background.csv",
            "--sphere", chamber / "sphere.csv", *GATE, "--out", out,
        )
        assert code == 0
        got, truth = read_signature(str(out)), read_signature(str(chamber / "truth.csv"))
        assert np.max(np.abs(got.rcs_dbsm - truth.rcs_dbsm)) < 0.5
        manifest = json.loads((tmp_path / "sig.csv.manifest.json").read_text())
        assert set(manifest["inputs"]) == {str(chamber / n) for n in ("sweep.csv", "background.csv", "sphere.csv")}

    def test_byte_identical(self, capsys, chamber, tmp_path):
        outs = []
        for name in ("a.csv", "b.csv"):
            run(
                capsys, "process", "--sweep", chamber / "sweep.csv", "--background", chamber / "background.csv",
                "--sphere", chamber / "sphere.csv", *GATE, "--out", tmp_path / name,
            )
            outs.append((tmp_path / name).read_bytes())
        assert outs[0] == outs[1]

    def test_config_file(self, capsys, chamber, tmp_path):
        cfg = tmp_path / "p.json"
        cfg.write_text(json.dumps({"gate_start": 35e-9, "gate_stop": 45e-9, "taper": 0.5}))
        code, out, _ = run(
            capsys, "process", "--sweep", chamber / "sweep.csv", "--background", chamber / "background.csv",
            "--sphere", chamber / "sphere.csv", "--config", cfg,
        )
        assert code == 0 and out.startswith("azimuth_deg,rcs_m2")

    def test_config_unknown_key(self, capsys, chamber, tmp_path):
        cfg = tmp_path / "p.json"
        cfg.write_text(json.dumps({"gate_begin": 1.0}))
        code, _, err = run(
            capsys, "process", "--sweep", chamber / "sweep.csv", "--background", chamber / "background.csv",
            "--sphere", chamber / "sphere.csv", "--config", cfg,
        )
        assert code == 2 and "gate_begin" in err

    def test_corrupt_row(self, capsys, chamber, tmp_path):
        lines = (chamber / "sweep.csv").read_text().splitlines()
        lines[6] = lines[6].replace(",VV,", ",VV,oops").rsplit(",", 1)[0] + ",1.0"
        bad = tmp_path / "bad.csv"
        bad.write_text("\n".join(lines) + "\n")
        code, _, err = run(
            capsys, "process", "--sweep", bad, "--background", chamber / "background.csv",
            "--sphere", chamber / "sphere.csv", *GATE,
        )
        assert code == 2 and re.search(r"bad\.csv:7:", err)

    def test_missing_gate(self, capsys, chamber):
        code, _, err = run(
            capsys, "process", "--sweep", chamber / "sweep.csv", "--background", chamber / "background.csv",
            "--sphere", chamber / "sphere.csv",
        )
        assert code == 2 and "--gate-start" in err

    def test_empty_zone_is_numeric_failure(self, capsys, chamber):
        code, _, err = run(
            capsys, "process", "--sweep", chamber / "background.csv", "--background", chamber / "background.csv",
            "--sphere", chamber / "sphere.csv", *GATE,
        )
        assert code == 3 and "empty target zone" in err


class TestModels:
    def test_fit(self, capsys, classes):
        code, out, _ = run(capsys, "fit", "--input", classes["alpha"], "--family", "lognormal")
        assert code == 0
        d = json.loads(out)
        assert d["family"] == "Lognormal" and d["params"]["mu"] == pytest.approx(-3.0, abs=0.1)

    def test_fit_needs_family(self, capsys, classes):
        assert run(capsys, "fit", "--input", classes["alpha"])[0] == 2

    def test_fit_too_few_samples_is_numeric(self, capsys, tmp_path):
        p2 = tmp_path / "few.csv"
        write_text(str(p2), signature_csv(RcsSignature(np.arange(3.0), [1.0, 2.0, 3.0])))
        code, _, err = run(capsys, "fit", "--input", p2, "--family", "Gamma")
        assert code == 3 and "at least 8" in err

    def test_rank_lognormal_first(self, capsys, classes):
        code, out, _ = run(capsys, "rank", "--input", f"A={classes['alpha']}")
        assert code == 0
        rows = [line.split(",") for line in out.splitlines()]
        assert rows[0] == ["class", "family", "aic", "bic", "rank_aic", "rank_bic", "loglik", "k"]
        assert rows[1][1] == "Lognormal" and rows[1][4] == "1"

    def test_build_db_aic_bic_reproducible(self, capsys, classes, tmp_path):
        texts = {}
        for crit in ("aic", "bic", "aic"):
            out = tmp_path / f"db_{crit}.json"
            code, _, _ = run(capsys, "build-db", "--input", *classes.values(), "--criterion", crit, "--out", out)
            assert code == 0
            db = ModelDatabase.from_json(out.read_text())
            assert db.names == ("alpha", "beta") and db.criterion.value == crit.upper()
            texts.setdefault(crit, []).append(out.read_text())
        assert texts["aic"][0] == texts["aic"][1]


class TestClassifyAndSimulate:
    @pytest.fixture()
    def db_path(self, capsys, classes, tmp_path):
        out = tmp_path / "db.json"
        assert run(capsys, "build-db", "--input", *classes.values(), "--out", out)[0] == 0
        return out

    def test_classify(self, capsys, classes, db_path):
        code, out, _ = run(capsys, "classify", "--db", db_path, "--input", *classes.values())
        assert code == 0
        rows = [line.split(",") for line in out.splitlines()]
        assert rows[0] == ["input", "decision", "alpha", "beta"]
        assert [r[1] for r in rows[1:]] == ["alpha", "beta"]

    def test_full_sector_equals_no_flag(self, capsys, classes, db_path):
        a = run(capsys, "classify", "--db", db_path, "--input", *classes.values())[1]
        b = run(capsys, "classify", "--db", db_path, "--input", *classes.values(), "--sector", "0:360")[1]
        assert a == b

    def test_bad_schema(self, capsys, classes, tmp_path):
        p = tmp_path / "db.json"
        p.write_text(json.dumps({"schema": "x"}))
        code, _, err = run(capsys, "classify", "--db", p, "--input", classes["alpha"])
        assert code == 2 and "schema" in err

    def test_simulate_table(self, capsys, tmp_path):
        code, _, _ = run(
            capsys, "simulate", "--table", "HH:15", "--snr", "0:4:2", "--trials", 20, "--seed", 3, "--out-dir", tmp_path,
        )
        assert code == 0
        acc = (tmp_path / "accuracy.csv").read_text().splitlines()
        assert acc[0] == "snr_db,accuracy" and len(acc) == 4
        res = read_sweep_counts(str(tmp_path / "counts.csv"))
        assert [f"{float(s)!r},{float(a)!r}" for s, a in zip(res.snr_grid, res.accuracy)] == acc[1:]
        svg = (tmp_path / "accuracy.svg").read_text()
        assert svg.count("<!-- data ") == 3
        manifest = json.loads((tmp_path / "accuracy.csv.manifest.json").read_text())
        assert manifest["seed"] == 3

    def test_simulate_deterministic(self, capsys):
        argv = ("simulate", "--table", "VV:25", "--snr", "0,6", "--trials", 15, "--seed", 9)
        a = run(capsys, *argv)[1]
        b = run(capsys, *argv, "--workers", 3)[1]
        assert a == b

    def test_simulate_with_db_and_sector(self, capsys, db_path):
        code, out, _ = run(capsys, "simulate", "--db", db_path, "--snr", "10", "--trials", 10, "--sector", "0:120")
        assert code == 0 and out.splitlines()[1] == "10.0,1.0"

    def test_hold_out(self, capsys, tmp_path):
        code, _, _ = run(
            capsys, "simulate", "--table", "HH:15", "--snr", "14", "--trials", 30,
            "--hold-out", "DJI Matrice 600", "--out-dir", tmp_path,
        )
        assert code == 0
        lines = (tmp_path / "held_out.csv").read_text().splitlines()
        assert lines[0] == "snr_db,held_out_class,assigned_class,fraction" and len(lines) == 6

    def test_hold_out_unknown(self, capsys):
        code, _, err = run(capsys, "simulate", "--table", "HH:15", "--snr", "14", "--trials", 5, "--hold-out", "Zeppelin")
        assert code == 2 and "Zeppelin" in err

    @pytest.mark.parametrize(
        "extra",
        [[], ["--table", "HH:15", "--db", "x.json"], ["--table", "XX:99"], ["--table", "HH:15", "--snr", "a:b"]],
    )
    def test_simulate_usage(self, capsys, extra):
        assert run(capsys, "simulate", *extra)[0] == 2

    def test_version(self, capsys):
        code, out, _ = run(capsys, "--version")
        assert code == 0 and "0.1.0" in out
