import json
import math

import pytest

from uavmec import Decision, ScenarioError, ValidationError, bcd_solve, check_constraints
from uavmec.harness.cli import main
from uavmec.harness.scenario import default_scenario, load_scenario, parse_scenario, parse_text
from uavmec.harness.sweep import (COLUMNS, SweepSpec, apply_param, read_csv, rows_to_text, run_benchmarks, run_metadata,
                                  run_sweep, write_csv)


@pytest.fixture
def scen():
    return default_scenario()


def write(tmp_path, text, name="s.scenario"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestScenario:
    def test_defaults(self, scen, cfg, ues):
        assert scen.cfg == cfg and scen.ues == ues

    def test_empty_file_is_default(self, tmp_path, cfg):
        c, u = parse_scenario(write(tmp_path, "# nothing\n"))
        assert c == cfg

    def test_units(self, tmp_path):
        text = """
[system]
B = 500 kHz      ; inline comment
T_max = 1200 us
N0 = 1e-20 W/Hz
beta0 = -50 dB
D = 0.2 km
[ues]
L = 1.5 kbit
P_max = 20 dBm
[ue2]
L = 900 bits
f_max = 2 GHz
"""
        c, (u1, u2) = parse_scenario(write(tmp_path, text))
        assert c.B == 5e5 and c.T_max == pytest.approx(1.2e-3) and c.N0 == 1e-20 and c.D == 200.0
        assert c.beta0 == pytest.approx(1e-5)
        assert u1.L == 1500 and u2.L == 900 and u2.f_max == 2e9
        assert u1.P_max == pytest.approx(0.1) and u2.P_max == pytest.approx(0.1)

    def test_psd_dbm(self):
        v = parse_text("[system]\nN0 = -169 dBm/Hz\n")["system"]["N0"]
        assert v == pytest.approx(10 ** (-16.9) * 1e-3)

    @pytest.mark.parametrize("text, line, fragment", [
        ("[system]\nB = 3 parsecs\n", 2, "unit"),
        ("[system]\n\nfoo = 1\n", 3, "unknown key"),
        ("[radio]\n", 1, "unknown section"),
        ("[system]\nB = 1\nB = 2\n", 3, "duplicate"),
        ("[system]\nB = three\n", 2, "not a number"),
        ("B = 3\n", 1, "outside"),
        ("[system]\nB 3\n", 2, "expected"),
    ])
    def test_errors_carry_line(self, text, line, fragment):
        with pytest.raises(ScenarioError) as exc:
            parse_text(text)
        assert exc.value.line == line and fragment in str(exc.value)

    def test_validation(self, tmp_path):
        with pytest.raises(ValidationError, match="eps"):
            load_scenario(write(tmp_path, "[ue1]\neps = 0.7\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError, match="cannot read"):
            load_scenario(tmp_path / "absent.scenario")

    def test_as_dict(self, scen):
        d = scen.as_dict()
        assert set(d) == {"system", "ue1", "ue2"} and d["system"]["B"] == 3e6


class TestSweepSpec:
    def test_linear(self):
        assert SweepSpec("L", 600, 2400, 4).values() == [600.0, 1200.0, 1800.0, 2400.0]

    def test_eps_log_by_default(self):
        v = SweepSpec("eps", 1e-7, 1e-1, 7).values()
        assert v == pytest.approx([10.0**k for k in range(-7, 0)])

    def test_single(self):
        assert SweepSpec("B", 2e6, 9e9).values() == [2e6]

    @pytest.mark.parametrize("kw", [dict(param="kappa", start=1, stop=2), dict(param="L", start=1, stop=2, steps=0),
                                    dict(param="eps", start=0, stop=1e-2, steps=3)])
    def test_invalid(self, kw):
        with pytest.raises(ValidationError):
            SweepSpec(**kw)

    def test_apply_param(self, scen):
        cfg, ues = apply_param(scen, "L2", 900)
        assert ues[0].L == 1200 and ues[1].L == 900
        cfg, _ = apply_param(scen, "T_max", 1.2e-3)
        assert cfg.T_max == 1.2e-3


class TestSweeps:
    def test_single_step_equals_solver(self, scen):
        rows = run_sweep(scen, SweepSpec("B", 3e6, 3e6), ["noma"], ["fin"])
        res = bcd_solve("noma", "fin", scen.cfg, scen.ues)
        (row,) = rows
        assert row.status == "ok" and row.feasible and row.total == res.total
        assert (row.rho1, row.rho2, row.t, row.d) == (res.decision.rho1, res.decision.rho2, res.decision.t, res.decision.d)
        assert row.total == pytest.approx(row.e_loc1 + row.e_loc2 + row.e_rem1 + row.e_rem2 + row.e_off1 + row.e_off2)

    def test_rows_recheck(self, scen):
        rows = run_sweep(scen, SweepSpec("L", 600, 1800, 3), ["fdma", "tdma"], ["inf", "fin"])
        assert len(rows) == 12
        assert [r.value for r in rows[:4]] == [600.0] * 4
        for r in rows:
            assert r.feasible
            assert check_constraints(r.scheme, r.regime, Decision(r.rho1, r.rho2, r.t, r.d), *apply_param(scen, "L", r.value)).feasible

    def test_fixed_sweep(self, scen):
        fixed = Decision(0.5, 0.5, 3e-4, 25.0)
        rows = run_sweep(scen, SweepSpec("rho2", 0.3, 0.7, 5), ["noma"], ["fin"], "success-only", fixed=fixed)
        assert [r.rho2 for r in rows] == pytest.approx([0.3, 0.4, 0.5, 0.6, 0.7])
        assert all(r.t == 3e-4 and r.d == 25.0 and r.benchmark == "fixed" for r in rows)

    def test_errors_recorded_per_cell(self, scen):
        rows = run_sweep(scen, SweepSpec("L", 1200, 3000, 2), ["noma"], ["fin"])
        assert rows[0].status == "ok"
        assert rows[1].status.startswith("infeasible") and math.isnan(rows[1].total)

    def test_nonincreasing_in_time_budget(self, scen):
        rows = run_sweep(scen, SweepSpec("T_max", 0.8e-3, 1.4e-3, 4), ["tdma"], ["fin"])
        e = [r.total for r in rows]
        assert all(b <= a * 1.01 for a, b in zip(e, e[1:]))

    def test_parallel_same_order(self, scen):
        spec = SweepSpec("L", 600, 1200, 2)
        serial = run_sweep(scen, spec, ["fdma"], ["inf", "fin"])
        parallel = run_sweep(scen, spec, ["fdma"], ["inf", "fin"], jobs=2)
        assert rows_to_text(serial) == rows_to_text(parallel)

    def test_benchmarks(self, scen):
        rows = run_benchmarks(scen, ["fdma"], ["inf"], grid=None)
        by = {r.benchmark: r for r in rows}
        assert set(by) == {"full", "fixed-rho", "fixed-t", "exhaustive"}
        assert by["fixed-rho"].rho1 == 0.5 and by["fixed-t"].t == 0.5 * scen.cfg.T_max
        assert by["full"].total <= min(by["fixed-rho"].total, by["fixed-t"].total) * 1.01

    def test_benchmarks_need_optimizing_param(self, scen):
        with pytest.raises(ValidationError):
            run_benchmarks(scen, sweep=SweepSpec("d", 10, 50, 2))


class TestCsv:
    def test_round_trip(self, scen, tmp_path):
        rows = run_sweep(scen, SweepSpec("L", 1200, 3000, 2), ["noma"], ["fin"])
        path = write_csv(rows, tmp_path / "out.csv")
        back = read_csv(path)
        assert rows_to_text(back) == rows_to_text(rows)
        assert back[0].total == rows[0].total
        assert path.read_text().splitlines()[0].split(",") == list(COLUMNS)

    def test_rerun_byte_identical(self, scen, tmp_path):
        spec = SweepSpec("B", 2e6, 4e6, 2)
        paths = []
        for k in range(2):
            rows = run_sweep(scen, spec, ["tdma"], ["fin"])
            meta = run_metadata(scen, command="sweep", eval_mode="strict", sweep=spec, schemes=["tdma"], regimes=["fin"])
            paths.append(write_csv(rows, tmp_path / f"r{k}" / "sweep.csv", meta))
        assert paths[0].read_bytes() == paths[1].read_bytes()
        side = [p.with_name("sweep.meta.json").read_bytes() for p in paths]
        assert side[0] == side[1]
        meta = json.loads(side[0])
        assert meta["sweep"]["values"] == [2e6, 4e6] and meta["columns"] == list(COLUMNS)
        assert meta["tolerances"]["sigma_conv"] == 1e-3


class TestCli:
    def test_run(self, capsys):
        assert main(["run"]) == 0
        out, err = capsys.readouterr()
        assert "noma-fin" in err and out.splitlines()[0].split(",") == list(COLUMNS)

    def test_exit_codes(self, tmp_path, capsys):
        assert main(["run", "--config", str(write(tmp_path, "[ues]\nL = 3 kbit\n"))]) == 3
        assert main(["run", "--config", str(write(tmp_path, "[system]\nB = 3 parsec\n", "b.scenario"))]) == 2
        assert main(["run", "--config", str(tmp_path / "missing")]) == 2
        err = capsys.readouterr().err
        assert "binding" in err and "line 2" in err

    def test_argparse_rejects(self):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--scheme", "ofdma"])
        assert exc.value.code == 2

    def test_outdir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("UAVMEC_OUTDIR", str(tmp_path))
        assert main(["sweep", "--param", "L", "--from", "600", "--to", "1200", "--steps", "2",
                     "--scheme", "tdma", "--regime", "inf", "--out", "elsewhere/x.csv"]) == 0
        rows = read_csv(tmp_path / "x.csv")
        assert [r.value for r in rows] == [600.0, 1200.0]
        meta = json.loads((tmp_path / "x.meta.json").read_text())
        assert meta["command"] == "sweep" and meta["schemes"] == ["tdma"]

    def test_oracle_and_compare(self, tmp_path):
        assert main(["oracle", "--scheme", "fdma", "--regime", "inf", "--rho-step", "0.1", "--t-step", "5e-5",
                     "--out", str(tmp_path / "o.csv")]) == 0
        (row,) = read_csv(tmp_path / "o.csv")
        assert row.benchmark == "exhaustive" and row.feasible
        assert main(["compare", "--scheme", "fdma", "--scheme", "tdma", "--regime", "inf",
                     "--out", str(tmp_path / "c.csv")]) == 0
        assert len(read_csv(tmp_path / "c.csv")) == 2
        meta = json.loads((tmp_path / "c.meta.json").read_text())
        assert meta["flags"] == {"tdma_le_fdma[inf]": True}
