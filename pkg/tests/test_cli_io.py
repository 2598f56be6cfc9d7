"""Config parsing, artifact file formats and the command-line surface."""

import math

import numpy as np
import pytest

from stagmhd import driver
from stagmhd.cases import init_case
from stagmhd.cli_io import (
    ConfigError,
    RunConfig,
    emit_config,
    main,
    parse_config,
    read_convergence,
    read_diag,
    read_snapshot,
    run_convergence,
    write_convergence,
    write_diag,
    write_snapshot,
)
from stagmhd.fields import EigenSet


# -- config ----------------------------------------------------------------------


def test_parse_basic_config():
    cfg = parse_config("case=rp1\ncfl=0.9\ntheta_b=0.55\n")
    assert cfg.case == "rp1"
    assert cfg.params == {"cfl": 0.9, "theta_b": 0.55}


def test_parse_full_config():
    text = """
    # a comment
    [run]
    case = orszag_tang
    n = 16,16,1
    t_end = 0.5
    output_times = 0.25 0.5
    eigen_set = vb
    second_order = false
    outdir = out
    """
    cfg = parse_config(text)
    assert cfg.case == "orszag_tang"
    assert cfg.n == (16, 16, 1)
    assert cfg.t_end == 0.5
    assert cfg.output_times == (0.25, 0.5)
    assert cfg.params["eigen_set"] is EigenSet.VB
    assert cfg.params["second_order"] is False
    assert cfg.outdir == "out"


def test_parse_empty_missing_case():
    with pytest.raises(ConfigError, match="case"):
        parse_config("")


def test_parse_cfl_out_of_range():
    with pytest.raises(ConfigError):
        parse_config("case=rp1\ncfl=2.0\n")


def test_parse_unknown_key():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("case=rp1\ncourant=0.5\n")


def test_parse_bad_value_reports_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("case=rp1\ncfl=fast\n")


def test_parse_unknown_case_lists_catalog():
    with pytest.raises(ConfigError, match="rotor"):
        parse_config("case=mystery\n")


def test_config_round_trip():
    cfg = RunConfig(case="rotor", n=(8, 8, 1), t_end=0.25,
                    output_times=(0.1, 0.25), outdir="somewhere",
                    params={"cfl": 0.5, "eigen_set": EigenSet.FULL,
                            "second_order": True, "picard_r": 3})
    cfg2 = parse_config(emit_config(cfg))
    assert cfg2 == cfg


# -- snapshots -------------------------------------------------------------------


def small_run(name="rp1", n=(32, 1, 1), t_end=0.01, **over):
    state, spec = init_case(name, n=n, **over)
    result = driver.run(state, spec.params, t_end)
    return result, spec


def test_snapshot_round_trip(tmp_path):
    result, spec = small_run()
    path = write_snapshot(result.state, tmp_path / "snap.vtk", case="rp1")
    out = read_snapshot(path)
    st = result.state
    assert out["case"] == "rp1"
    assert out["t"] == st.t
    assert out["dims"] == (32, 1, 1)
    assert np.array_equal(out["rho"], st.rho)
    assert np.array_equal(out["p"], st.p)
    g = st.grid
    vx = g.avg_down(st.v_f.comps[0], 0)
    assert np.array_equal(out["v"][0], vx)
    from stagmhd.fields import magnetic_field_cell
    B = magnetic_field_cell(g, st.B_e)
    assert np.array_equal(out["B"], B)
    from stagmhd.ops import div_e2n
    div = div_e2n(g, st.B_e)
    assert out["divB"].shape == div.shape
    assert np.array_equal(out["divB"], div)


def test_snapshot_uniform_state(tmp_path):
    from stagmhd.cases import stability_equilibrium
    state, _ = stability_equilibrium(n=(8, 8, 1))
    out = read_snapshot(write_snapshot(state, tmp_path / "u.vtk"))
    assert np.all(out["rho"] == out["rho"].flat[0])
    assert np.all(out["p"] == out["p"].flat[0])
    assert np.all(out["divB"] == 0.0)


def test_snapshot_io_error():
    state, _ = init_case("rp1", n=(8, 1, 1))
    with pytest.raises(OSError, match="no/such/dir"):
        write_snapshot(state, "no/such/dir/snap.vtk")


# -- diagnostics -----------------------------------------------------------------


def test_diag_round_trip(tmp_path):
    result, _ = small_run(t_end=0.003)
    path = write_diag(result.records, tmp_path / "d.csv")
    rows = read_diag(path)
    assert len(rows) == len(result.records)
    header = path.read_text().splitlines()[0]
    assert header == ("step,t,dt,dt_ratio,mass,momx,momy,momz,energy,"
                      "mag_energy,divB_L1,divB_L2,divB_Linf,cg_iters_b,cg_iters_p")
    for row, rec in zip(rows, result.records):
        assert row["step"] == rec.step
        assert row["t"] == rec.t          # full 17-digit precision
        assert row["mass"] == rec.mass
        assert row["cg_iters_b"] == rec.cg_iters_b


def test_diag_three_step_run(tmp_path):
    state, spec = init_case("rp1", n=(16, 1, 1))
    result = driver.run(state, spec.params.with_(dt_fixed=1e-4), 3e-4)
    path = write_diag(result.records, tmp_path / "d.csv")
    text = path.read_text().strip().splitlines()
    assert len(text) == 1 + 3


def test_diag_mass_conservation(tmp_path):
    result, _ = small_run(n=(64, 1, 1), t_end=0.02)
    rows = read_diag(write_diag(result.records, tmp_path / "d.csv"))
    m0 = rows[0]["mass"]
    assert all(abs(r["mass"] - m0) <= 1e-12 * abs(m0) for r in rows)


# -- convergence tables ----------------------------------------------------------


def test_convergence_table_round_trip(tmp_path):
    rows = run_convergence("alfven_wave", levels=2, variables=("Bx",), t_end=0.05)
    path = write_convergence(rows, tmp_path / "c.csv")
    back = read_convergence(path)
    assert len(back) == len(rows) == 2
    for a, b in zip(back, rows):
        assert a["level"] == b["level"] and a["var"] == b["var"]
        assert a["errL2"] == b["errL2"]
        assert (math.isnan(a["ordL2"]) and math.isnan(b["ordL2"])) or a["ordL2"] == b["ordL2"]
    assert math.isnan(back[0]["ordL2"])
    assert not math.isnan(back[1]["ordL2"])


def test_convergence_requires_reference():
    from stagmhd.cases import UnknownCaseError
    with pytest.raises(UnknownCaseError):
        run_convergence("orszag_tang", levels=2)


# -- command line ----------------------------------------------------------------


def test_cli_list_cases(capsys):
    assert main(["list-cases"]) == 0
    out = capsys.readouterr().out.split()
    assert len(out) == 14
    assert "orszag_tang_vr_3d" in out


def test_cli_run(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("SOLVER_OUT", raising=False)
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(
        f"case = rp1\nn = 16,1,1\nt_end = 0.01\noutput_times = 0.01\n"
        f"outdir = {tmp_path / 'out'}\n")
    assert main(["run", str(cfgfile)]) == 0
    outdir = tmp_path / "out"
    snaps = sorted(outdir.glob("rp1_t*.vtk"))
    assert len(snaps) == 2  # t=0 and t=0.01
    diag = outdir / "rp1_diag.csv"
    assert diag.exists()
    out = read_snapshot(snaps[-1])
    assert out["t"] == pytest.approx(0.01)
    assert len(read_diag(diag)) >= 1


def test_cli_run_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("SOLVER_OUT", str(tmp_path / "env_out"))
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("case = rp1\nn = 8,1,1\nt_end = 0.005\noutdir = ignored\n")
    assert main(["run", str(cfgfile)]) == 0
    assert (tmp_path / "env_out" / "rp1_diag.csv").exists()
    assert not (tmp_path / "ignored").exists()


def test_cli_run_bad_config(tmp_path, capsys):
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text("case = rp1\ncfl = 2.0\n")
    assert main(["run", str(cfgfile)]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_convergence(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOLVER_OUT", str(tmp_path))
    # tiny ladder on the smallest reference case; just the plumbing
    state = main(["convergence", "alfven_wave", "--levels", "1", "--order-var", "Bx"])
    assert state == 0
    rows = read_convergence(tmp_path / "alfven_wave_convergence.csv")
    assert [r["var"] for r in rows] == ["Bx"]
    assert "Bx" in capsys.readouterr().out


def test_cli_convergence_unknown_var(capsys):
    assert main(["convergence", "alfven_wave", "--levels", "1",
                 "--order-var", "entropy"]) == 1
    assert "unknown variable" in capsys.readouterr().err


def test_cli_stability(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOLVER_OUT", str(tmp_path))
    cfgfile = tmp_path / "stab.cfg"
    cfgfile.write_text("n = 4,4,1\ntheta_b = 1.0\ntheta_p = 1.0\n")
    assert main(["stability", str(cfgfile)]) == 0
    report = (tmp_path / "stability_report.txt").read_text()
    assert "spectral_radius" in report
    vals = dict(line.split(" = ") for line in report.strip().splitlines())
    assert float(vals["spectral_radius"]) <= 1.0 + 1e-6
    assert vals["warn_not_equilibrium"] == "False"


def test_cli_stability_dump(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SOLVER_OUT", str(tmp_path))
    cfgfile = tmp_path / "stab.cfg"
    cfgfile.write_text("n = 3,3,1\n")
    assert main(["stability", str(cfgfile), "--dump"]) == 0
    dump = tmp_path / "jacobian.txt"
    assert dump.exists()
    with open(dump) as f:
        n = int(f.readline())
    J = np.loadtxt(dump, skiprows=1)
    assert n == 8 * 3 * 3  # rho + 3 mom + rhoE + 3 B per cell, periodic 3x3x1
    assert J.shape == (n, n)
