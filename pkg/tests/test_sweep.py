import json
import math

import numpy as np
import pytest

from spinscatter import models
from spinscatter.cli import main
from spinscatter.exceptions import ModelRejectedError
from spinscatter.sweep import (
    GridSpec,
    SweepConfig,
    Table,
    emit,
    golden_section_max,
    peak_scan,
    read_table,
    refine_peak,
    resolve_model,
    run_sweep,
    s_trend_non_increasing,
)

KONDO = {"family": "kondo", "s": 0.5, "J": -0.5}


def small_config(**kw):
    base = dict(model=KONDO, grid={"min": 1e-7, "max": 1e-1, "count": 40})
    base.update(kw)
    return SweepConfig(**base)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(min=0.0)
    with pytest.raises(ValueError):
        GridSpec(count=1)
    with pytest.raises(ValueError):
        GridSpec(scale="cubic")
    g = GridSpec(scale="linear", min=1.0, max=2.0, count=3, relative=False)
    np.testing.assert_allclose(g.energies(100.0), [1.0, 1.5, 2.0])
    np.testing.assert_allclose(GridSpec(min=1e-3, max=1e-1, count=3).energies(10.0), [1e-2, 1e-1, 1.0])


def test_config_validation():
    with pytest.raises(ValueError):
        small_config(outputs=["T_i", "entropy"])
    with pytest.raises(ValueError):
        SweepConfig.from_dict({"model": KONDO, "colour": "red"})
    with pytest.raises(ValueError):
        SweepConfig.from_dict({"model": KONDO, "schema_version": 99})
    with pytest.raises(ValueError):
        small_config(N=0)


def test_resolve_model_families():
    assert resolve_model("MnPc", 2, 100.0).d == 3
    assert resolve_model({"family": "molecular", "s": 1, "delta_E": 0.1}, 2, 100.0).lead.eps0_diag[1] == pytest.approx(0.1)
    assert resolve_model({"family": "kondo", "s": 1, "J": -0.5, "contact": "combined"}, 2, 100.0).d == 3
    assert resolve_model({"family": "zeeman", "J": -0.5, "Delta": 1e-3}, 1, 1.0).d == 4
    assert resolve_model({"family": "impurity", "J": -0.5}, 1, 1.0).d == 4
    ap = {"t_h": 1.0, "U1": 0.0, "U2": 100.0, "eps": 30.6}
    assert resolve_model({"family": "anderson", **ap}, 1, 1.0).d == 4
    assert resolve_model({"family": "schrieffer_wolff", **ap}, 1, 1.0).d == 2
    with pytest.raises(ValueError):
        resolve_model({"family": "kondo", "s": 0.5, "bogus": 1}, 2, 100.0)
    with pytest.raises(ValueError):
        resolve_model({"family": "ising"}, 2, 100.0)
    with pytest.raises(ModelRejectedError):
        resolve_model({"family": "molecular", "s": 1, "D1": 0.1, "D2": 0.2}, 2, 100.0)


def test_columns_and_flags():
    cfg = small_config(outputs=["T_i", "T_plus", "T_minus", "p2_bar", "R_i", "T_minus", "phi_plus", "p2", "flux"])
    table = run_sweep(cfg).table
    for name in ("K_i", "T_i", "T_plus", "T_minus", "p2_bar", "open_i", "open_plus", "phi_plus", "flux"):
        assert name in table.columns
    assert len(table) == 40
    assert all(table.column("open_i"))
    np.testing.assert_allclose(table.column("flux"), 1.0, atol=1e-10)
    p2_cols = [c for c in table.columns if c.startswith("p2@")]
    assert len(p2_cols) == 5
    np.testing.assert_allclose(table.column(p2_cols[0]), table.column("T_i"))
    np.testing.assert_allclose(table.column(p2_cols[-1]), table.column("T_plus"))


def test_zero_coupling_sweep():
    table = run_sweep(small_config(model={"family": "kondo", "s": 0.5, "J": 0.0})).table
    np.testing.assert_allclose(table.column("T_i"), 1.0, atol=1e-12)


def test_closed_partner_rows_report_zero():
    cfg = small_config(model={"family": "zeeman", "J": -0.5, "Delta": 1e-3}, t=1.0, N=1,
                       grid={"min": 1e-4, "max": 1e-2, "count": 40}, outputs=["T_plus", "p2_bar", "p2"])
    table = run_sweep(cfg).table
    closed = ~table.column("open_plus").astype(bool)
    K = table.column("K_i")
    np.testing.assert_array_equal(closed, K < 1e-3)
    assert np.all(table.column("T_plus")[closed] == 0)
    assert np.all(table.column("p2_bar")[closed] == 0)


def test_closed_incoming_rows_are_flagged():
    cfg = small_config(grid={"scale": "linear", "min": 3.0, "max": 5.0, "count": 5})
    table = run_sweep(cfg).table
    assert list(table.column("open_i")) == [True, True, False, False, False]
    assert np.all(table.column("T_i")[2:] == 0)


def test_peak_refinement():
    cfg = small_config(grid={"min": 1e-7, "max": 1e-1, "count": 400}, refine_peaks=True)
    result = run_sweep(cfg)
    peaks = {p.quantity: p for p in result.peaks}
    grid_max = result.table.column("T_plus").max()
    tplus = peaks["T_plus"]
    assert tplus.value >= grid_max
    assert abs(tplus.value - grid_max) <= 0.005
    assert not tplus.at_boundary
    assert tplus.tolerance <= 1e-6
    assert peaks["T_minus"].at_boundary


def test_golden_section_on_quadratic():
    x, fx, width = golden_section_max(lambda x: -(math.log(x) - math.log(3.0)) ** 2, 1.0, 10.0, rtol=1e-6)
    assert x == pytest.approx(3.0, rel=1e-6)
    assert width <= 1e-6
    with pytest.raises(ValueError):
        golden_section_max(lambda x: x, 0.0, 1.0)


def test_monotone_bracket_flags_boundary():
    model = resolve_model(KONDO, 2, 100.0)
    rec = refine_peak("T_i", model, (1.0, 10.0))
    assert rec.at_boundary
    assert rec.K_i == pytest.approx(10.0, rel=1e-5)


def test_refinement_bracket_respects_threshold():
    model = resolve_model({"family": "zeeman", "J": -0.5, "Delta": 1e-3}, 1, 1.0)
    rec = refine_peak("T_plus", model, (1e-5, 2e-3))
    assert rec.K_i > 1e-3
    with pytest.raises(ValueError):
        refine_peak("T_plus", model, (1e-5, 5e-4))


def test_emit_csv_layout_and_round_trip(tmp_path):
    table = Table(["K_i", "T_i", "open_i", "label"], [
        [0.1, 1 / 3, True, "a"],
        [0.2, np.nextafter(0.5, 1), False, "b"],
        [0.3, 1e-300, True, "c"],
    ])
    path = emit(table, tmp_path / "out.csv", "csv", {"hello": 1})
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert len(lines) == 4 and lines[0] == "K_i,T_i,open_i,label"
    back = read_table(path)
    assert back.columns == table.columns
    assert back.rows == table.rows
    echo = json.loads((tmp_path / "out.csv.config.json").read_text())
    assert echo["schema_version"] == 1 and echo["config"] == {"hello": 1}


def test_emit_json_round_trip(tmp_path):
    table = run_sweep(small_config()).table
    path = emit(table, tmp_path / "out.json", "json")
    records = json.loads(path.read_text())
    assert len(records) == len(table)
    assert all(list(r) == table.columns for r in records)
    assert read_table(path).rows == [[float(v) if isinstance(v, float) else v for v in r] for r in table.rows]


def test_emit_rejects_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        emit(Table(["a"], [[1.0]]), tmp_path / "x", "xml")


def test_sweep_is_deterministic(tmp_path):
    cfg = small_config()
    a = emit(run_sweep(cfg).table, tmp_path / "a.csv")
    b = emit(run_sweep(cfg).table, tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_parallel_equals_serial(monkeypatch):
    cfg = small_config(model="MnPc", grid={"min": 1e-4, "max": 1e-1, "count": 64})
    serial = run_sweep(cfg, threads=1).table
    parallel = run_sweep(cfg, threads=8).table
    assert serial.rows == parallel.rows
    monkeypatch.setenv("SPINSCATTER_THREADS", "4")
    assert run_sweep(cfg).table.rows == serial.rows


def test_peak_scan_trend_and_presets():
    grid = {"min": 1e-7, "max": 1e-1, "count": 120}
    entries = [{"s": s, "delta_E": 0.0} for s in (0.5, 1, 1.5, 4, 4.5, 6)] + ["Mn3_dimer"]
    table = peak_scan(entries, grid=grid, refine=False)
    assert len(table) == 7
    assert s_trend_non_increasing(table)
    recs = table.records()
    assert recs[0]["max_p2_bar"] == pytest.approx(0.30, abs=0.01)
    mn3 = recs[-1]
    assert mn3["label"] == "Mn3_dimer"
    assert mn3["max_T_plus"] < recs[0]["max_T_plus"] and mn3["max_p2_bar"] < recs[0]["max_p2_bar"]


def test_peak_scan_splitting_list():
    table = peak_scan([{"s": 1, "delta_E": [-0.1, 0.0, 0.1]}], grid={"count": 20}, refine=False)
    np.testing.assert_allclose(table.column("delta_E"), [-0.1, 0.0, 0.1], atol=1e-14)
    np.testing.assert_allclose(table.column("J12x"), 1.0)


def test_empty_scan():
    assert len(peak_scan([], refine=False)) == 0


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def test_cli_run(tmp_path, capsys):
    cfg = write_config(tmp_path, {"schema_version": 1, "model": KONDO, "grid": {"count": 30},
                                  "refine_peaks": True})
    out = tmp_path / "bell.csv"
    assert main(["run", str(cfg), "--out", str(out), "--threads", "2"]) == 0
    table = read_table(out)
    assert len(table) == 30
    assert {"K_i", "T_i", "T_plus", "T_minus", "p2_bar"} <= set(table.columns)
    assert (tmp_path / "bell.csv.config.json").exists()
    assert "peak T_plus" in capsys.readouterr().out


def test_cli_run_json_format(tmp_path):
    cfg = write_config(tmp_path, {"model": "MnPc", "grid": {"count": 5}, "output": str(tmp_path / "m.json")})
    assert main(["run", str(cfg), "--format", "json"]) == 0
    assert len(json.loads((tmp_path / "m.json").read_text())) == 5


def test_cli_scan(tmp_path, capsys):
    cfg = write_config(tmp_path, {"entries": [{"s": 0.5}, {"s": 1}, "MnPc"], "grid": {"count": 30},
                                  "refine_peaks": False})
    out = tmp_path / "scan.csv"
    assert main(["scan", str(cfg), "--out", str(out)]) == 0
    assert len(read_table(out)) == 3
    assert "non-increasing" in capsys.readouterr().out


def test_cli_presets(capsys):
    assert main(["presets"]) == 0
    text = capsys.readouterr().out
    for name in models.PRESETS:
        assert name in text


def test_cli_reports_bad_config(tmp_path, capsys):
    cfg = write_config(tmp_path, {"model": KONDO, "grid": {"min": -1}})
    assert main(["run", str(cfg)]) == 2
    assert "error" in capsys.readouterr().err
