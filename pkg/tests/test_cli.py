import csv
import io
import json
import subprocess
import sys

import pytest

from phasevol.cli import Grid, RunConfig, main, parse_grid, parse_symbol_spec, render, run
from phasevol.errors import SpecParseError
from phasevol.symbols import SymbolKind


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_symbol_spec():
    sym = parse_symbol_spec("weighted-inv:d=2,s=2,r=1,c=1")
    assert sym.kind is SymbolKind.WEIGHTED_SOBOLEV_INVERSE and (sym.d, sym.s, sym.r) == (2, 2.0, 1.0)
    for bad, token in [
        ("schrodinger-inv:s=2,c=1", "d"),
        ("schrodinger-inv:d=1.5,s=2,c=1", "d"),
        ("schrodinger-inv:d=1,s=x,c=1", "s"),
        ("schrodinger-inv:d=1,s=2,c=1,q=3", "q"),
        ("bogus:d=1", "bogus"),
    ]:
        with pytest.raises(SpecParseError) as info:
            parse_symbol_spec(bad)
        assert info.value.token == token


def test_parse_grid():
    assert parse_grid("1e-3:1e-1:3:log").values() == pytest.approx([1e-3, 1e-2, 1e-1])
    assert parse_grid("0:1:3:lin").values() == [0.0, 0.5, 1.0]
    assert parse_grid("0.25").values() == [0.25]
    assert Grid(0.5, 0.5, 1).values() == [0.5]


def test_volume_csv(capsys):
    code, out, _ = invoke(capsys, "volume", "--symbol", "schrodinger-inv:d=1,s=2,c=1", "--grid", "1e-3:1e-1:3")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[2]["value"]) == pytest.approx(4.5, rel=1e-15)
    assert list(rows[0]) == ["symbol", "lambda", "value", "error_estimate", "route"]


def test_json_output_and_ratio(capsys):
    code, out, _ = invoke(
        capsys, "entropy", "--symbol", "schrodinger-inv:d=1,s=2,c=1", "--grid", "1e-4", "--ratio", "--format", "json"
    )
    assert code == 0
    (rec,) = json.loads(out)
    assert rec["ratio"] == pytest.approx(1.0, abs=0.02)


def test_output_is_deterministic_across_threads(monkeypatch, capsys):
    argv = ["risk", "--symbol", "schrodinger-inv:d=1,s=2,c=1", "--grid", "1e-3:1e-1:5"]
    monkeypatch.setenv("PHASEVOL_THREADS", "1")
    _, serial, _ = invoke(capsys, *argv)
    monkeypatch.setenv("PHASEVOL_THREADS", "4")
    _, pooled, _ = invoke(capsys, *argv)
    assert serial == pooled


def test_spectral_route_and_spectrum(capsys):
    code, out, _ = invoke(capsys, "spectrum", "--symbol", "schrodinger-inv:d=2,s=2,c=1", "--floor", "0.1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["multiplicity"]) for r in rows] == list(range(1, len(rows) + 1))
    code, out, _ = invoke(
        capsys, "volume", "--symbol", "schrodinger-inv:d=1,s=2,c=1", "--grid", "1e-3", "--route", "spectral"
    )
    assert code == 0 and "500" in out


def test_validate_suites():
    for suite in ("weyl", "weyl-up", "fubini", "pinsker", "weighted", "power-law"):
        recs = run(RunConfig("validate", suite=suite))
        assert len(recs) == 3
        assert all(r["value"] > 0 and r["reference"] > 0 for r in recs)


def test_constants_table(capsys):
    code, out, _ = invoke(
        capsys, "constants", "--symbol", "weighted-inv:d=2,s=2,r=1,c=1", "--symbol", "weighted-inv:d=1,s=1,r=1,c=1"
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["constant"]) == pytest.approx(0.125)
    assert rows[1]["log_power"] == "1"


def test_argument_errors_exit_1(capsys):
    code, _, err = invoke(capsys, "volume", "--symbol", "schrodinger-inv:s=2,c=1", "--grid", "0.1")
    assert code == 1
    assert json.loads(err)["error"] == "SpecParseError"
    assert invoke(capsys, "volume", "--grid", "0.1")[0] == 1
    assert invoke(capsys, "frobnicate")[0] == 1
    assert invoke(capsys, "volume", "--symbol", "schrodinger-inv:d=1,s=2,c=1", "--grid", "1:0:3")[0] == 1
    assert invoke(capsys, "spectrum", "--symbol", "weighted-inv:d=1,s=2,r=1,c=1")[0] == 1


def test_out_file(tmp_path, capsys):
    path = tmp_path / "v.csv"
    code, out, _ = invoke(
        capsys, "volume", "--symbol", "schrodinger-inv:d=1,s=2,c=1", "--grid", "0.1", "--out", str(path)
    )
    assert code == 0 and out == ""
    assert path.read_text().startswith("symbol,lambda")


def test_render_empty_and_timing_column():
    assert render([], "json") == "[]\n"
    recs = run(RunConfig("volume", "schrodinger-inv:d=1,s=2,c=1", Grid(0.1, 0.1, 1), timing=True))
    assert "elapsed_ms" in recs[0]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "phasevol", "validate", "weyl-up"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("suite,")


def test_numerical_failure_exit_2(monkeypatch, capsys):
    import phasevol.cli as cli
    from phasevol.errors import ConvergenceError

    def boom(cfg):
        raise ConvergenceError("quadrature did not converge", partial=None)

    monkeypatch.setattr(cli, "run", boom)
    code, _, err = invoke(capsys, "volume", "--symbol", "schrodinger-inv:d=1,s=2,c=1", "--grid", "0.1")
    assert code == 2
    assert json.loads(err)["error"] == "ConvergenceError"
