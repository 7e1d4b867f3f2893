import json
import logging
from pathlib import Path

import numpy as np
import pytest

import hombell
from corpus import ROWS
from hombell import BellMeasurement, Binning, Circuit, Gate, HeraldScheme, HeraldSpec
from hombell.cli import main
from hombell.io import (CircuitFileError, circuit_to_dict, dumps_circuit, loads_circuit,
                        read_circuit, sweep_from_csv, sweep_to_csv, write_circuit)
from hombell.optimize import sweep_efficiency


@pytest.mark.parametrize("row", ROWS[:4], ids=lambda r: r.name)
def test_circuit_round_trip(row):
    c = row.circuit(0.7)
    back, meas = loads_circuit(dumps_circuit(c))
    assert back == c
    assert meas == BellMeasurement()


def test_mixed_herald_and_custom_binning_round_trip():
    spec = HeraldSpec((3, 4), (HeraldScheme.CLICK, HeraldScheme.SINGLE_PHOTON), (0.9, 0.5))
    c = Circuit(4, (Gate("S2", (1, 3), 0.2),), spec)
    meas = BellMeasurement(theta1=1.0, binning_a=Binning((-0.1, 0.2), (1, -1, 1)))
    back, m = loads_circuit(dumps_circuit(c, meas))
    assert back == c and m == meas


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(extra=1),
    lambda d: d["gates"][0].update(mode=[1]),
    lambda d: d["herald"].update(detector="pnr"),
    lambda d: d["measurement"].update(theta2=0.0),
    lambda d: d.update(format=99),
    lambda d: d["gates"][0].update(param="x"),
    lambda d: d["gates"][0].update(kind="Q"),
    lambda d: d.update(n_modes=True),
    lambda d: d["herald"].update(modes=[4]),
])
def test_malformed_documents_rejected(mutate):
    doc = circuit_to_dict(ROWS[0].circuit())
    mutate(doc)
    with pytest.raises(CircuitFileError):
        loads_circuit(json.dumps(doc))


def test_invalid_json_rejected():
    with pytest.raises(CircuitFileError):
        loads_circuit("{not json")


def test_sweep_csv_round_trip():
    sweep = sweep_efficiency(ROWS[0].circuit(), eta_grid=(0.5, 1.0))
    back = sweep_from_csv(sweep_to_csv(sweep))
    assert back.variable == "eta"
    assert np.array_equal(back.column("chsh"), sweep.column("chsh"))
    assert np.array_equal(back.column("herald_probability"), sweep.column("herald_probability"))


@pytest.fixture
def circuit_file(tmp_path):
    path = tmp_path / "c.json"
    write_circuit(path, ROWS[0].circuit())
    return path


def test_cli_eval(circuit_file, tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["eval", str(circuit_file), "--seed", "4", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["seed"] == 4 and report["format"] == 1
    assert report["chsh"] == pytest.approx(2.068, abs=2e-3)
    assert json.loads(capsys.readouterr().out) == report


def test_cli_exit_codes(tmp_path, circuit_file):
    assert main(["eval", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": 1, "n_modes": 2, "gates": [], "oops": 0}')
    assert main(["eval", str(bad)]) == 2
    dark = tmp_path / "dark.json"
    write_circuit(dark, Circuit.build(3, [Gate("S2", (1, 2), 0.3)]))
    assert main(["eval", str(dark)]) == 3
    assert main(["optimize", str(dark)]) == 3
    assert main(["optimize", str(circuit_file), "--herald-floor", "2.9"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["search", "--strategy", "7"])
    assert exc.value.code == 2


def test_cli_optimize_writes_circuit(circuit_file, tmp_path):
    target = tmp_path / "opt.json"
    assert main(["optimize", str(circuit_file), "--write", str(target)]) == 0
    c, _ = read_circuit(target)
    assert c.structure() == ROWS[0].circuit().structure()


def test_cli_search_and_train(tmp_path, capsys):
    out = tmp_path / "search.json"
    assert main(["search", "--episodes", "3", "--seed", "2", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["seed"] == 2 and len(report["results"]) == 3
    capsys.readouterr()
    trace = tmp_path / "trace.csv"
    ckpt = tmp_path / "agent.npz"
    assert main(["train", "--episodes", "3", "--update-frequency", "3", "--capacity", "6",
                 "--trace", str(trace), "--checkpoint", str(ckpt)]) == 0
    assert len(trace.read_text().splitlines()) == 4
    assert main(["train", "--episodes", "2", "--resume", str(ckpt)]) == 0


def test_cli_sweeps(circuit_file, capsys):
    assert main(["sweep", str(circuit_file), "--kind", "efficiency", "--etas", "0.5", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "eta,chsh,herald_probability" and len(lines) == 3
    assert main(["sweep", str(circuit_file), "--kind", "distance", "--km-max", "1",
                 "--km-step", "1", "--fixed"]) == 0
    assert capsys.readouterr().out.splitlines()[0].startswith("distance_km")


DATA = Path(hombell.__file__).parent / "data"


@pytest.mark.parametrize("name", ["fig1.json", "table3_s1_row1.json"])
def test_bundled_circuits_score(name, capsys):
    assert main(["eval", str(DATA / name)]) == 0
    assert json.loads(capsys.readouterr().out)["chsh"] == pytest.approx(2.068, abs=2e-3)


def test_empty_circuit_scores_zero(tmp_path, capsys):
    path = tmp_path / "empty.json"
    write_circuit(path, Circuit(2, ()))
    assert main(["eval", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["chsh"] == pytest.approx(0.0, abs=1e-12)


def test_optimize_restores_perturbed_circuit(tmp_path, capsys):
    c, meas = read_circuit(DATA / "fig1.json")
    path = tmp_path / "perturbed.json"
    write_circuit(path, c.with_params(c.params * np.array([1.05, 0.95, 1.05, 0.95])), meas)
    assert main(["optimize", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["chsh"] >= 2.067


def test_optimize_with_herald_floor(tmp_path, capsys):
    path = tmp_path / "fig1.json"
    path.write_text((DATA / "fig1.json").read_text())
    assert main(["optimize", str(path), "--herald-floor", "2.068"]) == 0
    assert json.loads(capsys.readouterr().out)["herald_probability"] >= 2e-6


def test_flat_circuit_unchanged_with_warning(tmp_path, caplog):
    path = tmp_path / "flat.json"
    flat = Circuit(2, (Gate("R", (1,), 0.3), Gate("R", (2,), 0.5)))
    write_circuit(path, flat)
    with caplog.at_level(logging.WARNING):
        assert main(["optimize", str(path)]) == 0
    assert "flat" in caplog.text
    assert read_circuit(path.with_suffix(".optimized.json"))[0] == flat


def test_search_single_episode(tmp_path):
    out = tmp_path / "one.json"
    assert main(["search", "--episodes", "1", "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["results"]) == 1
