"""Scenario files and the command-line front end, including exit codes."""

import csv
import io
import json
import math
import re
from pathlib import Path

import numpy as np
import pytest

from conftest import POINTER, SPIN, unit_factor
from eventweave import cli
from eventweave.dynamics import AlternativeSet, CandidateEvent
from eventweave.graph import vector_from_dict, vector_to_dict
from eventweave.scenario import (
    Scenario,
    ScenarioError,
    Stage,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from eventweave.tensors import FactorLabel, LabeledVector, ProductBra

REPO = Path(__file__).resolve().parents[1]
FIGURE = REPO / "scenarios" / "figure.json"


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def make_bad_sum_scenario(path: Path) -> Path:
    src = unit_factor("alpha", [1.0, 0.0])
    cand = CandidateEvent(
        bra=ProductBra(
            [unit_factor("alpha", [math.sqrt(0.7), math.sqrt(0.3)])]
        ),
        c=1.0,
        ket=unit_factor("o1", [1.0], POINTER),
        name="tilt",
    )
    scen = Scenario(
        initial_events=[("src", src, None)],
        stages=[Stage("only", AlternativeSet([cand], exhaustive=True))],
    )
    path.write_text(json.dumps(scenario_to_dict(scen)))
    return path


# -- vector literals and scenario parsing ----------------------------------------


def test_vector_literal_round_trip_is_bit_exact(rng):
    amps = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    vec = LabeledVector(
        [FactorLabel("b", SPIN), FactorLabel("a", SPIN)],
        np.concatenate([amps[:4], [0, 0]])[:4],
    )
    data = vector_to_dict(vec)
    assert [entry["link"] for entry in data["labels"]] == ["a", "b"]
    back = vector_from_dict(json.loads(json.dumps(data)))
    assert back == vec


def test_shipped_figure_scenario_parses_and_builds():
    scen = load_scenario(FIGURE)
    assert [s.name for s in scen.stages] == ["absorb-left", "absorb-right"]
    h = scen.build_history()
    assert h.validate() == []
    assert scen.cuts["start"] == ["left-apparatus", "right-apparatus", "decay"]


def test_scenario_round_trip():
    scen = load_scenario(FIGURE)
    again = scenario_from_dict(json.loads(json.dumps(scenario_to_dict(scen))))
    assert scenario_to_dict(again) == scenario_to_dict(scen)


def test_scenario_errors_carry_breadcrumbs():
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict({"schema": "eventweave-scenario/1"})
    assert "initial_events" in str(err.value)
    data = json.loads(FIGURE.read_text())
    del data["stages"][0]["candidates"][0]["ket"]
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(data)
    assert "$.stages[0].candidates[0]" in str(err.value)


# -- epr subcommand -----------------------------------------------------------------


def test_epr_report_structure_and_zero_outcomes(capsys):
    code, out, _ = run_cli(capsys, "epr", "--theta", "0", "--runs", "10000")
    assert code == 0
    report = json.loads(out)
    jsonschema = pytest.importorskip("jsonschema")
    jsonschema.validate(report, cli.REPORT_SCHEMA)
    res = report["results"]
    assert res["theta_deg"] == 0.0
    assert res["empirical"]["p_pp"] == 0.0
    assert res["empirical"]["p_mm"] == 0.0
    assert res["within_three_sigma"] is True
    assert abs(res["E"] + 1.0) < 1e-12
    for key in ("p_pp", "p_pm", "p_mp", "p_mm"):
        assert 0.0 <= res[key] <= 1.0
        assert 0.0 <= res["empirical"][key] <= 1.0


def test_epr_replicas_use_independent_streams(capsys):
    code, out, _ = run_cli(
        capsys, "epr", "--theta", "45", "--runs", "5000", "--seed", "4",
        "--replicas", "3",
    )
    assert code == 0
    res = json.loads(out)["results"]
    reports = res["replica_reports"]
    assert [r["replica"] for r in reports] == [0, 1, 2]
    freqs = {tuple(sorted(r["empirical"].items())) for r in reports}
    assert len(freqs) == 3  # distinct draws per replica
    pooled = sum(r["empirical"]["p_pp"] for r in reports) / 3
    assert abs(pooled - res["empirical"]["p_pp"]) < 1e-12


def test_epr_three_sigma_at_ninety_degrees(capsys):
    code, out, _ = run_cli(
        capsys, "epr", "--theta", "90", "--runs", "100000", "--seed", "1"
    )
    assert code == 0
    res = json.loads(out)["results"]
    band = 3.0 * math.sqrt(0.25 * 0.75 / 100000)
    assert res["max_abs_deviation"] <= band


def test_epr_rejects_angles_outside_range(capsys):
    code, _, err = run_cli(capsys, "epr", "--theta", "240")
    assert code == 2
    assert "theta" in err


# -- chsh subcommand ------------------------------------------------------------------


def test_chsh_report(capsys):
    code, out, _ = run_cli(capsys, "chsh")
    assert code == 0
    res = json.loads(out)["results"]
    assert abs(res["S_abs"] - 2.0 * math.sqrt(2.0)) < 1e-9
    assert res["S_classical_max"] == 2.0
    assert res["gap"] >= 0.828 - 1e-6


# -- simulate subcommand ----------------------------------------------------------------


def test_simulate_figure_matches_analytic(capsys):
    code, out, _ = run_cli(
        capsys, "simulate", str(FIGURE), "--runs", "20000", "--seed", "11"
    )
    assert code == 0
    res = json.loads(out)["results"]
    assert res["chain_rule"]["paths_checked"] >= 8
    assert res["chain_rule"]["max_abs_dev"] < 1e-12
    for path in res["paths"]:
        p, f = path["analytic"], path["empirical"]
        assert 0.0 <= p <= 1.0
        band = 3.0 * math.sqrt(p * (1.0 - p) / 20000)
        assert abs(f - p) <= max(band, 1e-12)
    assert res["sample_history"] is not None
    assert abs(sum(p["analytic"] for p in res["paths"]) - 1.0) < 1e-9


def test_simulate_rejects_malformed_json(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text('{"schema": "eventweave-scenario/1", "initial_events": [}')
    code, _, err = run_cli(capsys, "simulate", str(bad))
    assert code == 2
    assert re.search(r"line \d+ column \d+", err)


def test_simulate_flags_non_exhaustive_sets(tmp_path, capsys):
    path = make_bad_sum_scenario(tmp_path / "short.json")
    code, _, err = run_cli(capsys, "simulate", str(path))
    assert code == 3
    assert "0.7" in err


def test_simulate_missing_file(capsys):
    code, _, err = run_cli(capsys, "simulate", "/nonexistent/file.json")
    assert code == 2
    assert "file" in err.lower() or "No such" in err


# -- thermal subcommand -------------------------------------------------------------------


def test_thermal_defaults_meet_the_contract(capsys):
    code, out, _ = run_cli(capsys, "thermal-ambiguity")
    assert code == 0
    res = json.loads(out)["results"]
    assert res["residual_sup_norm"] < 1e-8
    assert res["offdiag_max"] < 1e-12
    assert abs(res["ratio"] - 2.0 * math.sqrt(2.0) * math.pi) < 1e-9
    assert abs(res["trace_thermal"] - 1.0) < 1e-12
    assert abs(res["trace_mixture"] - 1.0) < 1e-12


def test_thermal_rejects_nonpositive_sites(capsys):
    code, _, err = run_cli(capsys, "thermal-ambiguity", "--sites", "0")
    assert code == 2
    assert "sites" in err


def test_thermal_csv_diagonals(tmp_path, capsys):
    out_file = tmp_path / "diag.csv"
    code, _, _ = run_cli(
        capsys, "thermal-ambiguity", "--sites", "64", "--format", "csv",
        "--out", str(out_file),
    )
    assert code == 0
    rows = list(csv.reader(io.StringIO(out_file.read_text())))
    assert rows[0] == ["p", "thermal", "mixture"]
    assert len(rows) == 65
    thermal_col = np.array([float(r[1]) for r in rows[1:]])
    mixture_col = np.array([float(r[2]) for r in rows[1:]])
    assert np.max(np.abs(thermal_col - mixture_col)) < 1e-8


# -- cells subcommand ---------------------------------------------------------------------


def test_cells_csv_and_slope(tmp_path, capsys):
    out_file = tmp_path / "cells.csv"
    code, _, _ = run_cli(
        capsys, "cells", "--sites", "1024", "--cells", "8,16,32,64",
        "--format", "csv", "--out", str(out_file),
    )
    assert code == 0
    rows = list(csv.reader(io.StringIO(out_file.read_text())))
    assert rows[0] == ["a", "delta_p", "delta_p_a_over_h", "coherence_defect"]
    assert len(rows) == 5
    for row in rows[1:]:
        assert 0.3 <= float(row[2]) <= 3.0


def test_cells_json_reports_slope(capsys):
    code, out, _ = run_cli(capsys, "cells", "--sites", "1024", "--cells", "8,16,32,64")
    assert code == 0
    res = json.loads(out)["results"]
    assert abs(res["slope"] + 1.0) < 0.05


def test_cells_rejects_zero_sites(capsys):
    code, _, err = run_cli(capsys, "cells", "--sites", "0")
    assert code == 2
    assert "sites" in err


# -- determinism ----------------------------------------------------------------------------


def _strip_duration(text: str) -> str:
    return "\n".join(
        line for line in text.splitlines() if '"duration_s"' not in line
    )


def test_reports_are_byte_identical_for_fixed_seeds(tmp_path, capsys):
    def run_twice(*argv):
        target = tmp_path / "report.json"
        texts = []
        for _ in range(2):
            code, _, _ = run_cli(capsys, *argv, "--out", str(target))
            assert code == 0
            texts.append(target.read_text())
        return texts

    first, second = run_twice("epr", "--theta", "60", "--runs", "30000", "--seed", "9")
    assert _strip_duration(first) == _strip_duration(second)
    first, second = run_twice("simulate", str(FIGURE), "--runs", "2000", "--seed", "5")
    assert _strip_duration(first) == _strip_duration(second)


def test_reports_validate_against_the_schema(capsys):
    jsonschema = pytest.importorskip("jsonschema")
    for argv in (
        ["chsh"],
        ["cells", "--sites", "1024", "--cells", "8,16"],
        ["thermal-ambiguity", "--sites", "64"],
        ["simulate", str(FIGURE), "--runs", "100"],
    ):
        code, out, _ = run_cli(capsys, *argv)
        assert code == 0
        jsonschema.validate(json.loads(out), cli.REPORT_SCHEMA)
