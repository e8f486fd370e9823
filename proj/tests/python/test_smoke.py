import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import mmdae

CASES = Path(os.environ.get("MMDAE_CASE_DIR", Path(__file__).resolve().parents[2] / "cases"))


def case(name):
    return mmdae.load_case(CASES / f"{name}.json")


def test_two_bus_power_flow_matches_closed_form():
    pf = mmdae.nr_powerflow(case("two_bus"))
    theta = -0.5 * math.asin(0.02)
    assert abs(pf.va[1] - theta) < 1e-10
    assert abs(pf.vm[1] - math.cos(theta)) < 1e-10


def test_kundur_initializes_consistently():
    sys = mmdae.initialize(case("kundur_two_area"))
    assert sys.report.passed
    p = sys.problem
    assert p.mass_rank == p.n
    r = p.residual(p.z0)
    assert np.max(np.abs(r)) < 1e-8


def test_reduced_case_drops_rank_by_four():
    full = mmdae.initialize(case("kundur_two_area")).problem
    reduced = mmdae.initialize(case("kundur_reduced")).problem
    assert full.mass_rank - reduced.mass_rank == 4


def test_event_run_and_csv(tmp_path):
    c = case("kundur_two_area")
    p = mmdae.initialize(c).problem
    traj = mmdae.integrate(p, 0.0, 0.3, solver="trap", h=1e-2, events_from=c)
    assert traj.times[-1] == pytest.approx(0.3)
    assert traj.values.shape == (len(traj), p.n + p.m)
    assert [e[1] for e in traj.events] == ["trip", "reconnect"]
    out = tmp_path / "run.csv"
    traj.to_csv(out)
    lines = out.read_text().splitlines()
    assert lines[0].split(",")[0] == "t"
    assert any(line.startswith("# event trip") for line in lines)


def test_traditional_twin_matches_on_unit_steps():
    p = mmdae.initialize(case("two_machine")).problem
    twin = mmdae.to_traditional(p)
    a = mmdae.integrate(p, 0.0, 0.05, h=1e-3, newton_tol=1e-10)
    b = mmdae.integrate(twin, 0.0, 0.05, h=1e-3, newton_tol=1e-10)
    assert np.max(np.abs(a.values - b.values)) <= 1e-8


def test_errors_map_to_python_exceptions():
    with pytest.raises(mmdae.ParseError):
        mmdae.parse_case("{ not json")
    with pytest.raises(mmdae.ValidationError):
        mmdae.parse_case('{"schema_version": 2}')
    reduced = mmdae.initialize(case("kundur_reduced")).problem
    with pytest.raises(mmdae.ValidationError):
        mmdae.to_traditional(reduced)


def test_bench_records():
    rows = mmdae.bench(case("two_machine"), solvers=["ie", "trap"], controls=[2e-2, 1e-2], runs=1)
    assert [(r["solver"], r["control"]) for r in rows] == [
        ("ie", 2e-2), ("ie", 1e-2), ("trap", 2e-2), ("trap", 1e-2)]
    assert rows[2]["error"] < rows[0]["error"]


def test_bundled_cases_follow_the_shipped_schema():
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads((Path(__file__).resolve().parents[2] / "docs" / "case.schema.json").read_text())
    for path in sorted(CASES.glob("*.json")):
        jsonschema.validate(json.loads(path.read_text()), schema)
