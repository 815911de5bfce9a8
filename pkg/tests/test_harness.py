import numpy as np
import pandas as pd
import pytest

from harness import cli
from harness.results_io import MeshSnapshotWriter, emit_results, read_results
from harness.runner import SUMMARY_COLUMNS, run_study, summary_table
from harness.studies import (
    CSV_COLUMNS,
    RunRecord,
    eoc_sequence,
    loglog_slope,
    moving_average,
    run_adaptive,
    run_convergence_study,
    run_label,
)
from modules.Assembly_Module.dg_operator import DGMethod
from modules.Mesh_Module.mesh import EdgeTag, read_mesh_text
from utils.config import StudyConfig
from utils.errors import ResultsIOError, SolverError

MP1_SIPG_ERRORS = [3.2583e-1, 8.8548e-2, 2.2846e-2, 5.7886e-3, 1.4560e-3]


def make_record(level, error, eoc=None, h=None):
    return RunRecord(
        run="mp1-sipg-uniform", level=level, h=h, ndofs=96 * 4 ** (level - 1), error=error, eoc=eoc,
        eta1sq=1.0 / level, eta2sq=0.5, eta3sq=0.25, eta4sq=0.0, eta5sq=0.1, eta6sq=0.0, eta7sq=1e-3,
        eta_total=1.5, eff_index=None if error is None else 1.5 / error, pdas_iters=2, wall_ms=12.5,
    )


@pytest.fixture
def no_config(monkeypatch):
    monkeypatch.delenv("DGCONTACT_CONFIG", raising=False)


def test_eoc_sequence():
    eocs = eoc_sequence([0.4, 0.1, None, 0.05, 0.0])
    assert eocs[0] is None
    assert np.isclose(eocs[1], 2.0)
    assert eocs[2] is None and eocs[3] is None and eocs[4] is None


def test_loglog_slope():
    ndofs = [100, 400, 1600, 6400]
    assert np.isclose(loglog_slope(ndofs, [1.0 / n for n in ndofs]), -1.0)
    assert np.isclose(loglog_slope(ndofs, [n ** -0.5 for n in ndofs], last=2), -0.5)
    with pytest.raises(ValueError):
        loglog_slope([10], [1.0])


def test_moving_average():
    assert np.allclose(moving_average([5.0, 4.0, 3.0, 2.0, 1.0, 0.0], window=5), [3.0, 2.0])
    assert np.allclose(moving_average([1.0, 3.0], window=1), [1.0, 3.0])
    with pytest.raises(ValueError):
        moving_average([1.0, 2.0], window=5)


def test_run_label(mp1):
    assert run_label(mp1, DGMethod.NIPG, "adaptive") == "mp1-nipg-adaptive"


def test_empty_results_file_is_header_only(tmp_path):
    path = emit_results([], tmp_path / "out" / "empty.csv")
    assert path.read_text() == ",".join(CSV_COLUMNS) + "\n"


def test_results_round_trip(tmp_path):
    errors = [0.3, 0.08, 0.021]
    eocs = eoc_sequence(errors)
    records = [make_record(k + 1, e, eoc, h=2.0 ** -(k + 1)) for k, (e, eoc) in enumerate(zip(errors, eocs))]
    frame = read_results(emit_results(records, tmp_path / "study.csv"))
    assert list(frame.columns) == CSV_COLUMNS
    assert pd.isna(frame["eoc"][0])
    recomputed = np.log2(frame["error"].values[:-1] / frame["error"].values[1:])
    assert np.allclose(frame["eoc"].values[1:], recomputed, atol=1e-12, rtol=0)
    assert frame["pdas_iters"].tolist() == [2, 2, 2]


def test_missing_values_are_blank(tmp_path):
    path = emit_results([make_record(1, None)], tmp_path / "adaptive.csv")
    row = path.read_text().splitlines()[1].split(",")
    fields = dict(zip(CSV_COLUMNS, row))
    assert fields["h"] == "" and fields["error"] == "" and fields["eoc"] == "" and fields["eff_index"] == ""


def test_results_are_deterministic(tmp_path):
    records = [make_record(1, 0.3), make_record(2, 0.08, 1.9)]
    first = emit_results(records, tmp_path / "a.csv").read_bytes()
    second = emit_results(records, tmp_path / "b.csv").read_bytes()
    assert first == second


def test_unwritable_results_path(tmp_path):
    with pytest.raises(ResultsIOError) as exc:
        emit_results([make_record(1, 0.3)], tmp_path)
    assert str(tmp_path) in str(exc.value)


def test_summary_table_marks_missing_values():
    table = summary_table([make_record(1, None)])
    header = table.splitlines()[0]
    for column in SUMMARY_COLUMNS:
        assert column in header
    assert "-" in table.splitlines()[2]


def test_mesh_snapshots(tmp_path, mp1):
    sink = MeshSnapshotWriter(tmp_path / "meshes", "mp1-sipg-uniform")
    records = run_convergence_study(mp1, DGMethod.SIPG, levels=2, mesh_sink=sink)
    assert [p.name for p in sink.written] == ["mp1-sipg-uniform_level001.mesh", "mp1-sipg-uniform_level002.mesh"]
    mesh = read_mesh_text(sink.written[-1], mp1.boundary)
    assert 12 * mesh.n_triangles == records[-1].ndofs


def test_short_uniform_study(mp1):
    records = run_convergence_study(mp1, DGMethod.SIPG, levels=2)
    assert [r.level for r in records] == [1, 2]
    assert [r.h for r in records] == [0.5, 0.25]
    assert [r.ndofs for r in records] == [96, 384]
    assert records[0].eoc is None and records[1].eoc > 1.0
    assert records[0].error == pytest.approx(MP1_SIPG_ERRORS[0], rel=1.0)
    for r in records:
        assert r.eta_total > 0 and r.eff_index > 0
        assert r.eta_total ** 2 == pytest.approx(sum(getattr(r, f"eta{i}sq") for i in range(1, 8)))


def test_uniform_study_without_exact_solution(mp2):
    records = run_convergence_study(mp2, DGMethod.SIPG, levels=1, initial_n=2)
    assert records[0].error is None and records[0].eoc is None and records[0].eff_index is None
    assert records[0].eta_total > 0


def test_uniform_study_rejects_zero_levels(mp1):
    with pytest.raises(ValueError):
        run_convergence_study(mp1, levels=0)


def test_run_study_writes_csv(tmp_path, no_config):
    config = StudyConfig(levels=1, output=str(tmp_path / "run.csv"))
    records = run_study(config)
    frame = read_results(tmp_path / "run.csv")
    assert len(records) == len(frame) == 1
    assert frame["run"][0] == "mp1-sipg-uniform"


# ----------------------------------------------------------------------
# command line
# ----------------------------------------------------------------------
def test_cli_success(tmp_path, capsys, no_config):
    out = tmp_path / "cli.csv"
    code = cli.main(["solve", "--problem", "1", "--levels", "1", "--output", str(out)])
    assert code == 0
    assert out.exists()
    assert "ndofs" in capsys.readouterr().out


def test_cli_missing_config_file(tmp_path, no_config):
    assert cli.main(["solve", "--config", str(tmp_path / "nope.yaml")]) == 2


def test_cli_bad_theta(no_config):
    assert cli.main(["solve", "--theta", "1.5"]) == 2


def test_cli_solver_failure(monkeypatch, no_config):
    def failing(config):
        raise SolverError("singular")

    monkeypatch.setattr(cli, "run_study", failing)
    assert cli.main(["solve", "--levels", "1"]) == 1


def test_cli_numerical_failure(monkeypatch, no_config):
    def failing(config):
        raise ValueError("array must not contain infs or NaNs")

    monkeypatch.setattr(cli, "run_study", failing)
    assert cli.main(["solve", "--levels", "1"]) == 1


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit):
        cli.main([])


# ----------------------------------------------------------------------
# acceptance runs
# ----------------------------------------------------------------------
@pytest.mark.slow
def test_sipg_convergence_matches_reference(mp1):
    records = run_convergence_study(mp1, DGMethod.SIPG, levels=5)
    for record, expected in zip(records, MP1_SIPG_ERRORS):
        assert 0.5 * expected <= record.error <= 2.0 * expected
    assert abs(records[-1].eoc - 1.99) <= 0.06
    eff = [r.eff_index for r in records]
    assert max(eff) / min(eff) <= 3.0


@pytest.mark.slow
def test_nipg_convergence(mp1):
    records = run_convergence_study(mp1, DGMethod.NIPG, levels=5)
    assert 0.5 * 1.4463e-3 <= records[-1].error <= 2.0 * 1.4463e-3
    assert abs(records[-1].eoc - 1.9904) <= 0.06
    eff = [r.eff_index for r in records]
    assert max(eff) / min(eff) <= 3.0


@pytest.mark.slow
def test_adaptive_first_problem_is_optimal(mp1):
    # slopes are taken well past the coarse start, where both decay faster than N^-1
    records = run_adaptive(mp1, DGMethod.SIPG, theta=0.4, max_dofs=100_000, initial_n=4)
    ndofs = [r.ndofs for r in records]
    assert len(records) >= 10
    assert abs(loglog_slope(ndofs, [r.error for r in records]) + 1.0) <= 0.15
    assert abs(loglog_slope(ndofs, [r.eta_total for r in records]) + 1.0) <= 0.15
    eff = [r.eff_index for r in records]
    assert max(eff) / min(eff) <= 3.0


def _tip_refinement_ratio(mesh):
    centroids = mesh.vertices[mesh.triangles].mean(axis=1)
    near_tip = np.linalg.norm(centroids - [1.0, 0.5], axis=1) <= 0.15
    assert near_tip.any()
    return mesh.diameters[near_tip].mean() / mesh.diameters.mean()


@pytest.mark.slow
def test_adaptive_second_problem_refines_near_wedge_tip(mp2):
    meshes = {}
    records = run_adaptive(
        mp2, DGMethod.SIPG, theta=0.4, max_dofs=10**6, max_iterations=15,
        mesh_sink=lambda level, mesh: meshes.__setitem__(level, mesh),
    )
    assert len(records) == 15
    assert all(b.ndofs > a.ndofs for a, b in zip(records, records[1:]))
    assert records[-1].error is None
    assert len(meshes[15].edges_with_tag(EdgeTag.CONTACT)) > 4
    # measured near 0.3; the clamped corners keep drawing refinement too
    assert _tip_refinement_ratio(meshes[15]) <= 0.5


@pytest.mark.slow
def test_adaptive_second_problem_nipg_contributions_decay(mp2):
    meshes = {}
    records = run_adaptive(
        mp2, DGMethod.NIPG, theta=0.4, max_dofs=10**6, max_iterations=15,
        mesh_sink=lambda level, mesh: meshes.__setitem__(level, mesh),
    )
    assert len(records) == 15
    for i in range(1, 8):
        smoothed = moving_average([getattr(r, f"eta{i}sq") for r in records], window=5)
        assert smoothed[-1] <= smoothed[0], f"eta{i} grew"
        if smoothed[0] > 0:
            assert smoothed[-1] < smoothed[0], f"eta{i} stalled"
    total = moving_average([r.eta_total for r in records], window=5)
    assert total[-1] < total[0]
    assert _tip_refinement_ratio(meshes[15]) <= 0.5
