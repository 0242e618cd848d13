import json

import pytest

from src.aeq_search.cli import (
    EXIT_BUDGET_EXCEEDED,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    EXIT_VERIFICATION_FAILED,
    main,
)
from src.aeq_search.constructions import named_graph
from src.aeq_search.geometry import PointSet, dump_point_set
from src.aeq_search.graphcore import read_graph6_file


def test_bounds_table(capsys):
    assert main(["bounds", "--table", "9"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].split() == ["lower", "4", "7", "10", "12", "16", "18", "20", "24", "24"]
    assert lines[2].split() == ["upper", "4", "7", "10", "13", "20", "26", "34", "41", "49"]


def test_bounds_for_one_dimension(capsys):
    assert main(["bounds", "--dim", "10"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["ramsey_upper"] == 77
    assert report["ramsey_exact"] is False


def test_bounds_csv(capsys):
    assert main(["bounds", "--table", "3", "--format", "csv"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0].startswith("d,lower,upper")


def test_enumerate_minimal_plane(capsys):
    assert main(["enumerate", "--dim", "2", "--max-n", "9", "--mode", "minimal"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,d,mode,count,complete"
    counts = [int(line.split(",")[3]) for line in lines[1:]]
    assert counts == [1, 1, 1, 2, 2, 2, 1, 1, 0]


def test_enumerate_writes_csv_graphs_and_manifests(tmp_path):
    table = tmp_path / "counts.csv"
    graphs = tmp_path / "d2.g6"
    argv = ["enumerate", "--dim", "2", "--max-n", "7", "--output", str(table), "--emit-graphs", str(graphs)]
    assert main(argv) == EXIT_OK
    assert table.read_text().splitlines()[-1] == "7,2,all,2,True"
    assert len(read_graph6_file(graphs)) == 1 + 2 + 3 + 6 + 7 + 9 + 2
    manifest = json.loads((tmp_path / "counts.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "enumerate"
    assert manifest["complete"] is True
    assert manifest["parameters"]["dim"] == 2
    assert (tmp_path / "d2.g6.manifest.json").exists()


def test_enumerate_budget_exit_code(capsys):
    assert main(["enumerate", "--dim", "3", "--max-n", "12", "--time-budget", "1e-9"]) == EXIT_BUDGET_EXCEEDED
    assert capsys.readouterr().out.splitlines()[-1].endswith(",False")


def test_enumerate_dimension_one_is_an_input_error(capsys):
    assert main(["enumerate", "--dim", "1", "--max-n", "5"]) == EXIT_INPUT_ERROR
    assert "error" in capsys.readouterr().err


def test_usage_errors_exit_with_input_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["enumerate", "--dim", "two"])
    assert excinfo.value.code == EXIT_INPUT_ERROR


@pytest.mark.parametrize(
    "selector",
    [["--larman-rogers", "6"], ["--two-simplex", "4"], ["--name", "moser_spindle"], ["--two-simplex", "5", "--sign", "-1"]],
)
def test_construct_then_verify(tmp_path, capsys, selector):
    points = tmp_path / "points.json"
    assert main(["construct", *selector, "--output", str(points)]) == EXIT_OK
    construct_out = json.loads(capsys.readouterr().out)
    assert construct_out["report"]["ok"] is True
    assert main(["verify", "--points", str(points)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["report"]["ok"] is True


def test_verify_reads_construct_stdout(tmp_path, capsys):
    assert main(["construct", "--larman-rogers", "8"]) == EXIT_OK
    document = tmp_path / "lr8.json"
    document.write_text(capsys.readouterr().out)
    assert main(["verify", "--points", str(document)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["report"]["stats"]["points"] == 24


def test_verify_reports_a_witness(tmp_path, capsys):
    points = tmp_path / "line.json"
    dump_point_set(PointSet.floating([[0.0], [2.0], [4.0]]), points)
    assert main(["verify", "--points", str(points)]) == EXIT_VERIFICATION_FAILED
    captured = capsys.readouterr()
    assert json.loads(captured.out)["report"]["witness"] == [0, 1, 2]
    assert "witness: points 0 1 2" in captured.err


def test_verify_malformed_file(tmp_path, capsys):
    points = tmp_path / "broken.json"
    points.write_text('{"dimension": 2,\n "points": [[0, 0]')
    assert main(["verify", "--points", str(points)]) == EXIT_INPUT_ERROR
    assert "line 2" in capsys.readouterr().err


def test_verify_rejects_nan_coordinates(tmp_path, capsys):
    points = tmp_path / "nan.json"
    points.write_text('{"dimension": 1, "arithmetic": {"mode": "floating"}, "points": [[NaN], [0.0], [1.0]]}')
    assert main(["verify", "--points", str(points)]) == EXIT_INPUT_ERROR
    assert "non-finite" in capsys.readouterr().err


def test_verify_missing_file(tmp_path):
    assert main(["verify", "--points", str(tmp_path / "nowhere.json")]) == EXIT_INPUT_ERROR


def test_construct_unsupported_dimension():
    assert main(["construct", "--larman-rogers", "4"]) == EXIT_INPUT_ERROR


def test_fixture_list(capsys):
    assert main(["fixture", "--list"]) == EXIT_OK
    names = capsys.readouterr().out.split()
    assert {"G10", "G11", "G14", "moser_spindle", "biaugmented_pair_3d"} <= set(names)


def test_fixture_then_embed(tmp_path, capsys):
    g11 = tmp_path / "g11.g6"
    assert main(["fixture", "--name", "G11", "--output", str(g11)]) == EXIT_OK
    assert read_graph6_file(g11) == [named_graph("G11")]
    argv = ["embed", "--graph", str(g11), "--dim", "3", "--restarts", "3", "--max-iters", "300", "--seed", "5"]
    assert main(argv) == EXIT_OK
    output = json.loads(capsys.readouterr().out)
    assert output["result"]["declared"] == "inconclusive"
    assert len(output["result"]["restart_residuals"]) == 3
    assert output["manifest"]["seed"] == 5


def test_embed_index_out_of_range(tmp_path):
    g11 = tmp_path / "g11.g6"
    main(["fixture", "--name", "G11", "--output", str(g11)])
    assert main(["embed", "--graph", str(g11), "--index", "1", "--dim", "3", "--restarts", "1"]) == EXIT_INPUT_ERROR


def test_unknown_fixture(capsys):
    assert main(["fixture", "--name", "nope"]) == EXIT_INPUT_ERROR
    assert "Unknown fixture" in capsys.readouterr().err


def test_invalid_environment_is_an_input_error(monkeypatch):
    monkeypatch.setenv("AEQ_JOBS", "zero")
    assert main(["bounds", "--dim", "3"]) == EXIT_INPUT_ERROR


@pytest.mark.slow
def test_enumerate_space_table(capsys):
    assert main(["enumerate", "--dim", "3", "--max-n", "12", "--jobs", "2", "--parallel-depth", "6"]) == EXIT_OK
    counts = [int(line.split(",")[3]) for line in capsys.readouterr().out.splitlines()[4:]]
    assert counts == [7, 13, 29, 50, 69, 35, 7, 1, 0]


@pytest.mark.slow
def test_embed_moser_spindle_with_default_restarts(tmp_path, capsys):
    spindle = tmp_path / "spindle.g6"
    main(["fixture", "--name", "moser_spindle", "--output", str(spindle)])
    assert main(["embed", "--graph", str(spindle), "--dim", "2"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["result"]["declared"] == "realized"
