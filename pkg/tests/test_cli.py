import io
import json

import numpy as np
import pytest

from polycert.cli import Settings, UsageError, bench_csv, build_parser, load_json, parse_and_dispatch
from polycert.libs.certificates import SosCertificate, SosTerm
from polycert.utils.constants import EXIT_FAILURE, EXIT_INCONCLUSIVE, EXIT_NEGATIVE, EXIT_SUCCESS, EXIT_USAGE
from tests.conftest import poly


@pytest.fixture(autouse=True)
def no_user_config(tmp_path, monkeypatch):
    monkeypatch.setenv("POLYCERT_DATA_DIR", str(tmp_path / "no-config"))


@pytest.fixture
def write_json(tmp_path):
    def _write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    return _write


def _run(capsys, argv):
    code = parse_and_dispatch(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _square_certificate_json(gram):
    return SosCertificate(
        kind="cubic-sos",
        nvars=1,
        level=1,
        tol=1e-9,
        target=poly(1, {(2,): 1, (1,): 2, (0,): 1}),
        terms=[SosTerm(gram=np.asarray(gram, dtype=float), basis=[(0,), (1,)])],
    ).to_json()


def test_classify_local_min(capsys, write_json, x1_squared_x2):
    path = write_json("p.json", x1_squared_x2.to_json())
    code, out, _ = _run(capsys, ["classify", "--poly", path, "--point", "0,1"])
    assert code == EXIT_SUCCESS
    report = json.loads(out)
    assert report["local_min"] is True
    assert report["point"] == ["0", "1"]


def test_classify_certified_negative(capsys, write_json, x1_squared_x2):
    path = write_json("p.json", x1_squared_x2.to_json())
    code, out, _ = _run(capsys, ["classify", "--poly", path, "--point", "0,0"])
    assert code == EXIT_NEGATIVE
    assert json.loads(out)["witness"]["kind"] == "line"


def test_classify_float_point_is_inconclusive(capsys, write_json, x2_squared_minus_x1_squared_x2):
    path = write_json("p.json", x2_squared_minus_x1_squared_x2.to_json())
    code, out, _ = _run(capsys, ["classify", "--poly", path, "--point", "0.0,0.0"])
    assert code == EXIT_INCONCLUSIVE
    assert json.loads(out)["certified"] is False


def test_classify_rejects_quartic(capsys, write_json, quartic_not_toc):
    path = write_json("p.json", quartic_not_toc.to_json())
    code, _, err = _run(capsys, ["classify", "--poly", path, "--point", "0,0"])
    assert code == EXIT_USAGE
    assert err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["--solver", "NOPE", "classify", "--poly", "p.json", "--point", "0"],
        ["classify", "--point", "0"],
        ["gen", "maxcut", "--graph", "g.json"],
        ["gen", "sat", "--formula", "f.json", "--variant", "3sat"],
        ["gen", "maxcut", "--graph", "g.json", "--k", "1", "--variant", "sphi"],
        ["certify", "coercive"],
        ["nash", "welfare", "--game", "g.json", "--method", "SDP4"],
        ["nash", "exclude", "--game", "g.json"],
    ],
)
def test_usage_errors(capsys, argv):
    code, out, err = _run(capsys, argv)
    assert code == EXIT_USAGE
    assert out == ""
    assert err


def test_malformed_json_is_a_usage_error(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"nvars": 1,\n "terms": [}')
    code, _, err = _run(capsys, ["classify", "--poly", str(path), "--point", "0"])
    assert code == EXIT_USAGE
    assert "malformed JSON at line 2" in err


def test_missing_file_is_a_usage_error(capsys, tmp_path):
    code, _, _ = _run(capsys, ["classify", "--poly", str(tmp_path / "nope.json"), "--point", "0"])
    assert code == EXIT_USAGE


def test_malformed_polynomial_is_a_usage_error(capsys, write_json):
    path = write_json("p.json", {"terms": []})
    code, _, _ = _run(capsys, ["find-local-min", "--poly", path])
    assert code == EXIT_USAGE


def test_find_local_min(capsys, write_json, cubic_with_root_two):
    path = write_json("p.json", cubic_with_root_two.to_json())
    code, out, _ = _run(capsys, ["find-local-min", "--poly", path])
    assert code == EXIT_SUCCESS
    assert json.loads(out)["outcome"] == "local-min"


def test_find_local_min_without_minimum(capsys, write_json):
    path = write_json("p.json", poly(2, {(1, 1): 1, (1, 0): 1}).to_json())
    code, out, _ = _run(capsys, ["find-local-min", "--poly", path])
    assert code == EXIT_NEGATIVE
    assert json.loads(out)["outcome"] == "no-local-min"


def test_verify_cert(capsys, write_json):
    valid = write_json("valid.json", {"certificate": _square_certificate_json(gram=np.ones((2, 2)))})
    code, out, _ = _run(capsys, ["verify-cert", "--cert", valid])
    assert code == EXIT_SUCCESS
    assert json.loads(out)["valid"] is True

    tampered = write_json("tampered.json", _square_certificate_json(gram=[[1, 1], [1, 2]]))
    code, out, _ = _run(capsys, ["verify-cert", "--cert", tampered])
    assert code == EXIT_NEGATIVE
    assert json.loads(out)["reasons"]


def test_verify_cert_rejects_unknown_kind(capsys, write_json):
    data = _square_certificate_json(gram=np.ones((2, 2)))
    data["kind"] = "magic"
    code, _, _ = _run(capsys, ["verify-cert", "--cert", write_json("cert.json", data)])
    assert code == EXIT_USAGE


def test_gen_expbits(capsys):
    code, out, _ = _run(capsys, ["gen", "expbits", "--n", "2"])
    assert code == EXIT_SUCCESS
    report = json.loads(out)
    assert report["ground_truth"]["lower_bounds"] == [4, 16]
    assert report["provenance"]["reduction"] == "exponential-bitsize"


def test_gen_expbits_size_cap(capsys):
    code, _, _ = _run(capsys, ["gen", "expbits", "--n", "7"])
    assert code == EXIT_USAGE


def test_gen_maxcut(capsys, write_json):
    graph = write_json("triangle.json", {"n": 3, "edges": [[0, 1], [1, 2], [0, 2]]})
    code, out, _ = _run(capsys, ["gen", "maxcut", "--graph", graph, "--k", "2"])
    assert code == EXIT_SUCCESS
    report = json.loads(out)
    assert report["ground_truth"]["has_cut"] is True
    assert report["provenance"]["variant"] == "critical-cubic"


def test_gen_rejects_bad_graph(capsys, write_json):
    graph = write_json("bad.json", {"n": 2, "edges": [[0, 5]]})
    code, _, err = _run(capsys, ["gen", "stableset", "--graph", graph, "--r", "1"])
    assert code == EXIT_USAGE
    assert "invalid graph" in err


def test_gen_cut_size_out_of_range_is_a_usage_error(capsys, write_json):
    graph = write_json("path.json", {"n": 4, "edges": [[0, 1], [1, 2], [2, 3]]})
    code, out, err = _run(capsys, ["gen", "maxcut", "--graph", graph, "--k", "5"])
    assert code == EXIT_USAGE
    assert out == ""
    assert "Cut size k must lie in [0, 4]" in err

    code, out, _ = _run(capsys, ["gen", "maxcut", "--graph", graph, "--k", "4"])
    assert code == EXIT_SUCCESS
    assert json.loads(out)["ground_truth"]["has_cut"] is False


def test_gen_sat_from_stdin(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps({"nvars": 3, "clauses": [[1, 2, 3]]})))
    code, out, _ = _run(capsys, ["gen", "sat", "--formula", "-", "--variant", "sphi"])
    assert code == EXIT_SUCCESS
    assert json.loads(out)["ground_truth"]["satisfiable"] is True


def test_gen_writes_out_file(capsys, tmp_path):
    out_path = tmp_path / "instance.json"
    code, out, _ = _run(capsys, ["--out", str(out_path), "gen", "expbits", "--n", "1"])
    assert code == EXIT_SUCCESS
    assert out == ""
    assert json.loads(out_path.read_text())["name"] == "exponential-bitsize"


def test_nash_enumerate(capsys, write_json):
    game = write_json("pennies.json", {"A": [[1, -1], [-1, 1]], "B": [[-1, 1], [1, -1]]})
    code, out, _ = _run(capsys, ["nash", "enumerate", "--game", game])
    assert code == EXIT_SUCCESS
    report = json.loads(out)
    assert report["equilibria"] == [{"x": ["1/2", "1/2"], "y": ["1/2", "1/2"]}]
    assert report["degenerate"] is False


def test_nash_symmetrize(capsys, write_json):
    game = write_json("game.json", {"A": [[0, 0], [0, 1]], "B": [[-1, 0], [-1, 0]]})
    code, out, _ = _run(capsys, ["nash", "symmetrize", "--game", game, "--method", "jurg", "--no-shift"])
    assert code == EXIT_SUCCESS
    report = json.loads(out)
    assert report["method"] == "jurg"
    assert len(report["game"]["A"]) == 5


def test_nash_rejects_bad_game(capsys, write_json):
    game = write_json("game.json", {"A": [[1, 2]]})
    code, _, _ = _run(capsys, ["nash", "enumerate", "--game", game])
    assert code == EXIT_USAGE


def test_nash_exclude_bad_strategies(capsys, write_json):
    game = write_json("game.json", {"A": [[3, 0], [5, 1]], "B": [[3, 5], [0, 1]]})
    code, _, _ = _run(capsys, ["nash", "exclude", "--game", game, "--strategies", "a,b"])
    assert code == EXIT_USAGE


def test_unexpected_errors_exit_with_failure(capsys, write_json):
    game = write_json("game.json", {"A": [[3, 0], [5, 1]], "B": [[3, 5], [0, 1]]})
    code, _, _ = _run(capsys, ["nash", "exclude", "--game", game, "--strategies", "7"])
    assert code == EXIT_FAILURE


def test_settings_precedence(config_dir):
    parser = build_parser()
    settings = Settings(args=parser.parse_args(["nash", "solve", "--game", "g.json"]), command_name="nash-solve")
    assert settings.get(key="iters") == 3
    assert settings.tol == 1e-7
    assert settings.get(key="seed", default=0) == 0

    args = parser.parse_args(["nash", "solve", "--game", "g.json", "--iters", "7", "--tol", "1e-5"])
    settings = Settings(args=args, command_name="nash-solve")
    assert settings.get(key="iters") == 7
    assert settings.tol == 1e-5

    settings = Settings(args=parser.parse_args(["nash", "bounds", "--game", "g.json"]), command_name="nash-bounds")
    assert settings.get(key="iters") == 5


def test_command_section_tol_reaches_report(capsys, config_dir, write_json, x1_squared_x2):
    path = write_json("p.json", x1_squared_x2.to_json())
    _, out, _ = _run(capsys, ["classify", "--poly", path, "--point", "0,1"])
    assert json.loads(out)["tol"] == 1e-9
    _, out, _ = _run(capsys, ["classify", "--poly", path, "--point", "0,1", "--tol", "1e-6"])
    assert json.loads(out)["tol"] == 1e-6


def test_settings_without_config():
    args = build_parser().parse_args(["classify", "--poly", "p.json", "--point", "0"])
    settings = Settings(args=args, command_name="classify")
    assert settings.tol == 1e-8
    assert settings.solver is None


def test_load_json_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("[1, 2")
    with pytest.raises(UsageError, match="line 1"):
        load_json(path=str(path))


def test_bench_csv():
    rows = [{"size": "2x2", "algorithm": "trace", "count": 2, "Max": 0.5, "Mean": 0.25, "Median": 0.25, "StDev": 0.1}]
    assert bench_csv(rows=rows) == "size,algorithm,count,Max,Mean,Median,StDev\n2x2,trace,2,0.5,0.25,0.25,0.1\n"
