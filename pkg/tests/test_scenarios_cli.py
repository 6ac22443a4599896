import csv
import io
import json

import numpy as np
import pytest

from frameforge.cli import main
from frameforge.errors import ParseError, UnknownScenario
from frameforge.scenarios import BUILTIN_NAMES, builtin, field_from_dict, load, parse_matrix, save
from frameforge.torus import conjugate, gramian_at

from conftest import EX1


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def test_builtin_examples():
    assert np.array_equal(gramian_at(builtin("example1").field, [0.1]), EX1)
    assert np.array_equal(gramian_at(builtin("paley-split").field, [0.25]), np.diag([1.0, 0.0]))
    with pytest.raises(UnknownScenario):
        builtin("unknown")


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_round_trip(name, tmp_path):
    sc = builtin(name)
    path = tmp_path / f"{name}.json"
    save(sc, path)
    back = load(path)
    rng = np.random.default_rng(1)
    pts = rng.uniform(-0.5, 0.5, (100, sc.field.dimension))
    assert np.abs(back.field.evaluate(pts) - sc.field.evaluate(pts)).max() <= 1e-12


def test_round_trip_with_transform(tmp_path):
    sc = builtin("example2")
    A = np.array([[0.6, 0.8j]])
    from frameforge.scenarios import Scenario

    conj = Scenario("c", conjugate(sc.field, A))
    save(conj, tmp_path / "c.json")
    back = load(tmp_path / "c.json")
    pts = np.random.default_rng(2).uniform(-0.5, 0.5, (100, 2))
    assert np.abs(back.field.evaluate(pts) - conj.field.evaluate(pts)).max() <= 1e-12


def test_entry_sourced_file(tmp_path):
    doc = {"dimension": 1, "gramian_entries": [[[{"box": [[-0.5, 0.5]],
                                                   "poly": [{"coeff": [2, 0], "freq": [0]},
                                                            {"coeff": [-1, 0], "freq": [1]},
                                                            {"coeff": [-1, 0], "freq": [-1]}]}]]]}
    f = field_from_dict(doc)
    assert gramian_at(f, [0.0])[0, 0] == pytest.approx(0.0, abs=1e-15)
    assert gramian_at(f, [-0.5])[0, 0] == pytest.approx(4.0)


def test_parse_error_json_location(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"dimension": 1,\n "generators": [\n}')
    with pytest.raises(ParseError) as info:
        load(p)
    assert ":3:" in str(info.value)


@pytest.mark.parametrize("doc,where", [
    ({"dimension": 0, "generators": []}, "$.dimension"),
    ({"dimension": 1}, "exactly one"),
    ({"dimension": 1, "generators": [[{"box": [[0, 1]], "poly": [{"coeff": 1, "freq": [0.5]}]}]]},
     "$.generators[0][0].poly[0].freq"),
    ({"dimension": 1, "generators": [[{"box": [[1, 0]], "poly": []}]]}, "$.generators[0][0].box[0]"),
    ({"dimension": 1, "generators": [[{"box": [[0, 1]]}]]}, "missing key 'poly'"),
    ({"dimension": 1, "generators": [[{"box": [[0, 1]], "poly": [{"coeff": [1, 2, 3], "freq": [0]}]}]]},
     "coeff"),
])
def test_parse_error_field_location(doc, where):
    with pytest.raises(ParseError) as info:
        field_from_dict(doc)
    assert where in str(info.value)


def test_parse_matrix():
    A = parse_matrix("[[[0.6,0],[0.8,0]]]")
    assert A.shape == (1, 2) and A[0, 1] == 0.8
    assert parse_matrix([[1, [0, 1]]])[0, 1] == 1j
    with pytest.raises(ParseError):
        parse_matrix("[[1, 2], [3]]")
    with pytest.raises(ParseError):
        parse_matrix("[[1, ")
    with pytest.raises(ParseError):
        parse_matrix([["x"]])


# --- CLI -----------------------------------------------------------------------


def test_cli_classify():
    code, out = run("classify", "example1", "--grid", "256")
    doc = json.loads(out)
    assert code == 0
    assert doc["verdict"] == "Frame"
    assert doc["alpha"] == pytest.approx(81) and doc["beta"] == pytest.approx(81)
    assert doc["length"] == 2


def test_cli_certify_reject_exit_code():
    code, out = run("certify", "example2", "--matrix", "[[[0.6,0],[0.8,0]]]", "--method", "both")
    doc = json.loads(out)
    assert code == 1
    assert doc["geometricVerdict"] == "reject" and doc["analyticVerdict"] == "reject"
    assert doc["argminOmega"] is not None


def test_cli_certify_accept_exit_code():
    code, out = run("certify", "paley-split", "--matrix", "[[1, 1]]", "--method", "geometric")
    assert code == 0
    assert json.loads(out)["deltaHat"] == pytest.approx(2 ** -0.5)


def test_cli_errors(capsys, tmp_path):
    assert run("classify", "nope")[0] == 2
    assert "nope" in capsys.readouterr().err
    assert run("certify", "example1", "--matrix", "[[1, 2]]")[0] == 2
    assert run("certify", "example1", "--matrix", "[[1,")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run("classify", str(bad))[0] == 2
    assert run("certify", "bessel-not-frame", "--matrix", "[[1]]")[0] == 2
    assert run("no-such-command")[0] == 2


def test_cli_scan():
    code, out = run("scan", "example1", "--ell", "2", "--trials", "25", "--seed", "7")
    doc = json.loads(out)
    assert code == 0
    assert doc["inRCount"] == 25 and doc["framePreservingCount"] == 25


def test_cli_profile_csv(tmp_path):
    path = tmp_path / "p.csv"
    code, out = run("profile", "example2", "--grid", "8", "--matrix", "[[0.6, 0.8]]", "--csv", str(path))
    assert code == 0
    summary = json.loads(out)
    assert summary["rows"] == 64
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["omega_1", "omega_2", "eig_1", "eig_2", "rank", "sine"]
    body = [[float(x) for x in r] for r in rows[1:]]
    assert len(body) == 64
    assert [r[:2] for r in body] == sorted(r[:2] for r in body)
    for r in body:
        assert r[2] <= r[3]
        assert 0 <= r[5] <= 1


def test_cli_profile_stdout_without_matrix():
    code, out = run("profile", "example1", "--grid", "4")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["omega_1", "eig_1", "eig_2", "eig_3", "rank"]
    assert len(rows) == 5


def test_cli_deterministic_across_threads(monkeypatch):
    outs = []
    for threads in ("1", "8"):
        monkeypatch.setenv("FRAMEFORGE_THREADS", threads)
        outs.append([run("classify", "example2", "--grid", "128")[1],
                     run("scan", "example2", "--ell", "1", "--trials", "6", "--seed", "3", "--grid", "128")[1],
                     run("profile", "bessel-not-frame", "--grid", "64", "--matrix", "[[2]]")[1]])
    assert outs[0] == outs[1]


def test_cli_reproduce_single():
    code, out = run("reproduce-paper", "2")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert run("reproduce-paper", "99")[0] == 2
