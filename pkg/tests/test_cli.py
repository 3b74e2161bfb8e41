import csv
import io
import json

import numpy as np
import pytest

from slicecalc import SliceCalcError, algebra
from slicecalc.checks import run_checks
from slicecalc.cli import main, parse_element, parse_point


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_parse_element(H):
    assert np.allclose(parse_element("1+2i-j+0.5k", H), [1, 2, -1, 0.5])
    assert np.allclose(parse_element("2e1", algebra("clifford:2")), 2 * algebra("clifford:2").basis(1))
    assert np.allclose(parse_element("1e+1", H), [10, 0, 0, 0])
    assert np.allclose(parse_element("[0, 0, 1, 0]", H), H.element("j"))
    with pytest.raises(SliceCalcError):
        parse_element("2q", H)


def test_parse_point(H):
    p = parse_point("0.5+0.5i", H)
    assert p.x[0] == 0.5 and abs(p.y[0]) == 0.5


def test_sigma_dist(capsys):
    assert run(capsys, "sigma-dist", "--p", "i", "--q", "j")[1].strip() == "2"
    code, out, _ = run(capsys, "sigma-dist", "--p", "i", "--q", "j", "--variant", "orthogonal")
    assert code == 0 and float(out) == pytest.approx(np.sqrt(2), abs=1e-11)
    code, out, _ = run(capsys, "sigma-dist", "--p", "1+i", "--q", "1+i", "--format", "json")
    assert json.loads(out)["sigma_distance"] == 0


def test_witness_csv(capsys):
    code, out, _ = run(capsys, "witness", "metrizability", "--k", "5")
    t = rows(out)
    assert code == 0 and t[0] == ["probe_index", "parameter", "distance"]
    assert len(t) == 6 and float(t[-1][2]) == pytest.approx(0.2)
    code, out, _ = run(capsys, "witness", "tau-sigma", "--k", "4")
    dist = [float(r[2]) for r in rows(out)[1:]]
    assert all(a > b for a, b in zip(dist, dist[1:]))


def test_zeta_inverse_and_represent(capsys, H):
    code, out, _ = run(capsys, "zeta-inverse", "--structures", "i;j")
    d = json.loads(out)
    assert d["k"] == 2 and d["kernel_dim"] == 0 and d["slice_solution"]
    assert max(d["mp_residuals"]) < 1e-10
    # q on C_i and C_j: the value i resp. j; the target k must give k
    code, out, _ = run(capsys, "represent", "--structures", "i;j", "--values", "i;j", "--target", "k")
    d = json.loads(out)
    assert code == 0 and d["target_in_kernel_cone"]
    assert np.allclose(d["value"], H.element("k"))


def test_polydisc_and_psi_phi(capsys):
    code, out, _ = run(capsys, "polydisc", "--center", "0.5i", "--radius", "1", "--count", "20")
    t = rows(out)
    assert code == 0 and t[0][-2:] == ["hyper_sigma", "sigma_ball"] and len(t) == 21
    code, out, _ = run(capsys, "psi-phi", "--structure", "j", "--start-re", "2", "--start-im", "0.5", "--n", "3")
    t = rows(out)
    assert t[1][3] == "ok" and float(t[1][4]) == pytest.approx(2.0)


def test_taylor_commands(capsys):
    code, out, _ = run(capsys, "taylor", "--function", 'poly:{"2": "1"}', "--center", "0", "--order", "3")
    assert code == 0 and json.loads(out)
    code, out, _ = run(capsys, "taylor-eval", "--function", 'poly:{"2": "1"}', "--center", "0", "--order", "3",
                       "--point", "0.2+0.1i", "--sweep")
    t = rows(out)
    assert t[0][0] == "order" and t[0][-2:] == ["tail", "error"]
    assert float(t[-1][-1]) < 1e-10


def test_check_exits_zero(capsys):
    code, out, _ = run(capsys, "check", "--seed", "7")
    t = rows(out)
    assert code == 0 and all(r[1] == "pass" for r in t[1:])


@pytest.mark.parametrize("name", ["complex", "octonion", "clifford:3"])
def test_run_checks_other_algebras(name):
    bad = [r.name for r in run_checks(name, seed=3) if not r.passed]
    assert not bad


@pytest.mark.parametrize("argv,code", [
    (["sigma-dist", "--p", "i"], 22),
    (["sigma-dist", "--p", "zz", "--q", "i"], 22),
    (["sigma-dist", "--algebra", "sedenion", "--p", "i", "--q", "j"], 10),
    (["witness", "tau-sigma", "--algebra", "complex"], 22),
])
def test_errors_are_json_on_stderr(capsys, argv, code):
    got, out, err = run(capsys, *argv)
    assert got == code and out == ""
    d = json.loads(err)
    assert d["exit_status"] == code and d["error"] and d["message"]


def test_output_is_deterministic(capsys, monkeypatch, tmp_path):
    argv = ["polydisc", "--center", "0.5i", "--radius", "1", "--count", "40", "--seed", "11"]
    first = run(capsys, *argv)[1]
    monkeypatch.setenv("SLICECALC_THREADS", "4")
    assert run(capsys, *argv)[1] == first
    target = tmp_path / "out.csv"
    assert run(capsys, *argv, "--out", str(target))[0] == 0
    assert target.read_text() == first
