import csv
import io
import json

import numpy as np
import pytest

from conformal_obstruction import report as rp
from conformal_obstruction.cli import INPUT_ERROR, NUMERICAL_FAILURE, PASS, VIOLATION, main, parse_args
from conformal_obstruction.dirac1d import Domain1D
from conformal_obstruction.mesh.trimesh import icosphere, torus, write_obj
from conformal_obstruction.profiles import ProfileError, parse_profile

# profiles ------------------------------------------------------------------------


@pytest.mark.parametrize(
    "spec,s,value",
    [
        ("1+0.5*sin", np.pi / 2, 1.5),
        ("2-0.3*cos3", 0.0, 1.7),
        ("1+t", 0.25, 1.25),
        ("-2.5", 7.0, -2.5),
        ("sin:0,1,2", np.pi / 4, 1.0),
        ("expcos:0,1", 0.0, np.e),
        ("trig:1,1,1", np.pi / 2, 1.0),
        ("quad:1,2,3", 1.0, 6.0),
    ],
)
def test_profile_values(spec, s, value):
    assert parse_profile(spec)(s) == pytest.approx(value)


@pytest.mark.parametrize("spec", ["sin:0,1", "expcos:0.2,0.5", "trig:1,0.3,0.2", "quad:1,0.5,-0.3"])
def test_profile_derivatives(spec):
    prof = parse_profile(spec)
    s, h = np.linspace(0.1, 0.9, 7), 1e-6
    assert np.allclose(prof.derivative(s), (prof(s + h) - prof(s - h)) / (2 * h), atol=1e-8)


@pytest.mark.parametrize("spec", ["nope:1", "sin:1", "1+tan", "1+t2", "const:a"])
def test_profile_errors(spec):
    with pytest.raises(ProfileError):
        parse_profile(spec)


def test_nonperiodic_profile_refused_on_circle():
    with pytest.raises(ProfileError):
        parse_profile("1+t").bind(Domain1D.circle(2 * np.pi, 64))


def test_circle_binding_uses_angle():
    f, df = parse_profile("sin:0,1").bind(Domain1D.circle(4.0, 64))
    assert f(1.0) == pytest.approx(1.0)
    assert df(0.0) == pytest.approx(2 * np.pi / 4.0)


# report format -------------------------------------------------------------------


def test_report_fields_and_cleaning():
    rep = rp.make_report("x", {"a": 1}, {"t": np.float64(2.0), "bad": np.inf, "arr": np.arange(2)}, 0.0, 0.0, 1e-8,
                         np.bool_(True), timestamp="T")
    assert rep["schema"] == rp.SCHEMA and rep["pass"] is True
    assert rep["terms"] == {"t": 2.0, "bad": "inf", "arr": [0, 1]}
    assert json.loads(rp.dumps(rep)) == rep


def test_csv_projection():
    rows = [rp.make_report("x", {"n": i}, {"v": i * 0.5}, 0.0, 0.0, 1.0, True, timestamp="T") for i in range(3)]
    parsed = list(csv.DictReader(io.StringIO(rp.to_csv(rows))))
    assert [r["params.n"] for r in parsed] == ["0", "1", "2"]
    assert "conventions.dirac_1d" in parsed[0]


def test_identity_report_relative():
    assert rp.IdentityReport("c", {}, 0.0, 0.0).relative == 0.0
    assert rp.IdentityReport("c", {}, 1e-3, 2.0).relative == 5e-4


# CLI -----------------------------------------------------------------------------


def run(argv, tmp_path):
    out = tmp_path / "r.json"
    code = main(argv + ["--json", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_verify_sphere(tmp_path):
    code, rep = run(["verify-sphere", "--family", "revolution:0.3", "--mobius", "0.2,0", "--field", "grad-x3,rot-x1"],
                    tmp_path)
    assert code == PASS and rep["pass"]
    assert set(rep["terms"]) == {"grad-x3", "rot-x1"}


def test_verify_sphere_underresolved_is_violation(tmp_path):
    code, rep = run(["verify-sphere", "--family", "revolution:0.3", "--mobius", "0.2,0", "--degree", "8"], tmp_path)
    assert code == VIOLATION and not rep["pass"]


def test_inadmissible_family_is_input_error(tmp_path):
    assert run(["verify-sphere", "--family", "revolution:0.6"], tmp_path)[0] == INPUT_ERROR
    assert run(["verify-sphere", "--family", "blob:1"], tmp_path)[0] == INPUT_ERROR


def test_verify_mesh_torus_rejected(tmp_path):
    path = tmp_path / "torus.obj"
    write_obj(torus(), path)
    assert run(["verify-mesh", "--input", str(path)], tmp_path)[0] == INPUT_ERROR


def test_verify_mesh_family_and_vertex_dump(tmp_path):
    vcsv = tmp_path / "v.csv"
    code, rep = run(["verify-mesh", "--family", "revolution:0.3", "--subdivision", "4", "--vertex-csv", str(vcsv)],
                    tmp_path)
    assert code == PASS
    rows = list(csv.DictReader(vcsv.open()))
    assert len(rows) == rep["discretization"]["vertices"] == 2562
    assert list(rows[0]) == ["vertex_index", "x", "y", "z", "H"]


def test_verify_mesh_obj_through_flow(tmp_path):
    path = tmp_path / "s.obj"
    write_obj(icosphere(3, radius=1.5), path)
    code, rep = run(["verify-mesh", "--input", str(path)], tmp_path)
    assert code == PASS
    assert rep["discretization"]["parametrization"] == "cmcf"


def test_verify_mesh_needs_source(tmp_path):
    assert run(["verify-mesh"], tmp_path)[0] == INPUT_ERROR


def test_flow_failure_is_numerical(tmp_path):
    s = icosphere(2)
    x = s.vertices
    path = tmp_path / "p.obj"
    write_obj(s.with_vertices(x * (1 + 0.2 * x[:, [0]] * x[:, [1]])), path)
    assert run(["verify-mesh", "--input", str(path), "--steps", "1", "--dt", "1e-4"], tmp_path)[0] == NUMERICAL_FAILURE


def test_verify_dirac(tmp_path):
    code, rep = run(["verify-dirac1d", "--spin", "antiperiodic", "--p", "4", "--green-pairs", "5"], tmp_path)
    assert code == PASS
    assert rep["terms"]["green_max"] <= 1e-10
    code, rep = run(["verify-dirac1d", "--domain", "interval:0,1", "--H", "const:2", "--X", "1+t"], tmp_path)
    assert code == PASS and rep["discretization"]["method"] == "fd4"


def test_dirac_inputs(tmp_path):
    assert run(["verify-dirac1d", "--H", "sin:0,1", "--spin", "antiperiodic"], tmp_path)[0] == INPUT_ERROR
    assert run(["verify-dirac1d", "--N", "15"], tmp_path)[0] == INPUT_ERROR


def test_verify_pohozaev(tmp_path):
    code, rep = run(["verify-pohozaev"], tmp_path)
    assert code == PASS and rep["terms"]["R"] == pytest.approx(6.8968486, abs=1e-6)
    code, rep = run(["verify-pohozaev", "--p", "7"], tmp_path)
    assert code == PASS and rep["terms"]["first_zero"] is None
    assert "evidence" in rep["extra"]["note"]


def test_pohozaev_small_rmax_is_numerical(tmp_path):
    assert run(["verify-pohozaev", "--rmax", "2"], tmp_path)[0] == NUMERICAL_FAILURE


def test_certify_exit_codes(tmp_path):
    code, rep = run(["certify", "--H", "x3-plus-c:5", "--degree", "32"], tmp_path)
    assert code == VIOLATION and rep["terms"]["kind"] == "certificate"
    assert rep["terms"]["recheck"]["degree"] == 64
    code, rep = run(["certify", "--H", "x3-squared", "--degree", "32"], tmp_path)
    assert code == PASS and rep["terms"]["kind"] == "none-found"


def test_report_determinism(tmp_path):
    argv = ["verify-dirac1d", "--green-pairs", "3", "--seed", "4"]
    _, a = run(argv, tmp_path)
    _, b = run(argv, tmp_path)
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b


def test_stdout_default(capsys):
    assert main(["verify-pohozaev", "--alpha", "2"]) == PASS
    rep = json.loads(capsys.readouterr().out)
    assert rep["check"] == "verify-pohozaev"


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('seed = 9\n[verify-pohozaev]\nalpha = 2.0\np = 5.0\n')
    args = parse_args(["verify-pohozaev", "--config", str(cfg), "--p", "4"])
    assert (args.alpha, args.p, args.seed) == (2.0, 4.0, 9)
    bad = tmp_path / "bad.toml"
    bad.write_text("[verify-pohozaev]\nbogus = 1\n")
    assert main(["verify-pohozaev", "--config", str(bad)]) == INPUT_ERROR
    assert main(["verify-pohozaev", "--config", str(tmp_path / "missing.toml")]) == INPUT_ERROR


def test_csv_output(tmp_path):
    path = tmp_path / "r.csv"
    code, _ = run(["verify-pohozaev", "--csv", str(path)], tmp_path)
    rows = list(csv.DictReader(path.open()))
    assert code == PASS and len(rows) == 1 and rows[0]["pass"] == "True"


@pytest.mark.parametrize(
    "kind,extra,key",
    [
        ("dirac", [], "decay_ok"),
        ("mesh", ["--values", "3,4,5"], "contraction_ok"),
        ("sphere", ["--values", "96,128"], None),
        ("pohozaev", ["--values", "0.1,0.05"], None),
    ],
)
def test_sweeps(tmp_path, kind, extra, key):
    path = tmp_path / "s.csv"
    code, rep = run(["sweep", "--kind", kind, "--csv", str(path)] + extra, tmp_path)
    assert code == PASS
    assert len(list(csv.DictReader(path.open()))) == len(rep["terms"]["cells"])
    if key:
        assert rep["terms"][key] is True


def test_usage_error():
    assert main(["frobnicate"]) == INPUT_ERROR
