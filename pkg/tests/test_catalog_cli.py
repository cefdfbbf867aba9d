"""Catalog entries, file formats, the suite runner and the command line."""
import json

import numpy as np
import pytest

from riemcompat.catalog import catalog, names, random_field, random_metric
from riemcompat.cli import EXIT_DOMAIN, EXIT_FAIL, EXIT_INPUT, EXIT_OK, main
from riemcompat.curvature import CurvaturePack
from riemcompat.errors import InputError, UnknownCatalogEntry
from riemcompat.files import dump, field_from_dict, field_to_dict, load_metric, metric_from_dict, metric_to_dict
from riemcompat.suite import SKIPPED, run_suite


def _write(path, obj):
    path.write_text(dump(obj))
    return str(path)


# -- catalog ---------------------------------------------------------------------------

def test_names_cover_metrics_and_fixtures():
    got = set(names())
    assert {"flat", "two_sphere", "schwarzschild", "frw", "qcc_point", "gnomonic_pair"} <= got


def test_unknown_entry():
    with pytest.raises(UnknownCatalogEntry):
        catalog("klein_bottle")


def test_flat_is_identity():
    m = catalog("flat", n=4)
    pack = CurvaturePack(m, [0.1, 0.2, 0.3, 0.4], 2)
    assert np.array_equal(pack.g.values, np.eye(4))


def test_two_sphere_scalar_curvature():
    """n(n - 1)/r^2 with n = 2, r = 2."""
    m = catalog("two_sphere", r=2)
    pack = CurvaturePack(m, [1.0, 0.4], 2)
    assert abs(abs(float(pack.scalar.values)) - 0.5) <= 1e-12


def test_fixtures_ship_expectations():
    for name in ("gnomonic_pair", "sinyukov", "genweyl", "quasi_codazzi", "qcc_point", "weyl_compatible_point"):
        fx = catalog(name)
        assert fx.expected, name


# -- files -------------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["two_sphere", "schwarzschild", "frw", "polar_plane"])
def test_metric_round_trip(name):
    m = catalog(name)
    back = metric_from_dict(json.loads(dump(metric_to_dict(m))))
    p = [0.5 * (lo + hi) for lo, hi in m.domain]
    assert np.array_equal(CurvaturePack(back, p, 2).riemann.values, CurvaturePack(m, p, 2).riemann.values)
    assert metric_to_dict(back) == metric_to_dict(m)


def test_field_round_trip(metric3):
    f = random_field(metric3, 3)
    back = field_from_dict(json.loads(dump(field_to_dict(f))))
    assert field_to_dict(back) == field_to_dict(f)


def test_metric_file_errors():
    with pytest.raises(InputError):
        metric_from_dict({"coordinates": ["x"]})
    with pytest.raises(InputError):
        metric_from_dict({"coordinates": ["x"], "components": {"h_0_0": "1"}})
    with pytest.raises(InputError):
        metric_from_dict({"coordinates": ["x"], "components": {"g_0_0": "1"}, "colour": "red"})
    with pytest.raises(InputError):
        metric_from_dict({"dimension": 2, "coordinates": ["x"], "components": {"g_0_0": "1"}})


# -- suite runner --------------------------------------------------------------------------

def test_flat_all_suites_pass():
    rep = run_suite(catalog("flat", n=4), "all", 10, 42)
    assert rep.ok
    for c in rep.by_id().values():
        if c.check_id.startswith("bianchi") and c.status != SKIPPED:
            assert c.max_scaled_residual == 0.0
    for c in rep.checks:
        assert c.anchor
        if c.status == SKIPPED:
            assert c.reason


def test_random_n3_bianchi_and_compat():
    rep = run_suite(random_metric(3, 7), ("bianchi", "compat"), 10, 7)
    by = rep.by_id()
    assert by["compat.low_dim_theorem"].status == "pass"
    for cid in ("compat.CCCcomp", "compat.VeblenC", "compat.lovelock", "bianchi.contracted"):
        assert by[cid].status == "pass", cid
    assert by["compat.RC"].status == SKIPPED


def test_schwarzschild_gr():
    rep = run_suite(catalog("schwarzschild"), ("gr",), 5, 1)
    by = rep.by_id()
    for cid in ("gr.einstein_trace", "gr.H_static", "gr.divC_matter", "gr.bianchi_like"):
        assert by[cid].status == "pass", cid
    assert rep.ok


def test_compatible_field_passes_rc():
    fx = catalog("sinyukov")
    rep = run_suite(fx.metric, ("compat",), 5, 3, fields={"b": fx.fields["b"]})
    assert rep.by_id()["compat.RC"].status == "pass"


def test_random_field_fails_rc(metric3):
    """A random symmetric field is not Riemann-compatible: a negative control."""
    rep = run_suite(metric3, ("compat",), 3, 3, fields={"b": random_field(metric3, 9)})
    rc = rep.by_id()["compat.RC"]
    assert rc.status == "fail" and rc.max_scaled_residual >= 1e-3


def test_unknown_suite():
    with pytest.raises(InputError):
        run_suite(catalog("flat"), ("bianchi", "astrology"), 2, 0)


def test_report_is_deterministic(metric3):
    a = run_suite(metric3, ("bianchi", "decomp"), 4, 5).to_json()
    b = run_suite(metric3, ("bianchi", "decomp"), 4, 5).to_json()
    assert a == b
    assert run_suite(metric3, ("bianchi", "decomp"), 4, 6).to_json() != a


def test_threads_do_not_change_report(metric3, monkeypatch):
    a = run_suite(metric3, ("compat",), 4, 2).to_json()
    monkeypatch.setenv("THREADS", "3")
    assert run_suite(metric3, ("compat",), 4, 2).to_json() == a


# -- command line -----------------------------------------------------------------------------

def test_cli_emit_and_check(tmp_path, capsys):
    path = tmp_path / "sphere.json"
    assert main(["catalog", "emit", "two_sphere", "-o", str(path)]) == EXIT_OK
    out = tmp_path / "r.json"
    assert main(["check", str(path), "--suite", "bianchi,compat", "--points", "4", "--json", str(out), "--quiet"]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["metric"] == "two_sphere"
    assert all(c["anchor"] for c in report["checks"])


def test_cli_report_bytes_identical(tmp_path):
    path = tmp_path / "m.json"
    _write(path, metric_to_dict(random_metric(3, 4)))
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert main(["check", str(path), "--suite", "compat", "--seed", "9", "--points", "3",
                     "--json", str(out), "--quiet"]) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    anchors = {c["anchor"] for c in json.loads(outs[0])["checks"]}
    assert {"RC", "CCCcomp", "VeblenC", "lovelock"} <= anchors


def test_cli_floats_carry_17_digits(tmp_path):
    path = tmp_path / "m.json"
    _write(path, metric_to_dict(random_metric(3, 4)))
    out = tmp_path / "r.json"
    main(["check", str(path), "--suite", "compat", "--points", "2", "--json", str(out), "--quiet"])
    report = json.loads(out.read_text())
    for c in report["checks"]:
        v = c["max_scaled_residual"]
        if v:
            assert float(repr(v)) == v


def test_cli_exit_failure(tmp_path):
    path = tmp_path / "m.json"
    _write(path, metric_to_dict(random_metric(3, 4)))
    assert main(["check", str(path), "--suite", "compat", "--tol", "1e-300", "--points", "2", "--quiet"]) == EXIT_FAIL


def test_cli_exit_input_errors(tmp_path, capsys):
    assert main(["check", str(tmp_path / "missing.json")]) == EXIT_INPUT
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["check", str(bad)]) == EXIT_INPUT
    good = tmp_path / "flat.json"
    main(["catalog", "emit", "flat", "-o", str(good)])
    assert main(["check", str(good), "--suite", "astrology"]) == EXIT_INPUT
    assert main(["tensors", str(good), "--at", "0.1,0.2"]) == EXIT_INPUT
    assert main(["tensors", str(good), "--at", "0.1,0.2,0.3,0.4", "--what", "torsion"]) == EXIT_INPUT
    assert main(["catalog", "emit", "klein_bottle"]) == EXIT_INPUT
    assert main(["catalog", "emit", "flat", "--param", "n"]) == EXIT_INPUT


def test_cli_exit_domain_error(tmp_path):
    path = tmp_path / "log.json"
    _write(path, {"name": "logline", "coordinates": ["x", "y"], "signature": [1, 1],
                  "components": {"g_0_0": "1", "g_1_1": "log(x)"}, "domain": [[-2.0, -1.0], [0.0, 1.0]]})
    assert main(["check", str(path), "--suite", "bianchi", "--points", "2", "--quiet"]) == EXIT_DOMAIN


def test_cli_tensors_output(tmp_path, capsys):
    path = tmp_path / "sphere.json"
    main(["catalog", "emit", "two_sphere", "-o", str(path)])
    capsys.readouterr()
    assert main(["tensors", str(path), "--at", "1.0,0.3", "--what", "scalar,ricci"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("R = ")
    assert float(lines[0].split("=")[1]) == pytest.approx(2.0, rel=1e-12)
    assert any(line.startswith("R_kl[0,0]") for line in lines)


def test_cli_gnomonic_pair(tmp_path, capsys):
    metric = tmp_path / "pair.json"
    fields = tmp_path / "fields"
    assert main(["catalog", "emit", "gnomonic_pair", "-o", str(metric), "--fields-dir", str(fields)]) == EXIT_OK
    out = tmp_path / "r.json"
    argv = ["check", str(metric), "--suite", "geodesic", "--points", "5", "--json", str(out), "--quiet",
            "--field", str(fields / "X.json"), "--field", str(fields / "gbar.json")]
    assert main(argv) == EXIT_OK
    report = json.loads(out.read_text())
    statuses = {c["check_id"]: c["status"] for c in report["checks"]}
    assert statuses["geodesic.pair.geog"] == "pass"
    assert statuses["geodesic.pair.mapped_flatness"] == "pass"
    assert statuses["geodesic.pair.gbar_compat"] == "pass"


def test_cli_point_fixture_emits_data(capsys):
    assert main(["catalog", "emit", "qcc_point"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["name"] == "qcc_point"
    assert np.asarray(data["data"]["riemann_lower"]).shape == (4, 4, 4, 4)


def test_cli_list(capsys):
    assert main(["catalog", "list"]) == EXIT_OK
    assert capsys.readouterr().out.split() == names()
