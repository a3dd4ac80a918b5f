"""End-to-end CLI behavior: exit codes, JSON payloads, artifacts, determinism."""

import json
import os

import pytest

from boundcert import cli


def run(argv):
    return cli.main(argv)


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def test_scatlen_ok(write_potential, well4, tmp_path):
    pot = write_potential(well4)
    out = str(tmp_path / "scat.json")
    assert run(["scatlen", "--potential", pot, "--out", out]) == 0
    payload = read_json(out)
    assert payload["a"] == pytest.approx(-3.4788986158592223, rel=1e-6)
    assert payload["node_flag"] is False
    assert payload["minus_infinity"] is False
    assert payload["b"] < 0
    assert payload["c"] > 0
    assert len(payload["a_R_curve"]) >= 5
    assert payload["config"]["potential"].endswith("potential.json")
    assert "generated_at" in payload


def test_scatlen_stdout(write_potential, well_half, capsys):
    pot = write_potential(well_half)
    assert run(["scatlen", "--potential", pot]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["a"] < 0


def test_scatlen_node_case_maps_nan_to_null(write_potential, deep_well, tmp_path):
    pot = write_potential(deep_well)
    out = str(tmp_path / "deep.json")
    assert run(["scatlen", "--potential", pot, "--out", out]) == 0
    payload = read_json(out)
    assert payload["node_flag"] is True
    # the variational route is skipped once a node is found; nan becomes null
    assert payload["method_variational"] is None
    assert payload["discrepancy"] is None


def test_twobody_ok(write_potential, deep_well, tmp_path):
    pot = write_potential(deep_well)
    out = str(tmp_path / "e2.json")
    assert run(["twobody", "--potential", pot, "--out", out]) == 0
    payload = read_json(out)
    assert payload["bound_state"] is True
    assert payload["E2"] == pytest.approx(-3.1259150555310558, rel=1e-6)


def test_certify_ok(write_potential, well4, tmp_path, certificate_well4):
    pot = write_potential(well4)
    out = str(tmp_path / "cert.json")
    assert run(["certify", "--potential", pot, "--out", out]) == 0
    payload = read_json(out)
    cert = payload["certificate"]
    assert cert["N"] == certificate_well4.N
    assert cert["L"] == certificate_well4.L
    assert cert["B"] + cert["error_budget"] < 0
    assert cert["terms"]["main"] < 0


def test_certify_bound_state_exits_3(write_potential, deep_well, tmp_path):
    pot = write_potential(deep_well)
    out = str(tmp_path / "cert.json")
    assert run(["certify", "--potential", pot, "--out", out]) == 3
    payload = read_json(out)
    assert payload["certifiable"] is False
    assert payload["diagnostics"]["node_flag"] is True


def test_certify_positive_a_exits_3(write_potential, barrier2, tmp_path):
    pot = write_potential(barrier2)
    out = str(tmp_path / "cert.json")
    assert run(["certify", "--potential", pot, "--out", out]) == 3
    payload = read_json(out)
    assert payload["certifiable"] is False
    assert payload["diagnostics"]["a"] > 0


def test_certify_capped_schedule_exits_4(write_potential, well4, tmp_path):
    pot = write_potential(well4)
    out = str(tmp_path / "cert.json")
    assert run(["certify", "--potential", pot, "--out", out, "--l-max", "100"]) == 4
    payload = read_json(out)
    assert payload["certifiable"] is None
    assert payload["diagnostics"]["best_B"] > 0
    assert "sweep" not in payload["diagnostics"]


def test_validate_mc_small(write_potential, well4, tmp_path):
    pot = write_potential(well4)
    out = str(tmp_path / "mc.json")
    code = run(["validate-mc", "--potential", pot, "--out", out, "--samples", "4000"])
    assert code == 0
    payload = read_json(out)
    assert payload["passed"] is True
    assert len(payload["rows"]) == 12
    assert payload["config"]["samples"] == 4000


def test_report_writes_artifacts(write_potential, well4, tmp_path, capsys):
    pot = write_potential(well4)
    out_dir = str(tmp_path / "rep")
    assert run(["report", "--potential", pot, "--out", out_dir]) == 0
    listed = capsys.readouterr().out.strip().splitlines()
    expected = {"summary.txt", "a_r_curve.csv", "fig_a_r_curve.png", "b_sweep.csv", "fig_b_sweep.png"}
    assert {os.path.basename(p) for p in listed} == expected
    for p in listed:
        assert os.path.getsize(p) > 0
    with open(os.path.join(out_dir, "summary.txt")) as fh:
        text = fh.read()
    assert "certificate" in text.lower()


def test_report_positive_a_still_writes(write_potential, barrier2, tmp_path, capsys):
    pot = write_potential(barrier2)
    out_dir = str(tmp_path / "rep")
    assert run(["report", "--potential", pot, "--out", out_dir]) == 0
    listed = capsys.readouterr().out.strip().splitlines()
    names = {os.path.basename(p) for p in listed}
    assert "summary.txt" in names and "b_sweep.csv" not in names


def test_missing_potential_file(tmp_path):
    assert run(["scatlen", "--potential", str(tmp_path / "nope.json")]) == 1


def test_malformed_potential_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["scatlen", "--potential", str(bad)]) == 1


def test_unknown_kind_rejected(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "coulomb", "Z": 1}))
    assert run(["scatlen", "--potential", str(bad)]) == 1


def test_samples_below_batches(write_potential, well4):
    pot = write_potential(well4)
    assert run(["validate-mc", "--potential", pot, "--samples", "8"]) == 1


def test_route_disagreement_exits_2(write_potential, well4):
    pot = write_potential(well4)
    assert run(["scatlen", "--potential", pot, "--tol", "1e-15"]) == 2


def test_determinism_modulo_timestamp(write_potential, well4, tmp_path):
    pot = write_potential(well4)
    p1, p2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    for out in (p1, p2):
        assert run(["certify", "--potential", pot, "--out", out]) == 0

    def strip(path):
        return [ln for ln in open(path).read().splitlines() if "generated_at" not in ln]

    assert strip(p1) == strip(p2)


def test_parser_requires_subcommand():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args([])
