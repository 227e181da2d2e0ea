import json

from cubicinv.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_spec(tmp_path, d, factors=None, name="spec.json"):
    doc = {"d": list(d)}
    if factors is not None:
        doc["factors"] = factors
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_build_matches_golden(capsys, tmp_path, golden_dir):
    code, out, _ = run(capsys, "build", write_spec(tmp_path, (2, 1, 1)))
    assert code == 0
    assert out == (golden_dir / "spec211_F.txt").read_text()
    code, out, _ = run(capsys, "build", write_spec(tmp_path, (1, 1, 1)))
    assert code == 0 and out.splitlines()[1] == "6 x1^1 x2^1 x3^1"


def test_build_rejects_bad_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"d": [1, 1')
    code, _, err = run(capsys, "build", str(bad))
    assert code == 2 and "line 1" in err
    code, _, err = run(capsys, "build", str(tmp_path / "missing.json"))
    assert code == 2


def test_invariants_hesse(capsys):
    code, out, _ = run(capsys, "invariants", "--hesse")
    rep = json.loads(out)
    assert code == 0 and rep["nondegenerate"]
    assert rep["S"] == "lam^4 - lam"


def test_invariants_flat_and_degenerate(capsys, caplog):
    code, out, _ = run(capsys, "invariants", "--expr", "6*x1*x2*x3")
    assert json.loads(out)["S"] == "1"
    code, out, _ = run(capsys, "invariants", "--expr", "x1^3")
    rep = json.loads(out)
    assert code == 0 and not rep["nondegenerate"] and rep["warnings"]
    assert "degenerate" in caplog.text


def test_invariants_from_spec_file(capsys, tmp_path):
    code, out, _ = run(capsys, "invariants", write_spec(tmp_path, (2, 1, 1)))
    assert code == 0
    assert json.loads(out)["S"] == "a1^4"


def test_verify_identities(capsys):
    code, out, _ = run(capsys, "verify", "identities", "--count", "10", "--seed", "3")
    rep = json.loads(out)
    assert code == 0 and rep["n_cubics"] == 10 and rep["violations"] == []


def test_verify_signs_and_positivity(capsys):
    code, out, _ = run(capsys, "verify", "signs", "--d", "2,2,2")
    assert code == 0
    code, out, _ = run(capsys, "verify", "positivity", "--d", "2,2,2")
    rep = json.loads(out)
    assert code == 0 and rep["min"]["value"] == 1 and rep["runtime_seconds"] is None
    code, out, _ = run(capsys, "verify", "bound", "--d", "2,1,1")
    assert code == 0


def test_long_gate(capsys):
    code, _, err = run(capsys, "verify", "positivity", "--d", "4,4,4")
    assert code == 2 and "--long" in err


def test_bad_arguments(capsys):
    assert run(capsys, "verify", "positivity", "--d", "2,2")[0] == 2
    assert run(capsys, "coeff", "--matrix", "3,0;1,3")[0] == 2
    assert run(capsys, "curvature", "at", "--hesse")[0] == 2  # lam unassigned
    assert run(capsys, "nonsense")[0] == 2


def test_coeff(capsys):
    code, out, _ = run(capsys, "coeff", "--matrix", "3,0,1;1,3,0;0,1,3", "--replicate", "4")
    rep = json.loads(out)
    assert code == 0 and rep["coefficient"] == 652 and rep["spec"] == [5, 5, 5]
    code, out, _ = run(capsys, "coeff", "--matrix", "2,2,1,1,1,1;1,1,2,2,1,1;1,1,1,1,2,2",
                       "--cross-check")
    rep = json.loads(out)
    assert code == 0 and rep["coefficient"] == 356 and rep["cross_check"]["agree"]


def test_curvature_at(capsys):
    code, out, _ = run(capsys, "curvature", "at", "--expr", "6*x1*x2*x3", "--x", "1,2,1/3")
    rep = json.loads(out)
    assert code == 0 and rep["level_set_curvature"] == "0" and rep["in_index_cone"]
    code, out, _ = run(capsys, "curvature", "at", "--hesse", "--assign", "lam=2", "--x", "1,1,1")
    assert code == 0 and "ricci" in json.loads(out)


def test_curvature_scan_csv(capsys):
    code, out, _ = run(capsys, "curvature", "scan", "--expr", "6*x1*x2*x3",
                       "--resolution", "2", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 9 and "level_set_curvature" in lines[0]


def test_appendix(capsys):
    code, out, _ = run(capsys, "appendix", "--closed-form", "4")
    assert code == 0 and json.loads(out)["closed_form"] == 6363107150400
    code, out, _ = run(capsys, "appendix", "--s", "4")
    rep = json.loads(out)
    assert [rep[f"A{i}"] for i in range(1, 7)] == [5804, -3048, 2352, -4552, -2256, 2352]
    assert rep["A"] == 652
    code, out, _ = run(capsys, "appendix", "--range", "1", "3", "--format", "csv")
    assert code == 0 and len(out.strip().splitlines()) == 4


def test_reports_are_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["verify", "positivity", "--d", "3,2,1", "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    capsys.readouterr()


def test_run_log(capsys, tmp_path):
    log = tmp_path / "runs.jsonl"
    ck = tmp_path / "ck"
    for _ in range(2):
        main(["verify", "positivity", "--d", "2,2,2", "--checkpoint", str(ck),
              "--run-log", str(log)])
    capsys.readouterr()
    records = [json.loads(line) for line in log.read_text().splitlines()]
    assert len(records) == 2
    assert records[0]["digest"] == records[1]["digest"]
    assert records[0]["config"]["subcommand"] == "verify positivity"
    assert records[0]["checkpoint_lineage"]


def test_workers_environment(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("CUBICINV_WORKERS", "2")
    out = tmp_path / "w.json"
    assert main(["verify", "positivity", "--d", "3,2,1", "-o", str(out)]) == 0
    monkeypatch.delenv("CUBICINV_WORKERS")
    ref = tmp_path / "r.json"
    assert main(["verify", "positivity", "--d", "3,2,1", "-o", str(ref)]) == 0
    assert out.read_bytes() == ref.read_bytes()
