import json

import pytest

from macrofacet.cli import main, write_atomic


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    diags = [json.loads(line) for line in err.splitlines() if line.startswith("{")]
    return code, out, diags


@pytest.fixture
def compiled(fixture_dir, tmp_path, capsys):
    paths = {}
    for name in ("writing_assistant", "networking"):
        out = tmp_path / f"{name}.compiled.json"
        code, _, _ = run(capsys, "compile", "--in", fixture_dir / name / "chronicle.json",
                         "--out", out)
        assert code == 0
        paths[name] = out
    return paths


def test_compile_networking(compiled, capsys, fixture_dir):
    data = json.loads(compiled["networking"].read_text())
    members = [m["members"] for m in data["macro_facets"]]
    assert members == [["f1", "f4"], ["f2"], ["f3", "f7"], ["f5"], ["f6"]]
    assert data["condensation_edges"] == [["scc:f2", "scc:f6"], ["scc:f5", "scc:f1"]]
    code, out, _ = run(capsys, "compile", "--in", fixture_dir / "networking" / "chronicle.json")
    assert code == 0 and "macro-facets: 5" in out and "max closure: 3" in out


def test_compile_empty(tmp_path, capsys):
    src = tmp_path / "empty.json"
    src.write_text('{"facets": [], "edges": []}')
    out = tmp_path / "out.json"
    code, _, _ = run(capsys, "compile", "--in", src, "--out", out)
    assert code == 0
    assert json.loads(out.read_text())["macro_facets"] == []


def test_compile_dangling_edge(tmp_path, capsys):
    src = tmp_path / "bad.json"
    src.write_text('{"facets": [{"id": "a"}], "edges": [["a", "ghost"]]}')
    code, _, diags = run(capsys, "compile", "--in", src)
    assert code == 1
    assert diags[-1]["code"] == "UNKNOWN_ID" and diags[-1]["witness"] == "ghost"


def test_compile_schema_path(tmp_path, capsys):
    src = tmp_path / "bad.json"
    src.write_text('{"facets": [{"id": "a", "cost": "free"}]}')
    code, _, diags = run(capsys, "compile", "--in", src)
    assert code == 1 and diags[-1]["witness"] == "$.facets[0].cost"


def test_compile_zero_cost_warns(tmp_path, capsys):
    src = tmp_path / "z.json"
    src.write_text('{"facets": [{"id": "a", "cost": 0}]}')
    code, _, diags = run(capsys, "compile", "--in", src, "--quiet")
    assert code == 0 and diags[0]["severity"] == "warning"


def test_select_writing(compiled, fixture_dir, capsys, tmp_path):
    out = tmp_path / "sel.json"
    code, _, _ = run(capsys, "select", "--in", compiled["writing_assistant"],
                     "--constraints", fixture_dir / "writing_assistant" / "constraints.json",
                     "--utility", fixture_dir / "writing_assistant" / "utility.json",
                     "--out", out, "--trace")
    assert code == 0
    result = json.loads(out.read_text())
    assert result["chosen"] == ["scc:m4", "scc:m1", "scc:m5"]
    assert result["trace"]["stop_reason"] == "candidates-exhausted"
    assert result["trace"]["iterations"][2]["violated"] == "A1"


def test_select_lazy_scripted(compiled, fixture_dir, capsys):
    code, out, _ = run(capsys, "select", "--algo", "lazy", "--in", compiled["writing_assistant"],
                       "--constraints", fixture_dir / "writing_assistant" / "constraints.json",
                       "--utility", fixture_dir / "writing_assistant" / "utility.json")
    assert code == 0 and json.loads(out)["chosen"] == ["scc:m4", "scc:m1", "scc:m5"]


def test_select_networking(compiled, fixture_dir, capsys):
    code, out, _ = run(capsys, "select", "--in", compiled["networking"],
                       "--constraints", fixture_dir / "networking" / "constraints.json",
                       "--utility", fixture_dir / "networking" / "utility.json")
    result = json.loads(out)
    assert code == 0
    assert result["chosen"] == ["scc:f1", "scc:f3", "scc:f5"]
    assert result["trace"]["stop_reason"] == "no-positive-gain"
    assert result["expansion"] == ["f1", "f3", "f4", "f5", "f7"]


def test_select_compare_and_optimal(compiled, fixture_dir, capsys):
    args = ["--in", compiled["networking"],
            "--constraints", fixture_dir / "networking" / "constraints.json",
            "--utility", fixture_dir / "networking" / "utility_modular.json"]
    code, out, _ = run(capsys, "select", "--compare", *args)
    payload = json.loads(out)
    assert code == 0 and 0.5 <= payload["ratio"] <= 1.0
    code, out, _ = run(capsys, "optimal", *args)
    assert code == 0 and json.loads(out)["value"] == payload["optimal"]["value"]


def test_compare_on_14_macro_instance(tmp_path, capsys):
    ids = [f"f{i:02d}" for i in range(14)]
    (tmp_path / "c.json").write_text(json.dumps({"facets": [{"id": i} for i in ids]}))
    run(capsys, "compile", "--in", tmp_path / "c.json", "--out", tmp_path / "m.json")
    (tmp_path / "q.json").write_text(json.dumps({"constraints": [
        {"members": [f"scc:{i}" for i in ids[:7]], "quota": 2},
        {"members": [f"scc:{i}" for i in ids[7:]], "quota": 3},
        {"members": [f"scc:{i}" for i in ids], "quota": 4}]}))
    covers = {f"scc:{i}": [(k * 7 + j) % 30 for j in range(6)] for k, i in enumerate(ids)}
    (tmp_path / "u.json").write_text(json.dumps(
        {"kind": "coverage", "universe": 30, "weights": [1 + (j % 5) / 4 for j in range(30)],
         "covers": covers}))
    code, out, _ = run(capsys, "select", "--compare", "--in", tmp_path / "m.json",
                       "--constraints", tmp_path / "q.json", "--utility", tmp_path / "u.json")
    assert code == 0 and 0.5 <= json.loads(out)["ratio"] <= 1.0


def test_verify_writing_passes(compiled, fixture_dir, capsys):
    code, out, _ = run(capsys, "verify", "--in", compiled["writing_assistant"],
                       "--constraints", fixture_dir / "writing_assistant" / "constraints.json",
                       "--utility", fixture_dir / "writing_assistant" / "utility.json")
    report = json.loads(out)
    assert code == 0
    assert report["laminar"]["passed"] and report["matroid"]["passed"]


def test_verify_printed_networking_fails(compiled, fixture_dir, capsys):
    code, out, diags = run(capsys, "verify", "--in", compiled["networking"], "--constraints",
                           fixture_dir / "networking" / "constraints_as_printed.json")
    assert code == 1
    assert diags[-1]["code"] == "LAMINARITY_VIOLATION"
    assert sorted(diags[-1]["witness"]) == ["A2", "A3"]


def test_verify_modular_passes(compiled, fixture_dir, capsys):
    code, out, _ = run(capsys, "verify", "--in", compiled["networking"],
                       "--constraints", fixture_dir / "networking" / "constraints.json",
                       "--utility", fixture_dir / "networking" / "utility_modular.json")
    assert code == 0 and json.loads(out)["utility"]["mode"] == "exhaustive"


def test_verify_supermodular_fails(compiled, fixture_dir, capsys, tmp_path):
    u = tmp_path / "sq.json"
    u.write_text('{"kind": "cardinality", "exponent": 2}')
    code, out, diags = run(capsys, "verify", "--in", compiled["networking"],
                           "--constraints", fixture_dir / "networking" / "constraints.json",
                           "--utility", u)
    assert code == 1 and diags[-1]["code"] == "SUBMODULARITY_VIOLATION"
    assert json.loads(out)["utility"]["property"] == "submodular"


def test_select_limit_exit_code(tmp_path, capsys):
    ids = [f"f{i:02d}" for i in range(21)]
    (tmp_path / "c.json").write_text(json.dumps({"facets": [{"id": i} for i in ids]}))
    run(capsys, "compile", "--in", tmp_path / "c.json", "--out", tmp_path / "m.json")
    (tmp_path / "q.json").write_text('{"constraints": []}')
    (tmp_path / "u.json").write_text(json.dumps({"kind": "modular",
                                                 "weights": {i: 1 for i in ids}}))
    code, _, diags = run(capsys, "optimal", "--in", tmp_path / "m.json",
                         "--constraints", tmp_path / "q.json", "--utility", tmp_path / "u.json")
    assert code == 2 and diags[-1]["code"] == "LIMIT_EXCEEDED"


def test_invariant_breach_exit_code(compiled, fixture_dir, capsys, monkeypatch):
    import macrofacet.cli as cli
    from macrofacet.errors import InvariantError

    def broken(*a, **k):
        raise InvariantError("greedy value exceeds optimal value")

    monkeypatch.setattr(cli, "approximation_ratio", broken)
    code, _, diags = run(capsys, "select", "--compare", "--in", compiled["networking"],
                         "--constraints", fixture_dir / "networking" / "constraints.json",
                         "--utility", fixture_dir / "networking" / "utility_modular.json")
    assert code == 3 and diags[-1]["code"] == "INVARIANT_BREACH"


def test_bad_json(tmp_path, capsys):
    src = tmp_path / "x.json"
    src.write_text("{nope")
    code, _, diags = run(capsys, "compile", "--in", src)
    assert code == 1 and diags[-1]["code"] == "SCHEMA_ERROR"


def test_simulate_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        code, out, _ = run(capsys, "simulate", "--trials", 20, "--seed", 4, "--out-dir", tmp_path / d)
        assert code == 0 and "mean:" in out
    for name in ("trials.csv", "report.json", "histogram.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    header = (tmp_path / "a" / "trials.csv").read_text().splitlines()[0]
    assert header == "trial,greedy,optimal,ratio,seed"


def test_simulate_out_dir_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MACROFACET_OUT_DIR", str(tmp_path / "env"))
    code, _, _ = run(capsys, "simulate", "--trials", 2, "--quiet")
    assert code == 0 and (tmp_path / "env" / "report.json").exists()


def test_round_trip_compile_output_feeds_select(compiled):
    from macrofacet.chronicle import mset_from_json, mset_to_json
    data = json.loads(compiled["networking"].read_text())
    assert mset_to_json(mset_from_json(data)) == data


def test_atomic_write_leaves_no_partial(tmp_path):
    target = tmp_path / "out.json"
    target.write_text("old")

    with pytest.raises(TypeError):
        write_atomic(target, 12345)  # not text: write fails before the rename
    assert target.read_text() == "old"
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]
