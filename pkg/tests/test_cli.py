import json

import pytest

from readopt.cli import main
from readopt.ga import FitnessContext
from readopt.lexicons import data_path
from readopt.metrics import MetricId
from readopt.moo import ObjectiveContext, brute_force_front
from readopt.synonyms import load_thesaurus, populate_slots, ThesaurusProvider
from readopt.textmodel import identify_candidates, tokenize

CORPUS = data_path("corpus")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_score_example_one(capsys):
    code, out, _ = run(capsys, "score", CORPUS / "01_science.txt")
    assert code == 0
    report = json.loads(out)
    assert report["schema_version"] == 1
    assert report["input_digest"].startswith("sha256:")
    assert set(report["scores"]) == {"dcrf", "smog", "ari", "flesch_printed", "fkgl_grade"}
    assert abs(report["scores"]["fkgl_grade"] - 14.06) <= 0.75
    assert "copies" in report["smog_note"]
    assert report["band"] == "red"


def test_score_example_five(capsys):
    code, out, _ = run(capsys, "score", CORPUS / "05_engineering.txt")
    assert code == 0
    assert abs(json.loads(out)["scores"]["ari"] - 14.43) <= 0.75


def test_score_empty_file(tmp_path, capsys):
    empty = tmp_path / "empty.txt"
    empty.write_text("   \n", encoding="utf-8")
    code, out, err = run(capsys, "score", empty)
    assert code == 2 and out == "" and "readopt:" in err


def test_missing_input(tmp_path, capsys):
    assert run(capsys, "score", tmp_path / "missing.txt")[0] == 2


def test_no_candidates_exit(tmp_path, capsys):
    path = tmp_path / "cat.txt"
    path.write_text("He is in it.", encoding="utf-8")
    code, _, err = run(capsys, "optimize", path, "--generations", "5")
    assert code == 3 and "nothing to optimize" in err


def test_provider_error_exit(tmp_path, capsys):
    code, _, _ = run(capsys, "optimize", CORPUS / "01_science.txt", "--thesaurus", tmp_path / "nope.tsv")
    assert code == 4
    code, _, _ = run(capsys, "optimize", CORPUS / "01_science.txt", "--provider", "knn",
                     "--embeddings", tmp_path / "nope.bin")
    assert code == 4


def test_optimize_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _, _ = run(capsys, "optimize", CORPUS / "01_science.txt", "--seed", 42, "-o", out)
    assert code == 0
    report = json.loads(out.read_text())
    scores = report["scores"]
    assert scores["raw_after"] < scores["raw_before"]
    assert report["params"]["seed"] == 42 and report["params"]["generations"] == 300
    assert report["params"]["parents"] == 10
    assert report["wmd_to_original"] is None
    # applying the listed replacements to the original reproduces the optimized text
    doc = tokenize(report["original_text"])
    surfaces = [t.surface for t in doc.tokens]
    for r in report["replacements"]:
        assert surfaces[r["token_index"]] == r["original"]
    lex_report = {r["token_index"]: r["substitute"] for r in report["replacements"]}
    rebuilt = []
    for k, (sep, tok) in enumerate(zip(doc.separators, doc.tokens)):
        rebuilt.append(sep + lex_report.get(k, tok.surface))
    assert "".join(rebuilt) + doc.separators[-1] == report["optimized_text"]


def test_optimize_deterministic(tmp_path, capsys):
    reports = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        args = ["optimize", CORPUS / "02_history.txt", "--seed", 7, "--generations", 60,
                "--embeddings", "bundled", "-o", path]
        assert run(capsys, *args)[0] == 0
        report = json.loads(path.read_text())
        assert report["wmd_to_original"] is not None
        report.pop("wall_time_ms")
        reports.append(json.dumps(report, sort_keys=True))
    assert reports[0] == reports[1]


def test_optimize_maximize_ari(capsys):
    code, out, _ = run(capsys, "optimize", CORPUS / "03_sports.txt", "--metric", "ari",
                       "--direction", "max", "--generations", 100)
    assert code == 0
    scores = json.loads(out)["scores"]
    assert scores["raw_after"] > scores["raw_before"]


def test_optimize_knn_provider(capsys):
    code, out, _ = run(capsys, "optimize", CORPUS / "04_geography.txt", "--provider", "knn",
                       "--generations", 20)
    assert code == 0
    assert json.loads(out)["params"]["provider"] == "knn"


def read_tsv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split("\t")
    return header, [dict(zip(header, line.split("\t"))) for line in lines[1:]]


def test_pareto_two_objectives(tmp_path, capsys):
    code, _, _ = run(capsys, "pareto", CORPUS / "04_geography.txt", "--generations", 200,
                     "--out-dir", tmp_path, "--profile", "medium")
    assert code == 0
    header, rows = read_tsv(tmp_path / "front.tsv")
    assert header == ["replacements", "fkgl", "text_file"]
    reps = [int(r["replacements"]) for r in rows]
    scores = [float(r["fkgl"]) for r in rows]
    assert reps == sorted(reps)
    assert all(b <= a for a, b in zip(scores, scores[1:]))
    for r in rows:
        assert (tmp_path / r["text_file"]).exists()
    assert (tmp_path / "profile_medium.txt").exists()
    assert len(json.loads((tmp_path / "front.json").read_text())["front"]) == len(rows)


def test_pareto_wmd_needs_embeddings(tmp_path, capsys):
    code, _, err = run(capsys, "pareto", CORPUS / "05_engineering.txt", "--objectives", "ari,repl,wmd",
                       "--out-dir", tmp_path)
    assert code == 2 and "--embeddings" in err


def test_pareto_three_objectives(tmp_path, capsys):
    code, _, _ = run(capsys, "pareto", CORPUS / "05_engineering.txt", "--objectives", "ari,repl,wmd",
                     "--embeddings", "bundled", "--generations", 40, "--out-dir", tmp_path)
    assert code == 0
    header, rows = read_tsv(tmp_path / "front.tsv")
    assert header == ["replacements", "ari", "wmd", "text_file"]
    points = [(float(r["ari"]), int(r["replacements"]), float(r["wmd"])) for r in rows]
    for a in points:
        for b in points:
            assert not (all(x <= y for x, y in zip(a, b)) and a != b)


def test_pareto_tiny_fixture_matches_oracle(tmp_path, capsys, lex):
    text = tmp_path / "tiny.txt"
    text.write_text("The enormous committee approved significant improvements.", encoding="utf-8")
    thes = tmp_path / "tiny.tsv"
    thes.write_text("enormous\tbig,huge\ncommittee\tboard\napproved\tpassed,okayed\n"
                    "significant\tbig,major\nimprovements\tgains\n", encoding="utf-8")
    code, _, _ = run(capsys, "pareto", text, "--thesaurus", thes, "--generations", 200,
                     "--out-dir", tmp_path / "out")
    assert code == 0
    _, rows = read_tsv(tmp_path / "out" / "front.tsv")
    got = [(int(r["replacements"]), float(r["fkgl"])) for r in rows]
    doc = tokenize(text.read_text())
    slots = populate_slots(doc, identify_candidates(doc, lex.stop_words, lex.prepositions),
                           ThesaurusProvider(load_thesaurus(thes)))
    ctx = ObjectiveContext(FitnessContext(doc, slots, MetricId.FKGL_GRADE, lex.easy_words), "min")
    exact = [(int(o.values[1]), o.values[0]) for o in brute_force_front(ctx)]
    assert got == [(r, pytest.approx(s, abs=1e-6)) for r, s in exact]


def test_experiment_smoke_and_jobs(tmp_path, capsys):
    args = ["experiment", "--runs", 1, "--generations", 10]
    assert run(capsys, *args, "-o", tmp_path / "serial.tsv", "--summary", tmp_path / "s.tsv")[0] == 0
    assert run(capsys, *args, "--jobs", 2, "-o", tmp_path / "parallel.tsv")[0] == 0
    serial = (tmp_path / "serial.tsv").read_text()
    assert serial == (tmp_path / "parallel.tsv").read_text()
    header, rows = read_tsv(tmp_path / "serial.tsv")
    assert header[:9] == ["use_case", "provider", "metric", "direction", "run", "seed",
                          "before", "after", "improvement"]
    assert len(rows) == 10
    assert all(float(r["improvement"]) >= 0 for r in rows)
    summary_header, summary = read_tsv(tmp_path / "s.tsv")
    assert {"min", "median", "max"} <= set(summary_header)
    assert summary[0]["provider"] == "thesaurus" and summary[0]["runs"] == "10"


def test_convert_thesaurus(tmp_path, capsys):
    from test_synonyms import write_wordnet
    wn = tmp_path / "wn"
    wn.mkdir()
    write_wordnet(wn)
    out = tmp_path / "thes.tsv"
    assert run(capsys, "convert-thesaurus", wn, out)[0] == 0
    assert out.read_text() == "big\tlarge,big and bold\nsea\tocean,main\n"


def test_convert_embeddings(tmp_path, capsys):
    src = tmp_path / "e.txt"
    src.write_text("2 3\nalpha 0.5 -1.25 3\nbeta 1e-05 2 0.1\n", encoding="utf-8")
    assert run(capsys, "convert-embeddings", src, tmp_path / "e.bin")[0] == 0
    assert run(capsys, "convert-embeddings", tmp_path / "e.bin", tmp_path / "back.txt")[0] == 0
    assert (tmp_path / "back.txt").read_text() == "2 3\nalpha 0.5 -1.25 3.0\nbeta 1e-05 2.0 0.1\n"
    bad = tmp_path / "bad.txt"
    bad.write_text("oops\n", encoding="utf-8")
    code, _, err = run(capsys, "convert-embeddings", bad, tmp_path / "x.bin")
    assert code == 2 and "line 1" in err
