import csv
import json

from infogov.cli import main


def test_simulate_writes_logs_and_report(tmp_path, capsys):
    out = tmp_path / "sim"
    assert main(["simulate", "--tier", "LA_NR", "--rounds", "2", "--seed", "3", "--out", str(out)]) == 0
    assert sorted(p.name for p in out.glob("round_*.json")) == ["round_0.json", "round_1.json"]
    assert (out / "summary.csv").exists() and (out / "charts" / "coop.svg").exists()
    assert "avg_coop" in capsys.readouterr().out


def test_simulate_with_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"steps": 3, "rounds": 1, "agent_backend": "all-c"}))
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    log = json.loads((out / "round_0.json").read_text())
    assert len(log["steps"]) == 3


def test_train_then_sweep(tmp_path, capsys):
    ck = tmp_path / "gov.json"
    assert main(["train", "--episodes", "2", "--seed", "1", "--out", str(ck)]) == 0
    curve = list(csv.DictReader(open(tmp_path / "gov.curve.csv")))
    assert len(curve) == 2 and set(curve[0]) == {"episode", "discounted_return", "mean_coop"}
    out = tmp_path / "sweep"
    assert main(["sweep", "--checkpoint", str(ck), "--rounds", "2", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "summary.csv")))
    assert [r["scenario"] for r in rows] == ["RL", "LA", "LA_NR", "LA_AR"]
    assert main(["simulate", "--checkpoint", str(ck), "--rounds", "1", "--out", str(tmp_path / "s")]) == 0


def test_microval_and_report(tmp_path, capsys):
    m = tmp_path / "m.csv"
    assert main(["microval", "--trials", "10", "--out", str(m)]) == 0
    assert len(list(csv.DictReader(open(m)))) == 40
    sim = tmp_path / "sim"
    main(["simulate", "--rounds", "2", "--out", str(sim)])
    rep = tmp_path / "rep"
    assert main(["report", "--rounds-dir", str(sim), "--out", str(rep)]) == 0
    assert (rep / "series_run.csv").exists()
    assert main(["report", "--rounds-dir", str(tmp_path / "empty"), "--out", str(rep)]) == 2


def test_unreachable_llm_marks_rounds_invalid(tmp_path, monkeypatch):
    monkeypatch.setenv("INFOGOV_LLM_BASE_URL", "http://127.0.0.1:9/v1")
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"steps": 1, "rounds": 1, "llm": {"max_retries": 0, "backoff": 0, "timeout": 2}}))
    assert main(["simulate", "--config", str(cfg), "--backend", "llm", "--out", str(tmp_path / "o")]) == 1
    assert json.loads((tmp_path / "o" / "round_0.json").read_text())["valid"] is False
