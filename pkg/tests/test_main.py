import json

import pandas as pd
import pytest
from typer.testing import CliRunner

from src.main import app, exit_code_for
from src.models.errors import (
    FormulaSyntaxError,
    HypothesisViolation,
    InputError,
    NothingToExplain,
    PredictorTimeout,
)

runner = CliRunner()

LOAN_ALPHABET = "apply,aut_chk,man_chk,phone,ok,offer,book,send_doc,sms,email"


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    """Fixture que executa a CLI em um diretório temporário com log, fórmulas e modelo"""
    monkeypatch.chdir(tmp_path)
    (tmp_path / "start.ltl").write_text("register\n", encoding="utf-8")
    (tmp_path / "never_register.ltl").write_text("!register\n", encoding="utf-8")
    (tmp_path / "small.env").write_text("population_size=20\ngenerations=5\nt=2\nseed=3\n", encoding="utf-8")
    result = runner.invoke(app, ["gen-log", "--seed", "3", "--num-cases", "200", "--out", "claims.csv"])
    assert result.exit_code == 0, result.output
    result = runner.invoke(
        app, ["train", "--log", "claims.csv", "--prefix", "4", "--out", "model.json", "--epochs", "20"]
    )
    assert result.exit_code == 0, result.output
    return tmp_path


def explain_args(*extra):
    return [
        "explain", "--log", "claims.csv", "--formula", "start.ltl", "--model", "model.json",
        "--case-id", "claim_00001", "--config", "small.env", *extra,
    ]


def test_exit_codes():
    """Testa o mapeamento de exceções para códigos de saída"""
    assert exit_code_for(HypothesisViolation("x")) == 3
    assert exit_code_for(NothingToExplain("x")) == 4
    assert exit_code_for(FormulaSyntaxError("x", 1, 1)) == 2
    assert exit_code_for(FileNotFoundError("x")) == 2
    assert exit_code_for(PredictorTimeout("x")) == 1
    assert exit_code_for(InputError("x")) == 2
    # falhas internas não são erros de entrada
    assert exit_code_for(ValueError("x")) == 1
    assert exit_code_for(KeyError("x")) == 1
    assert exit_code_for(ZeroDivisionError()) == 1


def test_gen_log_and_train(workspace):
    """Testa a geração do log sintético e o treino do modelo"""
    assert (workspace / "claims.csv").exists()
    model = json.loads((workspace / "model.json").read_text(encoding="utf-8"))
    assert model["prefix_length"] == 4
    assert len(model["weights"]) == 4 * 16 + 1


def test_compile_command(tmp_path, monkeypatch):
    """Testa a compilação de φ_chk com alfabeto explícito"""
    monkeypatch.chdir(tmp_path)
    (tmp_path / "chk.ltl").write_text("(!man_chk) U aut_chk\n", encoding="utf-8")
    result = runner.invoke(
        app, ["compile", "--formula", "chk.ltl", "--alphabet", LOAN_ALPHABET, "--dot", "out/chk.dot"]
    )
    assert result.exit_code == 0, result.output
    assert "states: 3, accepting: 1" in result.output
    assert "doublecircle" in (tmp_path / "out" / "chk.dot").read_text(encoding="utf-8")


def test_compile_command_input_errors(tmp_path, monkeypatch):
    """Testa erros de entrada com código 2"""
    monkeypatch.chdir(tmp_path)
    (tmp_path / "bad.ltl").write_text("apply &\n", encoding="utf-8")
    result = runner.invoke(app, ["compile", "--formula", "bad.ltl", "--alphabet", LOAN_ALPHABET])
    assert result.exit_code == 2
    assert "Erro:" in result.output

    result = runner.invoke(app, ["compile", "--formula", "missing.ltl", "--alphabet", LOAN_ALPHABET])
    assert result.exit_code == 2

    result = runner.invoke(app, ["compile", "--formula", "bad.ltl"])
    assert result.exit_code == 2


def test_check_command(workspace):
    """Testa a verificação de conformidade do log"""
    result = runner.invoke(app, ["check", "--log", "claims.csv", "--formula", "start.ltl"])
    assert result.exit_code == 0, result.output
    assert "fraction: 1.0000" in result.output

    result = runner.invoke(app, ["check", "--log", "claims.csv", "--formula", "never_register.ltl", "--prefix", "4"])
    assert result.exit_code == 0, result.output
    assert "fraction: 0.0000" in result.output

    result = runner.invoke(app, ["check", "--log", "claims.csv", "--formula", "start.ltl", "--prefix", "500"])
    assert result.exit_code == 2


def test_explain_is_deterministic(workspace):
    """Testa que duas execuções com a mesma semente geram o mesmo JSON"""
    first = runner.invoke(app, explain_args("--out", "a.json"))
    assert first.exit_code == 0, first.output
    second = runner.invoke(app, explain_args("--out", "b.json"))
    assert second.exit_code == 0, second.output
    a = (workspace / "a.json").read_text(encoding="utf-8")
    assert a == (workspace / "b.json").read_text(encoding="utf-8")
    data = json.loads(a)
    assert len(data["query"]) == 4
    assert data["config"]["population_size"] == 20
    assert data["strategy"] == "APriori"
    assert "runtime_seconds" not in data["report"]


def test_explain_timing_flag(workspace):
    """Testa a inclusão do tempo de execução"""
    result = runner.invoke(app, explain_args("--out", "timed.json", "--timing", "--strategy", "online"))
    assert result.exit_code == 0, result.output
    data = json.loads((workspace / "timed.json").read_text(encoding="utf-8"))
    assert data["strategy"] == "Online"
    assert data["report"]["runtime_seconds"] >= 0


def test_explain_hypothesis_violation(workspace):
    """Testa o código 3 para query que viola φ com estratégia restrita"""
    args = explain_args()
    args[args.index("start.ltl")] = "never_register.ltl"
    result = runner.invoke(app, args)
    assert result.exit_code == 3


def test_explain_nothing_to_explain(workspace):
    """Testa o código 4 quando a classe desejada já é a predita"""
    codes = {
        runner.invoke(app, explain_args("--desired", value, "--out", f"{value}.json")).exit_code
        for value in ("true", "false")
    }
    assert codes == {0, 4}


def test_explain_input_errors(workspace):
    """Testa combinações inválidas de opções"""
    result = runner.invoke(app, ["explain", "--log", "claims.csv", "--formula", "start.ltl", "--case-id", "claim_00001"])
    assert result.exit_code == 2
    result = runner.invoke(app, explain_args("--desired", "maybe"))
    assert result.exit_code == 2
    result = runner.invoke(app, explain_args("--strategy", "Random"))
    assert result.exit_code == 2
    args = explain_args()
    args[args.index("claim_00001")] = "missing_case"
    assert runner.invoke(app, args).exit_code == 2
    result = runner.invoke(app, explain_args("--prefix", "3"))
    assert result.exit_code == 2
    result = runner.invoke(app, ["gen-log", "--num-cases", "0", "--out", "empty.csv"])
    assert result.exit_code == 2


def test_bench_command(workspace):
    """Testa uma grade pequena do benchmark"""
    config = {
        "log": "claims.csv",
        "formulas": [{"id": "start", "path": "start.ltl"}],
        "strategies": ["Gen", "APriori"],
        "prefix_lengths": [4],
        "queries": 2,
        "ga": {"population_size": 10, "generations": 3, "t": 2},
        "train": {"epochs": 10},
    }
    (workspace / "bench.json").write_text(json.dumps(config), encoding="utf-8")
    result = runner.invoke(app, ["bench", "--config", "bench.json", "--out", "bench.csv"])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(workspace / "bench.csv")
    assert list(frame["strategy"]) == ["Gen", "APriori"]
    assert (frame["compliance"].dropna() == 1.0).all()
