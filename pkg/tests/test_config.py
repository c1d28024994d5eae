import json

import pytest
from pydantic import ValidationError

from src.models.config import BenchConfig, CsvLogOptions, FitnessWeights, GaConfig, RunConfig, TrainConfig
from src.models.entities import Strategy


@pytest.fixture
def formula_file(tmp_path):
    """Fixture para um arquivo de fórmula"""
    path = tmp_path / "phi.ltl"
    path.write_text("F a\n", encoding="utf-8")
    return path


def test_ga_config_defaults():
    """Testa os valores padrão do algoritmo genético"""
    config = GaConfig()
    assert config.population_size == 50
    assert config.generations == 100
    assert config.p_c == 0.5
    assert config.p_mut == 0.2
    assert config.selection_fraction == 0.5
    assert config.t == 5
    assert config.strategy == Strategy.APRIORI
    assert config.weights == FitnessWeights(alpha=0.5, beta=0.5, gamma=0.5, delta=0.5)


def test_ga_config_validation():
    """Testa limites inválidos"""
    with pytest.raises(ValidationError):
        GaConfig(p_c=1.5)
    with pytest.raises(ValidationError):
        GaConfig(selection_fraction=0.0)
    with pytest.raises(ValidationError):
        GaConfig(population_size=1)
    with pytest.raises(ValidationError):
        GaConfig(strategy="Random")
    with pytest.raises(ValidationError):
        FitnessWeights(alpha=-1)


def test_strategy_is_case_insensitive():
    """Testa nomes de estratégia sem diferenciar maiúsculas"""
    assert GaConfig(strategy="genphi").strategy == Strategy.GEN_PHI
    assert GaConfig(strategy=" online ").strategy == Strategy.ONLINE


def test_gen_ignores_compliance_weight():
    """Testa que Gen zera δ e as demais estratégias mantêm"""
    assert GaConfig(strategy=Strategy.GEN).effective_weights().delta == 0.0
    assert GaConfig(strategy=Strategy.GEN_PHI).effective_weights().delta == 0.5
    assert GaConfig(strategy=Strategy.GEN).effective_weights().alpha == 0.5


def test_strategy_properties():
    """Testa quais estratégias são restritas"""
    assert [s for s in Strategy if s.is_constrained] == [Strategy.MAR, Strategy.APRIORI, Strategy.ONLINE]
    assert [s for s in Strategy if s.uses_constrained_crossover] == [Strategy.APRIORI, Strategy.ONLINE]


def test_train_config_and_csv_options():
    """Testa hiperparâmetros do treino e colunas do CSV"""
    assert TrainConfig().epochs == 200
    with pytest.raises(ValidationError):
        TrainConfig(learning_rate=0)
    assert CsvLogOptions().columns == ["case_id", "position", "activity", "label"]
    with pytest.raises(ValidationError):
        CsvLogOptions(delimiter=";;")


def test_run_config_from_mapping(formula_file):
    """Testa a separação das chaves de GA e de pesos"""
    config = RunConfig.from_mapping(
        {"formula": formula_file, "t": 3, "strategy": "MAR", "alpha": 1.0, "seed": None}
    )
    assert config.formula == formula_file
    assert config.ga.t == 3
    assert config.ga.strategy == Strategy.MAR
    assert config.ga.weights.alpha == 1.0
    assert config.ga.weights.beta == 0.5
    assert config.ga.seed == 42


def test_run_config_rejects_unknown_keys_and_missing_files(tmp_path):
    """Testa chave desconhecida e arquivo inexistente"""
    with pytest.raises(ValueError):
        RunConfig.from_mapping({"population": 10})
    with pytest.raises(ValidationError):
        RunConfig.from_mapping({"log": tmp_path / "missing.csv"})


def test_run_config_from_file_with_overrides(tmp_path, formula_file):
    """Testa o arquivo chave=valor e a precedência das flags"""
    path = tmp_path / "run.env"
    path.write_text(
        f"formula={formula_file}\npopulation_size=20\ngenerations=5\nstrategy=online\nt=2\n",
        encoding="utf-8",
    )
    config = RunConfig.from_file(path, {"t": 4, "seed": None})
    assert config.ga.population_size == 20
    assert config.ga.generations == 5
    assert config.ga.strategy == Strategy.ONLINE
    assert config.ga.t == 4
    with pytest.raises(FileNotFoundError):
        RunConfig.from_file(tmp_path / "missing.env")


def test_bench_config_from_file(tmp_path, formula_file):
    """Testa a matriz do benchmark com caminhos relativos ao arquivo"""
    path = tmp_path / "bench.json"
    path.write_text(
        json.dumps(
            {
                "formulas": [{"id": "phi", "path": "phi.ltl"}],
                "strategies": ["Gen", "apriori"],
                "queries": 3,
                "ga": {"population_size": 10, "generations": 2},
            }
        ),
        encoding="utf-8",
    )
    config = BenchConfig.from_file(path)
    assert config.formulas[0].path == tmp_path / "phi.ltl"
    assert config.strategies == [Strategy.GEN, Strategy.APRIORI]
    assert config.prefix_lengths == [10]
    assert config.ga.population_size == 10


def test_bench_config_validation():
    """Testa fórmulas ausentes ou repetidas"""
    with pytest.raises(ValidationError):
        BenchConfig(formulas=[])
    with pytest.raises(ValidationError):
        BenchConfig(formulas=[{"id": "x", "path": "a"}, {"id": "x", "path": "b"}])
    with pytest.raises(ValidationError):
        BenchConfig(formulas=[{"id": "x", "path": "a"}], prefix_lengths=[0])
