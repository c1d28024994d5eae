import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .entities import Strategy
from .errors import InputError


def parse_strategy(v: Any) -> Any:
    """Aceita o nome da estratégia sem diferenciar maiúsculas"""
    if isinstance(v, str):
        for strategy in Strategy:
            if strategy.value.lower() == v.strip().lower():
                return strategy
        valid = ", ".join(s.value for s in Strategy)
        raise ValueError(f"Estratégia inválida: {v}. Opções: {valid}")
    return v


class FitnessWeights(BaseModel):
    """Pesos α, β, γ, δ da função de fitness"""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=0.5, ge=0.0)
    beta: float = Field(default=0.5, ge=0.0)
    gamma: float = Field(default=0.5, ge=0.0)
    delta: float = Field(default=0.5, ge=0.0)


class GaConfig(BaseModel):
    """Configuração do algoritmo genético"""
    model_config = ConfigDict(frozen=True)

    population_size: int = Field(default=50, ge=2)
    generations: int = Field(default=100, ge=1)
    p_c: float = Field(default=0.5, ge=0.0, le=1.0)
    p_mut: float = Field(default=0.2, ge=0.0, le=1.0)
    selection_fraction: float = Field(default=0.5, gt=0.0, le=1.0)
    patience: int = Field(default=20, ge=1)
    seed: int = 42
    t: int = Field(default=5, ge=1)
    weights: FitnessWeights = Field(default_factory=FitnessWeights)
    strategy: Strategy = Strategy.APRIORI
    mar_max_retries: int = Field(default=100, ge=1)

    @field_validator("strategy", mode="before")
    @classmethod
    def validate_strategy(cls, v: Any) -> Any:
        return parse_strategy(v)

    def effective_weights(self) -> FitnessWeights:
        """Pesos usados pela estratégia: Gen ignora o termo de compliance"""
        if self.strategy == Strategy.GEN:
            return self.weights.model_copy(update={"delta": 0.0})
        return self.weights


class TrainConfig(BaseModel):
    """Hiperparâmetros do classificador linear"""
    model_config = ConfigDict(frozen=True)

    epochs: int = Field(default=200, ge=0)
    learning_rate: float = Field(default=0.5, gt=0.0)
    l2: float = Field(default=1e-3, ge=0.0)
    batch_size: int = Field(default=64, ge=1)
    seed: int = 42


class CsvLogOptions(BaseModel):
    """Nomes das colunas e delimitador do CSV de log"""
    model_config = ConfigDict(frozen=True)

    case_column: str = "case_id"
    position_column: str = "position"
    activity_column: str = "activity"
    label_column: str = "label"
    delimiter: str = Field(default=",", min_length=1, max_length=1)

    @property
    def columns(self) -> List[str]:
        return [self.case_column, self.position_column, self.activity_column, self.label_column]


_GA_KEYS = {"population_size", "generations", "p_c", "p_mut", "selection_fraction", "patience",
            "seed", "t", "strategy", "mar_max_retries"}
_WEIGHT_KEYS = {"alpha", "beta", "gamma", "delta"}


class RunConfig(BaseModel):
    """Configuração de uma execução do explain"""

    log: Optional[Path] = None
    model: Optional[Path] = None
    formula: Optional[Path] = None
    out: Optional[Path] = None
    prefix_length: Optional[int] = Field(default=None, ge=1)
    ga: GaConfig = Field(default_factory=GaConfig)

    @field_validator("log", "model", "formula")
    @classmethod
    def validate_exists(cls, v: Optional[Path]) -> Optional[Path]:
        """Valida que os arquivos referenciados existem"""
        if v is not None and not v.exists():
            raise ValueError(f"Arquivo não encontrado: {v}")
        return v

    @classmethod
    def from_mapping(cls, values: Dict[str, Any]) -> "RunConfig":
        """
        Cria a configuração a partir de pares chave=valor

        Args:
            values: Chaves com os nomes dos campos de GaConfig/RunConfig; valores None são ignorados

        Returns:
            RunConfig: Configuração validada
        """
        values = {k: v for k, v in values.items() if v is not None and v != ""}
        unknown = set(values) - _GA_KEYS - _WEIGHT_KEYS - {"log", "model", "formula", "out", "prefix_length"}
        if unknown:
            raise InputError(f"Chaves de configuração desconhecidas: {', '.join(sorted(unknown))}")
        ga = {k: values[k] for k in _GA_KEYS if k in values}
        weights = {k: values[k] for k in _WEIGHT_KEYS if k in values}
        if weights:
            ga["weights"] = FitnessWeights(**weights)
        run = {k: values[k] for k in ("log", "model", "formula", "out", "prefix_length") if k in values}
        return cls(ga=GaConfig(**ga), **run)

    @classmethod
    def from_file(cls, path: Path, overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """
        Carrega um arquivo chave=valor; as flags explícitas sobrescrevem o arquivo

        Args:
            path: Caminho do arquivo de configuração
            overrides: Valores vindos da linha de comando

        Returns:
            RunConfig: Configuração validada
        """
        if not path.exists():
            raise FileNotFoundError(f"Arquivo de configuração não encontrado: {path}")
        values: Dict[str, Any] = dict(dotenv_values(path))
        for key, value in (overrides or {}).items():
            if value is not None:
                values[key] = value
        return cls.from_mapping(values)


class BenchFormula(BaseModel):
    """Fórmula de uma célula do benchmark"""

    id: str
    path: Path


class BenchConfig(BaseModel):
    """Matriz de experimentos do comando bench"""

    log: Optional[Path] = None
    num_cases: int = Field(default=4800, ge=1)
    log_seed: int = 42
    formulas: List[BenchFormula]
    strategies: List[Strategy] = Field(default_factory=lambda: list(Strategy))
    prefix_lengths: List[int] = Field(default_factory=lambda: [10])
    queries: int = Field(default=15, ge=1)
    seed: int = 42
    ga: GaConfig = Field(default_factory=GaConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    out: Path = Path("output/bench.csv")

    @field_validator("strategies", mode="before")
    @classmethod
    def validate_strategies(cls, v: Any) -> Any:
        if isinstance(v, list):
            return [parse_strategy(s) for s in v]
        return v

    @field_validator("prefix_lengths")
    @classmethod
    def validate_prefix_lengths(cls, v: List[int]) -> List[int]:
        if not v or any(n < 1 for n in v):
            raise ValueError("prefix_lengths deve conter inteiros >= 1")
        return v

    @model_validator(mode="after")
    def validate_formulas(self) -> "BenchConfig":
        """Valida ids únicos das fórmulas"""
        ids = [f.id for f in self.formulas]
        if not ids:
            raise ValueError("Nenhuma fórmula configurada")
        if len(set(ids)) != len(ids):
            raise ValueError("ids de fórmula duplicados")
        return self

    @classmethod
    def from_file(cls, path: Path) -> "BenchConfig":
        """
        Carrega a matriz de um arquivo JSON

        Caminhos relativos de fórmulas e do log são resolvidos a partir do diretório do arquivo
        quando não existem a partir do diretório atual.
        """
        data = json.loads(path.read_text(encoding="utf-8"))
        config = cls(**data)
        base = path.parent
        formulas = [
            BenchFormula(id=f.id, path=f.path if f.path.exists() else base / f.path)
            for f in config.formulas
        ]
        log = config.log
        if log is not None and not log.exists() and (base / log).exists():
            log = base / log
        return config.model_copy(update={"formulas": formulas, "log": log})
