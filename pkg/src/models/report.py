from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_serializer

from .config import GaConfig
from .entities import Strategy, Trace


class CandidateMetrics(BaseModel):
    """Métricas de um contrafactual individual"""

    validity: int = Field(..., ge=0, le=1)
    distance: float = Field(..., ge=0.0, le=1.0)
    sparsity: int = Field(..., ge=0)
    implausibility: float = Field(..., ge=0.0, le=1.0)
    compliance: int = Field(..., ge=0, le=1)
    score: float
    fitness: Optional[float] = None


class MetricsReport(BaseModel):
    """Métricas agregadas de um conjunto de contrafactuais"""

    candidates: List[CandidateMetrics] = Field(default_factory=list)
    validity: Optional[float] = None
    distance: Optional[float] = None
    sparsity: Optional[float] = None
    implausibility: Optional[float] = None
    compliance: Optional[float] = None
    diversity: float = 0.0
    hit_rate: float = Field(..., ge=0.0, le=1.0)
    requested: int = Field(..., ge=1)
    runtime_seconds: Optional[float] = None

    @property
    def delivered(self) -> int:
        return len(self.candidates)


class RunDiagnostics(BaseModel):
    """Contadores de uma execução do algoritmo genético"""

    generations: int = 0
    early_stopped: bool = False
    evaluations: int = 0
    initial_from_population: int = 0
    initial_random: int = 0
    mar_retries: int = 0
    mar_exhausted: int = 0
    t_clamped: bool = False


class CounterfactualSet(BaseModel):
    """Resultado do explain: query, contrafactuais e relatório de métricas"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    query: Trace
    desired_label: bool
    strategy: Strategy
    formula: str
    config: GaConfig
    candidates: List[Trace] = Field(default_factory=list)
    report: MetricsReport
    diagnostics: RunDiagnostics = Field(default_factory=RunDiagnostics)

    @field_serializer("query")
    def serialize_query(self, query: Trace) -> List[str]:
        return query.names()

    @field_serializer("candidates")
    def serialize_candidates(self, candidates: List[Trace]) -> List[List[str]]:
        return [c.names() for c in candidates]

    def to_json(self, include_runtime: bool = False) -> str:
        """
        Serializa em JSON

        Args:
            include_runtime: Inclui o tempo de execução; sem ele, execuções com a mesma semente
                geram JSON idêntico

        Returns:
            str: JSON indentado
        """
        exclude = None if include_runtime else {"report": {"runtime_seconds"}}
        return self.model_dump_json(indent=2, exclude=exclude)
