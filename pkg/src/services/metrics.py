from typing import List, Optional, Sequence, Union

import numpy as np

from ..models.config import FitnessWeights
from ..models.entities import EventLog, Trace
from ..models.report import CandidateMetrics, MetricsReport
from .automata import Dfa, accepts
from .classifier import DECISION_THRESHOLD, Classifier


def _check_lengths(t1: Trace, t2: Trace) -> None:
    if len(t1) != len(t2):
        raise ValueError(f"Traces de tamanhos diferentes: {len(t1)} e {len(t2)}")


def validity(predicted_label: bool, desired_label: bool) -> int:
    """1 quando a predição não atinge a classe desejada (0 é o valor bom)"""
    return int(bool(predicted_label) != bool(desired_label))


def sparsity(t1: Trace, t2: Trace) -> int:
    """Número de posições diferentes (norma L0)"""
    _check_lengths(t1, t2)
    return int(np.count_nonzero(np.asarray(t1.activities) != np.asarray(t2.activities)))


def distance(t1: Trace, t2: Trace) -> float:
    """Fração de posições diferentes, em [0, 1]"""
    return sparsity(t1, t2) / len(t1)


class PopulationIndex:
    """
    Prefixos da população de referência em uma matriz numpy

    Cada linha é o prefixo de tamanho `length` de um trace da população; traces mais
    curtos são ignorados.
    """

    def __init__(self, population: EventLog, length: int):
        self.length = length
        rows = [t.activities[:length] for t in population.traces() if len(t) >= length]
        self.matrix = np.array(rows, dtype=int).reshape(len(rows), length)

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def min_distance(self, candidate: Trace) -> float:
        if len(candidate) != self.length:
            raise ValueError(f"Trace de tamanho {len(candidate)}, índice de tamanho {self.length}")
        if len(self) == 0:
            raise ValueError(f"Nenhum trace da população com tamanho >= {self.length}")
        mismatches = np.count_nonzero(self.matrix != np.asarray(candidate.activities), axis=1)
        return float(mismatches.min()) / self.length


def implausibility(candidate: Trace, population: Union[EventLog, PopulationIndex]) -> float:
    """
    Distância até o trace mais próximo da população de referência

    Args:
        candidate: Contrafactual
        population: Log de referência ou índice já construído para o tamanho do candidato

    Returns:
        float: Menor distância posicional contra os prefixos de mesmo tamanho
    """
    if isinstance(population, EventLog):
        population = PopulationIndex(population, len(candidate))
    return population.min_distance(candidate)


def diversity(traces: Sequence[Trace]) -> float:
    """Média das distâncias entre pares distintos; 0 para conjuntos com menos de 2 traces"""
    count = len(traces)
    if count < 2:
        return 0.0
    lengths = {len(t) for t in traces}
    if len(lengths) != 1:
        raise ValueError("Conjunto com traces de tamanhos diferentes")
    length = lengths.pop()
    matrix = np.array([t.activities for t in traces], dtype=int)
    pairwise = np.count_nonzero(matrix[:, None, :] != matrix[None, :, :], axis=2) / length
    upper = pairwise[np.triu_indices(count, k=1)]
    return float(2.0 * upper.sum() / (count * (count - 1)))


def compliance(candidate: Trace, dfa: Dfa) -> int:
    """1 se o trace satisfaz a fórmula compilada em `dfa`"""
    return int(accepts(dfa, candidate))


def combine_fitness(
    validity_value: int,
    distance_value: float,
    sparsity_value: int,
    implausibility_value: float,
    compliance_value: int,
    weights: FitnessWeights,
) -> float:
    """Combina os termos da fitness (minimizada); compliance entra como δ·(1 - compliance)"""
    return (
        validity_value
        + weights.alpha * distance_value
        + weights.beta * sparsity_value
        + weights.gamma * implausibility_value
        + weights.delta * (1 - compliance_value)
    )


def fitness(
    candidate: Trace,
    query: Trace,
    desired_label: bool,
    classifier: Classifier,
    population: Union[EventLog, PopulationIndex],
    dfa: Dfa,
    weights: FitnessWeights,
) -> float:
    """
    Fitness de um candidato; valores menores são melhores

    Args:
        candidate: Contrafactual avaliado
        query: Trace original
        desired_label: Classe desejada
        classifier: Preditor caixa-preta
        population: População de referência
        dfa: Autômato da fórmula
        weights: Pesos α, β, γ, δ

    Returns:
        float: validity + α·dist + β·spars + γ·implaus + δ·(1 − compliance)
    """
    _check_lengths(candidate, query)
    return combine_fitness(
        validity(classifier.predict(candidate), desired_label),
        distance(candidate, query),
        sparsity(candidate, query),
        implausibility(candidate, population),
        compliance(candidate, dfa),
        weights,
    )


def _mean(values: List[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def build_report(
    query: Trace,
    candidates: Sequence[Trace],
    desired_label: bool,
    classifier: Classifier,
    population: Union[EventLog, PopulationIndex],
    dfa: Dfa,
    t: int,
    runtime_seconds: Optional[float] = None,
    weights: Optional[FitnessWeights] = None,
) -> MetricsReport:
    """
    Calcula as métricas por candidato e agregadas

    Args:
        query: Trace original
        candidates: Contrafactuais extraídos
        desired_label: Classe desejada
        classifier: Preditor
        population: População de referência
        dfa: Autômato da fórmula
        t: Número de contrafactuais pedidos
        runtime_seconds: Tempo de execução medido
        weights: Se informado, inclui a fitness de cada candidato

    Returns:
        MetricsReport: Relatório com hit_rate = |C| / t
    """
    if isinstance(population, EventLog):
        population = PopulationIndex(population, len(query))
    scores = classifier.score_batch(list(candidates)) if candidates else np.array([])
    rows: List[CandidateMetrics] = []
    for candidate, score in zip(candidates, scores):
        row = CandidateMetrics(
            validity=validity(bool(score > DECISION_THRESHOLD), desired_label),
            distance=distance(candidate, query),
            sparsity=sparsity(candidate, query),
            implausibility=implausibility(candidate, population),
            compliance=compliance(candidate, dfa),
            score=float(score),
        )
        if weights is not None:
            row.fitness = combine_fitness(
                row.validity, row.distance, row.sparsity, row.implausibility, row.compliance, weights
            )
        rows.append(row)
    return MetricsReport(
        candidates=rows,
        validity=_mean([r.validity for r in rows]),
        distance=_mean([r.distance for r in rows]),
        sparsity=_mean([r.sparsity for r in rows]),
        implausibility=_mean([r.implausibility for r in rows]),
        compliance=_mean([r.compliance for r in rows]),
        diversity=diversity(list(candidates)),
        hit_rate=min(len(rows) / t, 1.0),
        requested=t,
        runtime_seconds=runtime_seconds,
    )
