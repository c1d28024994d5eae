import math
import time
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..models.config import GaConfig
from ..models.entities import Domains, EventLog, Individual, Strategy, Trace
from ..models.errors import HypothesisViolation, InputError, NothingToExplain
from ..models.formula import Formula, FormulaSignature, render, signature
from ..models.report import CounterfactualSet, RunDiagnostics
from .automata import Dfa, accepts, compile_formula, safe_activities
from .classifier import DECISION_THRESHOLD, Classifier
from .event_log import domains as compute_domains
from .event_log import prefixes
from .metrics import PopulationIndex, build_report, combine_fitness, validity

IMPROVEMENT_EPSILON = 1e-9


def _check_same_length(*traces: Trace) -> None:
    lengths = {len(t) for t in traces}
    if len(lengths) != 1:
        raise ValueError(f"Traces de tamanhos diferentes: {sorted(lengths)}")


def standard_crossover(p1: Trace, p2: Trace, p_c: float, rng: np.random.Generator) -> Trace:
    """Crossover uniforme: cada gene vem de p1 com probabilidade p_c, senão de p2"""
    _check_same_length(p1, p2)
    draws = rng.random(len(p1))
    genes = np.where(draws < p_c, p1.activities, p2.activities)
    return p1.with_activities(genes.tolist())


def constrained_crossover(
    p1: Trace,
    p2: Trace,
    query: Trace,
    sig: FormulaSignature,
    p_c: float,
    rng: np.random.Generator,
) -> Trace:
    """
    Crossover ciente do conhecimento temporal

    Genes da query com atividades de Σ_φ são mantidos. Nos demais, o gene vem de p1
    (sorteio < p_c) ou de p2 (sorteio >= p_c) somente se o gene do pai também estiver
    fora de Σ_φ; caso contrário, repete o gene da query. Se a query satisfaz φ, o filho
    também satisfaz.

    Args:
        p1: Primeiro pai
        p2: Segundo pai
        query: Trace original (τ ⊨ φ)
        sig: Assinatura da fórmula
        p_c: Probabilidade de herdar de p1
        rng: Gerador aleatório

    Returns:
        Trace: Filho com o mesmo tamanho da query
    """
    _check_same_length(p1, p2, query)
    draws = rng.random(len(query))
    genes = []
    for i, draw in enumerate(draws):
        if sig.is_active(query[i]):
            genes.append(query[i])
        elif draw < p_c and not sig.is_active(p1[i]):
            genes.append(p1[i])
        elif draw >= p_c and not sig.is_active(p2[i]):
            genes.append(p2[i])
        else:
            genes.append(query[i])
    return query.with_activities(genes)


def _check_domains(offspring: Trace, domains: Domains) -> None:
    if not domains.covers(len(offspring)):
        raise ValueError(f"Domínios cobrem até {domains.horizon}, trace tem {len(offspring)}")


def standard_mutation(offspring: Trace, domains: Domains, p_mut: float, rng: np.random.Generator) -> Trace:
    """Mutação sem restrição: cada gene é sorteado em D_i com probabilidade p_mut"""
    _check_domains(offspring, domains)
    genes = list(offspring.activities)
    for i in range(len(genes)):
        if rng.random() < p_mut:
            choices = sorted(domains.at(i + 1))
            genes[i] = choices[int(rng.integers(len(choices)))]
    return offspring.with_activities(genes)


def mutate(
    offspring: Trace,
    strategy: Strategy,
    domains: Domains,
    p_mut: float,
    rng: np.random.Generator,
    sig: Optional[FormulaSignature] = None,
    dfa: Optional[Dfa] = None,
) -> Trace:
    """
    Mutação ciente do conhecimento temporal

    APriori troca apenas genes fora de Σ_φ, sorteando em D_i \\ Σ_φ. Online percorre o trace
    da esquerda para a direita e sorteia em D_i ∩ SafeAct, calculado sobre o trace já
    parcialmente mutado. Conjunto de sorteio vazio mantém o gene. As demais estratégias
    usam a mutação sem restrição.

    Args:
        offspring: Trace a mutar (τ_o ⊨ φ para APriori/Online)
        strategy: Estratégia de geração
        domains: Domínios D_i
        p_mut: Probabilidade de mutação por gene
        rng: Gerador aleatório
        sig: Assinatura da fórmula (APriori)
        dfa: Autômato da fórmula (Online)

    Returns:
        Trace: Trace mutado com o mesmo tamanho
    """
    if strategy == Strategy.APRIORI:
        if sig is None:
            raise ValueError("APriori exige a assinatura da fórmula")
        _check_domains(offspring, domains)
        genes = list(offspring.activities)
        for i in range(len(genes)):
            if rng.random() < p_mut and not sig.is_active(genes[i]):
                choices = sorted(domains.at(i + 1) - sig.active)
                if choices:
                    genes[i] = choices[int(rng.integers(len(choices)))]
        return offspring.with_activities(genes)

    if strategy == Strategy.ONLINE:
        if dfa is None:
            raise ValueError("Online exige o DFA da fórmula")
        _check_domains(offspring, domains)
        current = offspring
        for i in range(1, len(offspring) + 1):
            if rng.random() < p_mut:
                choices = sorted(domains.at(i) & safe_activities(dfa, current, i))
                if choices:
                    genes = list(current.activities)
                    genes[i - 1] = choices[int(rng.integers(len(choices)))]
                    current = current.with_activities(genes)
        return current

    return standard_mutation(offspring, domains, p_mut, rng)


def mutate_and_retry(
    offspring: Trace,
    dfa: Dfa,
    domains: Domains,
    p_mut: float,
    rng: np.random.Generator,
    max_retries: int,
    diagnostics: Optional[RunDiagnostics] = None,
) -> Trace:
    """
    Mutação padrão repetida até o resultado satisfazer φ (Mutate-And-Retry)

    Após `max_retries` tentativas rejeitadas devolve a entrada sem alteração.
    """
    for _ in range(max_retries):
        mutated = standard_mutation(offspring, domains, p_mut, rng)
        if accepts(dfa, mutated):
            return mutated
        if diagnostics is not None:
            diagnostics.mar_retries += 1
    if diagnostics is not None:
        diagnostics.mar_exhausted += 1
    return offspring


def initialize_population(
    query: Trace,
    desired_label: bool,
    population_log: EventLog,
    classifier: Classifier,
    domains: Domains,
    size: int,
    rng: np.random.Generator,
) -> Tuple[List[Trace], int]:
    """
    População inicial híbrida

    Usa os prefixos da população de referência com a classe desejada, do mais próximo
    ao mais distante da query; completa com traces sorteados posição a posição em D_i.

    Returns:
        Tuple[List[Trace], int]: `size` cromossomos e quantos vieram da população
    """
    _check_domains(query, domains)
    n = len(query)
    seen = set()
    reference: List[Trace] = []
    for trace in prefixes(population_log, n).traces():
        if trace.activities not in seen:
            seen.add(trace.activities)
            reference.append(query.with_activities(trace.activities))
    chosen: List[Trace] = []
    if reference:
        labels = classifier.predict_batch(reference)
        close = [t for t, label in zip(reference, labels) if bool(label) == desired_label]
        query_genes = np.asarray(query.activities)
        close.sort(key=lambda t: (int(np.count_nonzero(np.asarray(t.activities) != query_genes)), t.activities))
        chosen = close[:size]
    from_population = len(chosen)
    sorted_domains = [sorted(domains.at(i)) for i in range(1, n + 1)]
    while len(chosen) < size:
        genes = [d[int(rng.integers(len(d)))] for d in sorted_domains]
        chosen.append(query.with_activities(genes))
    return chosen, from_population


def select(population: Sequence[Individual], fraction: float) -> List[Individual]:
    """
    Mantém a fração de menor fitness

    Empates são resolvidos por menor esparsidade e depois pelo cromossomo em ordem lexicográfica.
    """
    if not 0 < fraction <= 1:
        raise ValueError(f"Fração de seleção inválida: {fraction}")
    keep = math.ceil(fraction * len(population))
    return sorted(population, key=Individual.sort_key)[:keep]


class CounterfactualGenerator:
    """Algoritmo genético para contrafactuais de traces com conhecimento temporal"""

    def __init__(
        self,
        query: Trace,
        desired_label: bool,
        formula: Formula,
        log: EventLog,
        classifier: Classifier,
        config: Optional[GaConfig] = None,
        dfa: Optional[Dfa] = None,
    ):
        """
        Inicializa o gerador

        Args:
            query: Trace a explicar
            desired_label: Classe desejada para os contrafactuais
            formula: Conhecimento temporal φ
            log: População de referência T
            classifier: Preditor caixa-preta
            config: Configuração do algoritmo genético
            dfa: Autômato de φ já compilado, se disponível
        """
        self.query = query
        self.desired_label = desired_label
        self.formula = formula
        self.log = log
        self.classifier = classifier
        self.config = config or GaConfig()
        self.strategy = self.config.strategy
        query.check_alphabet(log.alphabet)
        self.signature = signature(formula, query.alphabet)
        self.dfa = dfa or compile_formula(formula, query.alphabet)
        self.weights = self.config.effective_weights()
        self.rng = np.random.default_rng(self.config.seed)
        self.diagnostics = RunDiagnostics()
        self._archive: Dict[Tuple[int, ...], Individual] = {}
        self.domains: Optional[Domains] = None
        self.index: Optional[PopulationIndex] = None

    def _validate(self) -> int:
        """Valida as hipóteses da execução e devolve o t efetivo"""
        if self.classifier.prefix_length is not None and self.classifier.prefix_length != len(self.query):
            raise InputError(
                f"Query de tamanho {len(self.query)} incompatível com o modelo de prefixo "
                f"{self.classifier.prefix_length}"
            )
        if self.strategy.is_constrained and not accepts(self.dfa, self.query):
            raise HypothesisViolation(
                f"A query não satisfaz a fórmula {render(self.formula)}; a estratégia "
                f"{self.strategy.value} exige τ ⊨ φ para garantir a conformidade dos contrafactuais"
            )
        if self.classifier.predict(self.query) == self.desired_label:
            raise NothingToExplain(
                f"A predição da query já é {str(self.desired_label).lower()}; nada a explicar"
            )
        t = self.config.t
        if t > self.config.population_size:
            logger.warning(
                f"t={t} maior que a população ({self.config.population_size}); usando t={self.config.population_size}"
            )
            self.diagnostics.t_clamped = True
            t = self.config.population_size
        return t

    def _evaluate(self, chromosomes: Sequence[Trace]) -> List[Individual]:
        """Avalia os cromossomos, reaproveitando o cache por conteúdo"""
        fresh: List[Trace] = []
        pending = set()
        for trace in chromosomes:
            if trace.activities not in self._archive and trace.activities not in pending:
                pending.add(trace.activities)
                fresh.append(trace)
        if fresh:
            assert self.index is not None
            scores = self.classifier.score_batch(fresh)
            query_genes = np.asarray(self.query.activities)
            for trace, score in zip(fresh, scores):
                label = bool(score > DECISION_THRESHOLD)
                spars = int(np.count_nonzero(np.asarray(trace.activities) != query_genes))
                comp = int(accepts(self.dfa, trace))
                value = combine_fitness(
                    validity(label, self.desired_label),
                    spars / len(trace),
                    spars,
                    self.index.min_distance(trace),
                    comp,
                    self.weights,
                )
                self._archive[trace.activities] = Individual(
                    chromosome=trace, fitness=value, compliance=comp, score=float(score), sparsity=spars
                )
            self.diagnostics.evaluations += len(fresh)
        return [self._archive[t.activities] for t in chromosomes]

    def _offspring(self, survivors: Sequence[Individual]) -> Trace:
        cfg = self.config
        i, j = self.rng.integers(0, len(survivors), size=2)
        p1, p2 = survivors[int(i)].chromosome, survivors[int(j)].chromosome
        if self.strategy.uses_constrained_crossover:
            child = constrained_crossover(p1, p2, self.query, self.signature, cfg.p_c, self.rng)
            return mutate(child, self.strategy, self.domains, cfg.p_mut, self.rng, self.signature, self.dfa)
        child = standard_crossover(p1, p2, cfg.p_c, self.rng)
        if self.strategy == Strategy.MAR:
            return mutate_and_retry(
                child, self.dfa, self.domains, cfg.p_mut, self.rng, cfg.mar_max_retries, self.diagnostics
            )
        return standard_mutation(child, self.domains, cfg.p_mut, self.rng)

    def _extract(self, t: int) -> List[Individual]:
        """Melhores cromossomos do arquivo que atingem a classe desejada (e φ, se restrito)"""
        eligible = [
            ind
            for ind in self._archive.values()
            if (ind.score > DECISION_THRESHOLD) == self.desired_label
            and (ind.compliance == 1 or not self.strategy.is_constrained)
        ]
        return sorted(eligible, key=Individual.sort_key)[:t]

    def run(self) -> CounterfactualSet:
        """
        Executa o algoritmo genético e extrai os contrafactuais

        Returns:
            CounterfactualSet: Até t contrafactuais distintos e o relatório de métricas
        """
        started = time.perf_counter()
        cfg = self.config
        t = self._validate()
        n = len(self.query)
        self.domains = compute_domains(self.log, n)
        self.index = PopulationIndex(self.log, n)

        logger.info(
            f"Gerando contrafactuais: estratégia {self.strategy.value}, prefixo {n}, "
            f"população {cfg.population_size}, gerações {cfg.generations}"
        )
        initial, from_population = initialize_population(
            self.query, self.desired_label, self.log, self.classifier, self.domains, cfg.population_size, self.rng
        )
        self.diagnostics.initial_from_population = from_population
        self.diagnostics.initial_random = len(initial) - from_population
        population = self._evaluate(initial)
        best = min(ind.fitness for ind in population)
        stale = 0

        for generation in range(1, cfg.generations + 1):
            survivors = select(population, cfg.selection_fraction)
            children = [self._offspring(survivors) for _ in range(cfg.population_size - len(survivors))]
            population = survivors + self._evaluate(children)
            self.diagnostics.generations = generation

            current = min(ind.fitness for ind in population)
            logger.debug(f"Geração {generation}: melhor fitness {current:.6f}")
            if current < best - IMPROVEMENT_EPSILON:
                best = current
                stale = 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    self.diagnostics.early_stopped = True
                    logger.debug(f"Parada antecipada na geração {generation}")
                    break

        if self.diagnostics.mar_exhausted:
            logger.warning(f"MAR esgotou as tentativas {self.diagnostics.mar_exhausted} vezes")

        extracted = self._extract(t)
        candidates = [ind.chromosome for ind in extracted]
        runtime = time.perf_counter() - started
        report = build_report(
            self.query,
            candidates,
            self.desired_label,
            self.classifier,
            self.index,
            self.dfa,
            t,
            runtime_seconds=runtime,
            weights=self.weights,
        )
        logger.info(
            f"{len(candidates)}/{t} contrafactuais extraídos em {self.diagnostics.generations} gerações "
            f"({self.diagnostics.evaluations} avaliações, {runtime:.2f}s)"
        )
        return CounterfactualSet(
            query=self.query,
            desired_label=self.desired_label,
            strategy=self.strategy,
            formula=render(self.formula),
            config=cfg,
            candidates=candidates,
            report=report,
            diagnostics=self.diagnostics,
        )


def generate(
    query: Trace,
    desired_label: bool,
    formula: Formula,
    log: EventLog,
    classifier: Classifier,
    config: Optional[GaConfig] = None,
    dfa: Optional[Dfa] = None,
) -> CounterfactualSet:
    """Atalho para CounterfactualGenerator(...).run()"""
    return CounterfactualGenerator(query, desired_label, formula, log, classifier, config, dfa).run()
