from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger
from rich.progress import Progress

from ..models.config import BenchConfig, BenchFormula
from ..models.entities import EventLog, Strategy, Trace
from ..models.formula import Formula, signature
from ..models.report import MetricsReport
from .automata import Dfa, accepts, compile_formula
from .classifier import LinearClassifier, train_linear
from .engine import generate
from .event_log import generate_claim_log, prefixes, read_csv_log, split_chronological
from .parser import parse_formula

METRIC_COLUMNS = ("distance", "sparsity", "implausibility", "diversity", "compliance", "hit_rate", "runtime_seconds")


def _derived_seed(*parts: int) -> int:
    """Semente independente derivada de (semente mestre, índices da célula)"""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _mean(values: List[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


class BenchRunner:
    """Executa a grade estratégias x fórmulas x prefixos sobre um log"""

    def __init__(self, config: BenchConfig, log: Optional[EventLog] = None, show_progress: bool = True):
        """
        Inicializa o benchmark

        Args:
            config: Matriz de experimentos
            log: Log já carregado; se omitido, vem de `config.log` ou do gerador sintético
            show_progress: Exibe a barra de progresso do rich
        """
        self.config = config
        self.show_progress = show_progress
        self.log = log if log is not None else self._load_log()

    def _load_log(self) -> EventLog:
        if self.config.log is not None:
            return read_csv_log(self.config.log)
        logger.info(
            f"Gerando log sintético (semente {self.config.log_seed}, {self.config.num_cases} casos)"
        )
        return generate_claim_log(self.config.log_seed, self.config.num_cases)

    def _formulas(self) -> List[Tuple[BenchFormula, Formula, Dfa]]:
        compiled = []
        for entry in self.config.formulas:
            formula = parse_formula(entry.path.read_text(encoding="utf-8"), self.log.alphabet)
            compiled.append((entry, formula, compile_formula(formula, self.log.alphabet)))
        return compiled

    def sample_queries(
        self, test: EventLog, dfa: Dfa, formula_index: int, prefix_index: int
    ) -> List[Trace]:
        """
        Sorteia as queries do conjunto de teste entre os prefixos que satisfazem a fórmula

        O sorteio é uniforme e usa uma semente derivada da célula, então todas as estratégias
        recebem as mesmas queries.
        """
        eligible = [t for t in test.traces() if accepts(dfa, t)]
        if len(eligible) <= self.config.queries:
            return eligible
        rng = np.random.default_rng(_derived_seed(self.config.seed, formula_index, prefix_index))
        picked = sorted(rng.choice(len(eligible), size=self.config.queries, replace=False).tolist())
        return [eligible[i] for i in picked]

    def _cell(
        self,
        strategy: Strategy,
        entry: BenchFormula,
        formula: Formula,
        dfa: Dfa,
        prefix_length: int,
        population: EventLog,
        classifier: LinearClassifier,
        queries: List[Trace],
        cell_index: int,
    ) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "strategy": strategy.value,
            "formula_id": entry.id,
            "coverage": signature(formula, self.log.alphabet).coverage(),
            "prefix": prefix_length,
        }
        if not queries:
            row["error"] = "Nenhuma query do conjunto de teste satisfaz a fórmula"
            return row
        reports: List[MetricsReport] = []
        for query_index, query in enumerate(queries):
            config = self.config.ga.model_copy(
                update={"strategy": strategy, "seed": _derived_seed(self.config.seed, cell_index, query_index)}
            )
            desired = not classifier.predict(query)
            result = generate(query, desired, formula, population, classifier, config, dfa)
            reports.append(result.report)
        for column in METRIC_COLUMNS:
            row[column] = _mean([getattr(r, column) for r in reports])
        return row

    def run(self) -> List[Dict[str, Any]]:
        """
        Executa todas as células

        Falhas de uma célula são registradas na coluna `error` e a execução continua.

        Returns:
            List[Dict[str, Any]]: Uma linha por (prefixo, fórmula, estratégia)
        """
        formulas = self._formulas()
        cells = len(self.config.prefix_lengths) * len(formulas) * len(self.config.strategies)
        rows: List[Dict[str, Any]] = []
        cell_index = 0
        with Progress(disable=not self.show_progress, transient=True) as progress:
            task = progress.add_task("Benchmark", total=cells)
            for prefix_index, n in enumerate(self.config.prefix_lengths):
                prefixed = prefixes(self.log, n)
                train, _, test = split_chronological(prefixed)
                classifier = LinearClassifier(train_linear(self.log, n, self.config.train), self.log.alphabet)
                for formula_index, (entry, formula, dfa) in enumerate(formulas):
                    queries = self.sample_queries(test, dfa, formula_index, prefix_index)
                    for strategy in self.config.strategies:
                        progress.update(task, description=f"{strategy.value} / {entry.id} / prefixo {n}")
                        try:
                            row = self._cell(
                                strategy, entry, formula, dfa, n, train, classifier, queries, cell_index
                            )
                        except Exception as e:
                            logger.warning(f"Célula {strategy.value}/{entry.id}/{n} falhou: {e}")
                            row = {
                                "strategy": strategy.value,
                                "formula_id": entry.id,
                                "coverage": signature(formula, self.log.alphabet).coverage(),
                                "prefix": n,
                                "error": str(e),
                            }
                        rows.append(row)
                        cell_index += 1
                        progress.advance(task)
        logger.info(f"Benchmark concluído: {len(rows)} células")
        return rows
