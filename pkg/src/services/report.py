from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from loguru import logger
from rich.console import Console
from rich.table import Table

from ..models.report import CounterfactualSet, MetricsReport
from .classifier import TrainedModel

BENCH_COLUMNS = [
    "strategy",
    "formula_id",
    "coverage",
    "prefix",
    "distance",
    "sparsity",
    "implausibility",
    "diversity",
    "compliance",
    "hit_rate",
    "runtime_seconds",
    "error",
]


def _fmt(value: Optional[float], digits: int = 4) -> str:
    if value is None:
        return "-"
    return f"{value:.{digits}f}"


class ReportGenerator:
    """Serviço responsável pela saída dos resultados: JSON, tabelas no console e CSV do benchmark"""

    def __init__(self, output_dir: Path = Path("output"), console: Optional[Console] = None):
        """
        Inicializa o gerador de relatórios

        Args:
            output_dir: Diretório padrão de saída
            console: Console rich usado nas tabelas
        """
        self.output_dir = Path(output_dir)
        self.console = console or Console()

    def _resolve(self, path: Optional[Path], default_name: str) -> Path:
        path = Path(path) if path is not None else self.output_dir / default_name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def write_counterfactuals(
        self, result: CounterfactualSet, path: Optional[Path] = None, include_runtime: bool = False
    ) -> Path:
        """
        Salva o conjunto de contrafactuais em JSON

        Args:
            result: Resultado do explain
            path: Arquivo de destino (padrão: output/counterfactuals.json)
            include_runtime: Inclui o tempo de execução no JSON

        Returns:
            Path: Caminho do arquivo gerado
        """
        path = self._resolve(path, "counterfactuals.json")
        path.write_text(result.to_json(include_runtime=include_runtime) + "\n", encoding="utf-8")
        logger.info(f"Contrafactuais salvos em {path}")
        return path

    def print_counterfactuals(self, result: CounterfactualSet) -> None:
        """Imprime os contrafactuais e o relatório agregado"""
        report = result.report
        table = Table(title=f"Contrafactuais ({result.strategy.value}) para {result.query}")
        table.add_column("#", justify="right")
        table.add_column("Trace")
        table.add_column("Score", justify="right")
        table.add_column("Dist.", justify="right")
        table.add_column("Spars.", justify="right")
        table.add_column("Implaus.", justify="right")
        table.add_column("Compl.", justify="right")
        for number, (trace, metrics) in enumerate(zip(result.candidates, report.candidates), start=1):
            table.add_row(
                str(number),
                str(trace),
                _fmt(metrics.score, 3),
                _fmt(metrics.distance),
                str(metrics.sparsity),
                _fmt(metrics.implausibility),
                str(metrics.compliance),
            )
        self.console.print(table)
        self.print_metrics(report)

    def print_metrics(self, report: MetricsReport) -> None:
        table = Table(title="Métricas agregadas")
        for column in ("validity", "distance", "sparsity", "implausibility", "compliance",
                       "diversity", "hit_rate", "runtime_seconds"):
            table.add_column(column, justify="right")
        table.add_row(
            _fmt(report.validity),
            _fmt(report.distance),
            _fmt(report.sparsity),
            _fmt(report.implausibility),
            _fmt(report.compliance),
            _fmt(report.diversity),
            _fmt(report.hit_rate),
            _fmt(report.runtime_seconds, 2),
        )
        self.console.print(table)

    def print_training(self, model: TrainedModel) -> None:
        """Imprime as acurácias da divisão cronológica 70/10/20"""
        table = Table(title=f"Modelo linear (prefixo {model.prefix_length})")
        table.add_column("Conjunto")
        table.add_column("Casos", justify="right")
        table.add_column("Acurácia", justify="right")
        table.add_row("treino", str(model.train_size), _fmt(model.train_accuracy))
        table.add_row("validação", str(model.validation_size), _fmt(model.validation_accuracy))
        table.add_row("teste", str(model.test_size), _fmt(model.test_accuracy))
        self.console.print(table)

    def print_compliance(self, rows: Sequence[Dict[str, Any]], fraction: float) -> None:
        """Imprime a conformidade por caso e a fração agregada"""
        table = Table(title="Conformidade por caso")
        table.add_column("case_id")
        table.add_column("compliance", justify="right")
        for row in rows:
            table.add_row(str(row["case_id"]), str(row["compliance"]))
        self.console.print(table)
        self.console.print(f"fraction: {fraction:.4f}")

    def bench_frame(self, rows: Sequence[Dict[str, Any]]) -> pd.DataFrame:
        frame = pd.DataFrame(list(rows))
        for column in BENCH_COLUMNS:
            if column not in frame.columns:
                frame[column] = None
        return frame[BENCH_COLUMNS]

    def write_bench(self, rows: Sequence[Dict[str, Any]], path: Optional[Path] = None) -> Path:
        """
        Salva a grade do benchmark em CSV

        Args:
            rows: Uma linha por célula (estratégia x fórmula x prefixo)
            path: Arquivo de destino (padrão: output/bench.csv)

        Returns:
            Path: Caminho do arquivo gerado
        """
        path = self._resolve(path, "bench.csv")
        self.bench_frame(rows).to_csv(path, index=False, lineterminator="\n")
        logger.info(f"Benchmark salvo em {path}")
        return path

    def print_bench(self, rows: Sequence[Dict[str, Any]]) -> None:
        frame = self.bench_frame(rows)
        table = Table(title="Benchmark")
        columns: List[str] = [c for c in BENCH_COLUMNS if c != "error"]
        for column in columns:
            table.add_column(column, justify="right" if column not in ("strategy", "formula_id") else "left")
        for record in frame.to_dict(orient="records"):
            cells = []
            for column in columns:
                value = record[column]
                if isinstance(value, float):
                    cells.append("-" if pd.isna(value) else f"{value:.4f}")
                else:
                    cells.append("-" if value is None else str(value))
            table.add_row(*cells)
        self.console.print(table)
