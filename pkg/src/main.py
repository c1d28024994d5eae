from pathlib import Path
from typing import Any, Callable, Dict, Optional

import typer
from loguru import logger
from pydantic import ValidationError
from rich.console import Console

from src.external.client import ExternalClassifier
from src.models.config import BenchConfig, RunConfig, TrainConfig
from src.models.entities import Alphabet, EventLog, Trace
from src.models.errors import (
    AlphabetMismatchError,
    DomainError,
    FormulaSyntaxError,
    HypothesisViolation,
    InputError,
    LogFormatError,
    NothingToExplain,
    TrainingError,
    UnknownActivityError,
)
from src.services.automata import accepts, compile_formula, export_dot
from src.services.bench import BenchRunner
from src.services.classifier import Classifier, LinearClassifier, TrainedModel, train_linear
from src.services.engine import generate
from src.services.event_log import generate_claim_log, log_statistics, prefixes, read_csv_log, write_csv_log
from src.services.parser import parse_formula
from src.services.report import ReportGenerator

app = typer.Typer(help="tempocf - Contrafactuais de traces de processo com conhecimento temporal")
console = Console()
err_console = Console(stderr=True)

INPUT_ERRORS = (
    FormulaSyntaxError,
    UnknownActivityError,
    LogFormatError,
    DomainError,
    TrainingError,
    AlphabetMismatchError,
    InputError,
    ValidationError,
    OSError,
)


def configurar_logger(verbose: int = 0, output_dir: Path = Path("logs")) -> None:
    """Configura o sistema de logs"""
    output_dir.mkdir(exist_ok=True)
    level = "WARNING" if verbose == 0 else ("INFO" if verbose == 1 else "DEBUG")

    logger.remove()  # Remove handlers padrão
    logger.add(
        output_dir / "tempocf_{time}.log",
        rotation="1 day",
        retention="7 days",
        level="DEBUG" if verbose > 1 else "INFO",
        encoding="utf-8",
    )
    logger.add(lambda msg: err_console.print(msg, style="blue", end=""), level=level)


def exit_code_for(error: BaseException) -> int:
    """Mapeia exceções para códigos de saída"""
    if isinstance(error, HypothesisViolation):
        return 3
    if isinstance(error, NothingToExplain):
        return 4
    if isinstance(error, INPUT_ERRORS):
        return 2
    return 1


def run_command(action: Callable[[], None]) -> None:
    """Executa o comando e converte falhas em código de saída"""
    try:
        action()
    except Exception as e:
        code = exit_code_for(e)
        message = str(e)
        logger.error(f"Erro durante execução: {message}")
        err_console.print(f"Erro: {message}", style="red", markup=False)
        raise typer.Exit(code) from None


@app.callback()
def main(
    verbose: int = typer.Option(0, "--verbose", "-v", count=True, help="Aumenta o detalhamento do log"),
):
    """Configura o logger para todos os comandos"""
    configurar_logger(verbose)


def _load_alphabet(log: Optional[Path], alphabet: Optional[str]) -> Alphabet:
    if alphabet:
        return Alphabet.from_names(n.strip() for n in alphabet.split(",") if n.strip())
    if log is None:
        raise InputError("Informe --log ou --alphabet")
    return read_csv_log(log).alphabet


@app.command("compile")
def compile_command(
    formula: Path = typer.Option(..., "--formula", help="Arquivo com a fórmula LTLp"),
    log: Optional[Path] = typer.Option(None, "--log", help="Log CSV que define o alfabeto"),
    alphabet: Optional[str] = typer.Option(None, "--alphabet", help="Alfabeto explícito: a,b,c"),
    dot: Optional[Path] = typer.Option(None, "--dot", "--out", help="Arquivo DOT de saída"),
    max_states: int = typer.Option(100_000, "--max-states", help="Limite de estados da compilação"),
):
    """Compila a fórmula em um DFA mínimo e exporta em DOT"""

    def action() -> None:
        sigma = _load_alphabet(log, alphabet)
        dfa = compile_formula(parse_formula(formula.read_text(encoding="utf-8"), sigma), sigma, max_states)
        if dot is not None:
            dot.parent.mkdir(parents=True, exist_ok=True)
            dot.write_text(export_dot(dfa, formula.stem), encoding="utf-8")
            logger.info(f"DFA exportado em {dot}")
        console.print(f"states: {dfa.num_states}, accepting: {dfa.num_accepting}")

    run_command(action)


@app.command()
def check(
    log: Path = typer.Option(..., "--log", help="Log CSV"),
    formula: Path = typer.Option(..., "--formula", help="Arquivo com a fórmula LTLp"),
    prefix: Optional[int] = typer.Option(None, "--prefix", help="Verifica prefixos deste tamanho"),
):
    """Verifica a conformidade de cada caso do log com a fórmula"""

    def action() -> None:
        event_log = read_csv_log(log)
        if prefix is not None:
            event_log = prefixes(event_log, prefix)
        if event_log.is_empty:
            raise LogFormatError("Nenhum caso para verificar após o prefixo")
        dfa = compile_formula(parse_formula(formula.read_text(encoding="utf-8"), event_log.alphabet),
                              event_log.alphabet)
        rows = [{"case_id": c.case_id, "compliance": int(accepts(dfa, c.trace))} for c in event_log.cases]
        fraction = sum(r["compliance"] for r in rows) / len(rows)
        ReportGenerator(console=console).print_compliance(rows, fraction)

    run_command(action)


@app.command()
def train(
    log: Path = typer.Option(..., "--log", help="Log CSV rotulado"),
    prefix: int = typer.Option(..., "--prefix", help="Tamanho do prefixo"),
    out: Path = typer.Option(Path("output/model.json"), "--out", help="Arquivo JSON do modelo"),
    epochs: int = typer.Option(200, "--epochs"),
    learning_rate: float = typer.Option(0.5, "--learning-rate"),
    l2: float = typer.Option(1e-3, "--l2"),
    batch_size: int = typer.Option(64, "--batch-size"),
    seed: int = typer.Option(42, "--seed"),
):
    """Treina o classificador linear sobre os prefixos do log"""

    def action() -> None:
        config = TrainConfig(epochs=epochs, learning_rate=learning_rate, l2=l2, batch_size=batch_size, seed=seed)
        model = train_linear(read_csv_log(log), prefix, config)
        model.save(out)
        ReportGenerator(console=console).print_training(model)

    run_command(action)


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered not in ("true", "false"):
        raise InputError(f"Valor booleano inválido: {value}; use true ou false")
    return lowered == "true"


def _build_query(event_log: EventLog, case_id: Optional[str], trace: Optional[str], length: int) -> Trace:
    if (case_id is None) == (trace is None):
        raise InputError("Informe exatamente um entre --case-id e --trace")
    if case_id is not None:
        try:
            query = event_log.get_case(case_id).trace
        except KeyError as e:
            raise InputError(e.args[0]) from None
    else:
        query = Trace.from_names([n.strip() for n in trace.split(",") if n.strip()], event_log.alphabet)
    if len(query) < length:
        raise InputError(f"Query de tamanho {len(query)} menor que o prefixo {length}")
    return query.prefix(length)


@app.command()
def explain(
    log: Optional[Path] = typer.Option(None, "--log", help="Log CSV (população de referência)"),
    formula: Optional[Path] = typer.Option(None, "--formula", help="Arquivo com a fórmula LTLp"),
    model: Optional[Path] = typer.Option(None, "--model", help="Modelo linear treinado (JSON)"),
    external: Optional[str] = typer.Option(None, "--external", help="Comando do preditor externo"),
    case_id: Optional[str] = typer.Option(None, "--case-id", help="Caso do log usado como query"),
    trace: Optional[str] = typer.Option(None, "--trace", help="Query explícita: a,b,c"),
    prefix: Optional[int] = typer.Option(None, "--prefix", help="Tamanho do prefixo"),
    desired: Optional[str] = typer.Option(None, "--desired", help="Classe desejada: true ou false"),
    strategy: Optional[str] = typer.Option(None, "--strategy", help="Gen, GenPhi, MAR, APriori ou Online"),
    t: Optional[int] = typer.Option(None, "--t", help="Número de contrafactuais"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Semente"),
    config: Optional[Path] = typer.Option(None, "--config", help="Arquivo chave=valor com a configuração"),
    out: Optional[Path] = typer.Option(None, "--out", help="Arquivo JSON de saída"),
    timing: bool = typer.Option(False, "--timing", help="Inclui o tempo de execução no JSON"),
):
    """Gera contrafactuais para uma query"""

    def action() -> None:
        overrides: Dict[str, Any] = {
            "log": log, "formula": formula, "model": model, "out": out, "prefix_length": prefix,
            "strategy": strategy, "t": t, "seed": seed,
        }
        if config is not None:
            run = RunConfig.from_file(config, overrides)
        else:
            run = RunConfig.from_mapping(overrides)
        if run.log is None or run.formula is None:
            raise InputError("--log e --formula são obrigatórios")
        if (run.model is None) == (external is None):
            raise InputError("Informe exatamente um entre --model e --external")

        event_log = read_csv_log(run.log)
        phi = parse_formula(run.formula.read_text(encoding="utf-8"), event_log.alphabet)
        classifier: Classifier
        if run.model is not None:
            classifier = LinearClassifier(TrainedModel.load(run.model), event_log.alphabet)
            length = run.prefix_length or classifier.prefix_length
        else:
            if run.prefix_length is None:
                raise InputError("--prefix é obrigatório com --external")
            length = run.prefix_length
            classifier = ExternalClassifier(external, event_log.alphabet, prefix_length=length)
        try:
            query = _build_query(event_log, case_id, trace, length)
            desired_label = (not classifier.predict(query)) if desired is None else _parse_bool(desired)
            result = generate(query, desired_label, phi, event_log, classifier, run.ga)
        finally:
            if isinstance(classifier, ExternalClassifier):
                classifier.close()

        reports = ReportGenerator(console=console)
        path = reports.write_counterfactuals(result, run.out, include_runtime=timing)
        reports.print_counterfactuals(result)
        console.print(f"JSON: {path}")

    run_command(action)


@app.command()
def bench(
    config: Path = typer.Option(..., "--config", help="Matriz de experimentos (JSON)"),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV de saída"),
):
    """Executa a grade de experimentos e salva as métricas médias em CSV"""

    def action() -> None:
        bench_config = BenchConfig.from_file(config)
        rows = BenchRunner(bench_config).run()
        reports = ReportGenerator(console=console)
        path = reports.write_bench(rows, out or bench_config.out)
        reports.print_bench(rows)
        console.print(f"CSV: {path}")

    run_command(action)


@app.command("gen-log")
def gen_log(
    seed: int = typer.Option(42, "--seed", help="Semente do gerador"),
    num_cases: int = typer.Option(4800, "--num-cases", help="Número de casos"),
    out: Path = typer.Option(Path("output/claims.csv"), "--out", help="CSV de saída"),
):
    """Gera o log sintético de gestão de sinistros"""

    def action() -> None:
        event_log = generate_claim_log(seed, num_cases)
        write_csv_log(event_log, out)
        stats = log_statistics(event_log)
        console.print(
            f"cases: {int(stats['cases'])}, activities: {int(stats['activities'])}, "
            f"mean length: {stats['mean_length']:.2f}, positive rate: {stats['positive_rate']:.3f}"
        )

    run_command(action)


if __name__ == "__main__":
    # Configura e executa a aplicação
    app()
