from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import ValidationError

from ..models.config import CsvLogOptions
from ..models.entities import Alphabet, Domains, EventLog, LabeledCase, Trace
from ..models.errors import AlphabetMismatchError, DomainError, InputError, LogFormatError

_LABEL_VALUES = {"true": True, "false": False}

CLAIM_ACTIVITIES = (
    "register",
    "createquestionnaire",
    "highinsurancecheck",
    "contacthospital",
    "acceptclaim",
    "rejectclaim",
    "preparenotificationcontent",
    "sendnotificationbyphone",
    "sendnotificationbypost",
)
FILLER_ACTIVITIES = tuple(f"task_{i}" for i in range(1, 8))

# Pesos das atividades de preenchimento por desfecho (task_1 .. task_7)
_FILLER_WEIGHTS = {
    True: np.array([4, 4, 2, 2, 1, 1, 2], dtype=float),
    False: np.array([1, 1, 2, 2, 4, 4, 2], dtype=float),
}
ACCEPT_RATE = 0.55
HOSPITAL_CONTACT_RATE_REJECTED = 0.7


def _parse_label(value: str, case_id: str) -> bool:
    try:
        return _LABEL_VALUES[value.strip().lower()]
    except KeyError:
        raise LogFormatError(f"Rótulo inválido '{value}' no caso {case_id}; use true ou false") from None


def read_csv_log(
    path: Path,
    options: Optional[CsvLogOptions] = None,
    alphabet: Optional[Alphabet] = None,
) -> EventLog:
    """
    Lê um log de eventos no contrato CSV

    Args:
        path: Arquivo CSV com cabeçalho
        options: Nomes das colunas e delimitador
        alphabet: Alfabeto fixo; se omitido, é inferido na ordem de primeira aparição

    Returns:
        EventLog: Casos na ordem de primeira aparição no arquivo
    """
    options = options or CsvLogOptions()
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Arquivo de log não encontrado: {path}")

    try:
        df = pd.read_csv(path, sep=options.delimiter, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise LogFormatError(f"Arquivo de log vazio: {path}") from None
    except pd.errors.ParserError as e:
        raise LogFormatError(f"Erro ao ler o CSV {path}: {e}") from e

    missing = [c for c in options.columns if c not in df.columns]
    if missing:
        raise LogFormatError(f"Colunas ausentes no log: {', '.join(missing)}")
    if df.empty:
        raise LogFormatError(f"Log sem eventos: {path}")

    case_col, pos_col = options.case_column, options.position_column
    act_col, label_col = options.activity_column, options.label_column

    if (df[case_col].str.strip() == "").any():
        raise LogFormatError("Evento sem case_id")
    if (df[act_col].str.strip() == "").any():
        raise LogFormatError("Evento sem atividade")
    positions = pd.to_numeric(df[pos_col], errors="coerce")
    if positions.isna().any() or (positions % 1 != 0).any():
        raise LogFormatError("Coluna position deve conter inteiros")
    df = df.assign(**{pos_col: positions.astype(int)})

    if alphabet is None:
        try:
            alphabet = Alphabet.from_names(pd.unique(df[act_col]))
        except ValidationError as e:
            raise LogFormatError(f"Nome de atividade inválido no log: {e.errors()[0]['msg']}") from e

    cases: List[LabeledCase] = []
    for case_id, group in df.groupby(case_col, sort=False):
        group = group.sort_values(pos_col, kind="stable")
        case_positions = group[pos_col].tolist()
        if len(set(case_positions)) != len(case_positions):
            raise LogFormatError(f"Posição duplicada no caso {case_id}")
        if case_positions != list(range(1, len(case_positions) + 1)):
            raise LogFormatError(f"Posições não contíguas no caso {case_id}: {case_positions}")
        labels = {_parse_label(v, case_id) for v in group[label_col]}
        if len(labels) != 1:
            raise LogFormatError(f"Rótulos conflitantes no caso {case_id}")
        try:
            trace = Trace.from_names(group[act_col].tolist(), alphabet)
        except AlphabetMismatchError as e:
            raise AlphabetMismatchError(f"Caso {case_id}: {e}") from None
        cases.append(LabeledCase(case_id=str(case_id), trace=trace, label=labels.pop()))

    logger.info(f"Log {path.name} carregado: {len(cases)} casos, {len(alphabet)} atividades")
    return EventLog(alphabet=alphabet, cases=tuple(cases))


def write_csv_log(log: EventLog, path: Path, options: Optional[CsvLogOptions] = None) -> Path:
    """
    Escreve o log no contrato CSV, ordenado por (case_id, position)

    Args:
        log: Log de eventos
        path: Arquivo de destino
        options: Nomes das colunas e delimitador

    Returns:
        Path: Caminho do arquivo escrito
    """
    options = options or CsvLogOptions()
    rows = [
        (case.case_id, position, name, "true" if case.label else "false")
        for case in sorted(log.cases, key=lambda c: c.case_id)
        for position, name in enumerate(case.trace.names(), start=1)
    ]
    df = pd.DataFrame(rows, columns=options.columns)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, sep=options.delimiter, index=False, lineterminator="\n")
    logger.info(f"Log com {len(log)} casos salvo em {path}")
    return path


def prefixes(log: EventLog, length: int) -> EventLog:
    """
    Trunca os traces no prefixo de tamanho `length`

    Casos mais curtos que `length` são descartados; os rótulos do caso completo são mantidos.
    """
    if length < 1:
        raise InputError(f"Tamanho de prefixo inválido: {length}")
    return log.with_cases(
        c.model_copy(update={"trace": c.trace.prefix(length)})
        for c in log.cases
        if len(c.trace) >= length
    )


def domains(log: EventLog, horizon: int) -> Domains:
    """
    Calcula os domínios D_i = {τ(i) | τ ∈ T} para i em 1..horizon

    Args:
        log: População de referência
        horizon: Último instante coberto

    Returns:
        Domains: Um conjunto não vazio de atividades por posição
    """
    if horizon < 1:
        raise ValueError(f"Horizonte inválido: {horizon}")
    per_position: List[set] = [set() for _ in range(horizon)]
    for trace in log.traces():
        for index, activity in enumerate(trace.activities[:horizon]):
            per_position[index].add(activity)
    for instant, domain in enumerate(per_position, start=1):
        if not domain:
            raise DomainError(instant)
    return Domains(per_position=tuple(frozenset(d) for d in per_position), horizon=horizon)


def split_chronological(
    log: EventLog, fractions: Sequence[float] = (0.7, 0.1, 0.2)
) -> Tuple[EventLog, EventLog, EventLog]:
    """
    Divide o log em treino, validação e teste mantendo a ordem dos casos

    Args:
        log: Log em ordem cronológica
        fractions: Frações de treino, validação e teste (somam 1)

    Returns:
        Tuple[EventLog, EventLog, EventLog]: treino, validação e teste
    """
    if len(fractions) != 3 or any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"Frações inválidas: {tuple(fractions)}")
    total = len(log)
    n_train = int(np.floor(fractions[0] * total))
    n_val = int(np.floor(fractions[1] * total))
    cases = log.cases
    return (
        log.with_cases(cases[:n_train]),
        log.with_cases(cases[n_train:n_train + n_val]),
        log.with_cases(cases[n_train + n_val:]),
    )


def claim_alphabet() -> Alphabet:
    """Alfabeto de 16 atividades do log sintético de sinistros"""
    return Alphabet.from_names(CLAIM_ACTIVITIES + FILLER_ACTIVITIES)


def _claim_trace(rng: np.random.Generator, accepted: bool) -> List[str]:
    weights = _FILLER_WEIGHTS[accepted] / _FILLER_WEIGHTS[accepted].sum()

    def fillers(high: int) -> List[str]:
        count = int(rng.integers(0, high + 1))
        return [FILLER_ACTIVITIES[i] for i in rng.choice(len(FILLER_ACTIVITIES), size=count, p=weights)]

    names = ["register"]
    names += fillers(3)
    if rng.random() < 0.5:
        names.append("createquestionnaire")
    if rng.random() < 0.5:
        names.append("highinsurancecheck")
    names += fillers(3)
    if accepted:
        names += ["contacthospital", "acceptclaim"]
    elif rng.random() < HOSPITAL_CONTACT_RATE_REJECTED:
        names += ["contacthospital", "rejectclaim"]
    else:
        names.append("rejectclaim")
    names += fillers(3)
    channel = "sendnotificationbyphone" if rng.random() < 0.5 else "sendnotificationbypost"
    names += ["preparenotificationcontent", channel]
    names += fillers(2)
    return names


def generate_claim_log(seed: int, num_cases: int) -> EventLog:
    """
    Gera um log sintético de gestão de sinistros

    O desfecho é sorteado primeiro; as atividades de preenchimento seguem pesos que
    dependem do desfecho. `contacthospital` é sempre seguido imediatamente pela decisão,
    e `preparenotificationcontent` por uma atividade de notificação.

    Args:
        seed: Semente do gerador
        num_cases: Número de casos

    Returns:
        EventLog: Casos com rótulo True quando `acceptclaim` ocorre
    """
    if num_cases < 1:
        raise InputError(f"num_cases deve ser >= 1, recebido {num_cases}")
    rng = np.random.default_rng(seed)
    alphabet = claim_alphabet()
    width = max(5, len(str(num_cases)))
    cases = []
    for number in range(1, num_cases + 1):
        accepted = bool(rng.random() < ACCEPT_RATE)
        names = _claim_trace(rng, accepted)
        cases.append(
            LabeledCase(
                case_id=f"claim_{number:0{width}d}",
                trace=Trace.from_names(names, alphabet),
                label="acceptclaim" in names,
            )
        )
    log = EventLog(alphabet=alphabet, cases=tuple(cases))
    mean_length = float(np.mean([len(t) for t in log.traces()]))
    logger.info(f"Log sintético gerado: {num_cases} casos, tamanho médio {mean_length:.2f}")
    return log


def log_statistics(log: EventLog) -> Dict[str, float]:
    """Resumo do log: casos, atividades, tamanho médio e taxa de positivos"""
    lengths = np.array([len(t) for t in log.traces()], dtype=float)
    labels = np.array(log.labels(), dtype=float)
    return {
        "cases": float(len(log)),
        "activities": float(len(log.alphabet)),
        "mean_length": float(lengths.mean()) if len(lengths) else 0.0,
        "positive_rate": float(labels.mean()) if len(labels) else 0.0,
    }
