from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Iterator, List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from .errors import AlphabetMismatchError

ACTIVITY_NAME_PATTERN = r"^[a-zA-Z_][a-zA-Z0-9_-]*$"


class Strategy(str, Enum):
    """Estratégias de geração disponíveis"""
    GEN = "Gen"
    GEN_PHI = "GenPhi"
    MAR = "MAR"
    APRIORI = "APriori"
    ONLINE = "Online"

    @property
    def is_constrained(self) -> bool:
        """Estratégias que garantem a fórmula nos candidatos extraídos"""
        return self in (Strategy.MAR, Strategy.APRIORI, Strategy.ONLINE)

    @property
    def uses_constrained_crossover(self) -> bool:
        """Estratégias que usam o crossover ciente do conhecimento temporal"""
        return self in (Strategy.APRIORI, Strategy.ONLINE)


class Activity(BaseModel):
    """Uma atividade do alfabeto"""
    model_config = ConfigDict(frozen=True)

    id: int = Field(..., ge=0)
    name: str = Field(..., pattern=ACTIVITY_NAME_PATTERN)


class Alphabet(BaseModel):
    """Conjunto ordenado de atividades (ordem de inserção)"""
    model_config = ConfigDict(frozen=True)

    activities: Tuple[Activity, ...]
    _index: Dict[str, int] = PrivateAttr(default_factory=dict)

    @field_validator("activities")
    @classmethod
    def validate_activities(cls, v: Tuple[Activity, ...]) -> Tuple[Activity, ...]:
        """Valida que o alfabeto não é vazio, sem nomes repetidos e com ids sequenciais"""
        if not v:
            raise ValueError("Alfabeto vazio")
        seen = set()
        for position, activity in enumerate(v):
            if activity.id != position:
                raise ValueError(
                    f"Atividade {activity.name} com id {activity.id}, esperado {position}"
                )
            if activity.name in seen:
                raise ValueError(f"Atividade duplicada no alfabeto: {activity.name}")
            seen.add(activity.name)
        return v

    def model_post_init(self, __context: object) -> None:
        self._index = {a.name: a.id for a in self.activities}

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "Alphabet":
        """Cria um alfabeto a partir dos nomes, na ordem dada"""
        return cls(activities=tuple(Activity(id=i, name=n) for i, n in enumerate(names)))

    def __len__(self) -> int:
        return len(self.activities)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(a.name for a in self.activities)

    @property
    def ids(self) -> range:
        return range(len(self.activities))

    def contains(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        """Retorna o id da atividade pelo nome"""
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"Atividade '{name}' não pertence ao alfabeto") from None

    def get(self, name: str) -> Activity:
        return self.activities[self.index(name)]

    def name_of(self, activity_id: int) -> str:
        return self.activities[activity_id].name

    def ids_of(self, names: Iterable[str]) -> FrozenSet[int]:
        return frozenset(self.index(n) for n in names)


@dataclass(frozen=True)
class Trace:
    """
    Trace de processo: sequência finita e não vazia de atividades

    As atividades são guardadas como ids do alfabeto. Os instantes são numerados de 1 a len(trace)
    nas operações que recebem `instant`; o acesso por índice Python continua 0-based.
    """
    activities: Tuple[int, ...]
    alphabet: Alphabet = field(compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.activities:
            raise ValueError("Trace vazio")
        size = len(self.alphabet)
        for a in self.activities:
            if not 0 <= a < size:
                raise AlphabetMismatchError(f"Atividade de id {a} fora do alfabeto de tamanho {size}")

    @classmethod
    def from_names(cls, names: Sequence[str], alphabet: Alphabet) -> "Trace":
        """Cria um trace a partir dos nomes das atividades"""
        try:
            return cls(tuple(alphabet.index(n) for n in names), alphabet)
        except KeyError as e:
            raise AlphabetMismatchError(str(e.args[0])) from None

    def __len__(self) -> int:
        return len(self.activities)

    def __getitem__(self, index: int) -> int:
        return self.activities[index]

    def __iter__(self) -> Iterator[int]:
        return iter(self.activities)

    def at(self, instant: int) -> int:
        """Atividade no instante `instant` (1-based), τ(i)"""
        return self.activities[instant - 1]

    def names(self) -> List[str]:
        return [self.alphabet.name_of(a) for a in self.activities]

    def prefix(self, length: int) -> "Trace":
        """Prefixo τ(:length)"""
        return Trace(self.activities[:length], self.alphabet)

    def with_activities(self, activities: Sequence[int]) -> "Trace":
        return Trace(tuple(activities), self.alphabet)

    def check_alphabet(self, alphabet: Alphabet) -> None:
        """Lança AlphabetMismatchError se o trace não for sobre `alphabet`"""
        if self.alphabet is not alphabet and self.alphabet != alphabet:
            raise AlphabetMismatchError("Trace definido sobre outro alfabeto")

    def __str__(self) -> str:
        return ",".join(self.names())


class LabeledCase(BaseModel):
    """Caso do log com rótulo binário de desfecho"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    case_id: str
    trace: Trace
    label: bool


class EventLog(BaseModel):
    """Log de eventos: casos rotulados sobre um alfabeto compartilhado"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alphabet: Alphabet
    cases: Tuple[LabeledCase, ...] = ()

    @model_validator(mode="after")
    def validate_cases(self) -> "EventLog":
        """Valida ids únicos e alfabeto compartilhado"""
        seen = set()
        for case in self.cases:
            if case.case_id in seen:
                raise ValueError(f"case_id duplicado: {case.case_id}")
            seen.add(case.case_id)
            case.trace.check_alphabet(self.alphabet)
        return self

    def __len__(self) -> int:
        return len(self.cases)

    @property
    def is_empty(self) -> bool:
        return not self.cases

    def traces(self) -> List[Trace]:
        return [c.trace for c in self.cases]

    def labels(self) -> List[bool]:
        return [c.label for c in self.cases]

    def get_case(self, case_id: str) -> LabeledCase:
        """Retorna o caso pelo id"""
        for case in self.cases:
            if case.case_id == case_id:
                return case
        raise KeyError(f"Caso '{case_id}' não encontrado no log")

    def with_cases(self, cases: Iterable[LabeledCase]) -> "EventLog":
        return EventLog(alphabet=self.alphabet, cases=tuple(cases))


class Domains(BaseModel):
    """Domínios D_i das atividades observadas em cada posição"""
    model_config = ConfigDict(frozen=True)

    per_position: Tuple[FrozenSet[int], ...]
    horizon: int = Field(..., ge=1)

    @model_validator(mode="after")
    def validate_domains(self) -> "Domains":
        if len(self.per_position) != self.horizon:
            raise ValueError("Número de domínios diferente do horizonte")
        for i, domain in enumerate(self.per_position, start=1):
            if not domain:
                raise ValueError(f"Domínio vazio na posição {i}")
        return self

    def at(self, instant: int) -> FrozenSet[int]:
        """D_i para o instante 1-based `instant`"""
        return self.per_position[instant - 1]

    def covers(self, length: int) -> bool:
        return length <= self.horizon


@dataclass(frozen=True)
class Individual:
    """Indivíduo da população: cromossomo e avaliações em cache"""
    chromosome: Trace
    fitness: float
    compliance: int
    score: float
    sparsity: int

    def sort_key(self) -> Tuple[float, int, Tuple[int, ...]]:
        """Ordem total: fitness, depois menor esparsidade, depois cromossomo lexicográfico"""
        return (self.fitness, self.sparsity, self.chromosome.activities)

