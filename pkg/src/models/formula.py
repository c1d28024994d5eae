from dataclasses import dataclass
from typing import FrozenSet, Iterator, Set, Union

from pydantic import BaseModel, ConfigDict, model_validator

from .entities import Activity, Alphabet
from .errors import AlphabetMismatchError


@dataclass(frozen=True)
class TrueConst:
    """Constante verdadeira"""


@dataclass(frozen=True)
class FalseConst:
    """Constante falsa"""


@dataclass(frozen=True)
class Atom:
    """Proposição atômica: a atividade do instante é `activity`"""
    activity: Activity


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Next:
    """Next forte: o próximo instante existe e satisfaz `arg`"""
    arg: "Formula"


@dataclass(frozen=True)
class Until:
    left: "Formula"
    right: "Formula"


Formula = Union[TrueConst, FalseConst, Atom, Not, And, Or, Next, Until]

CORE_NODE_TYPES = (TrueConst, FalseConst, Atom, Not, And, Or, Next, Until)


# Formas derivadas, expandidas para os sete tipos de nó do núcleo

def implies(left: Formula, right: Formula) -> Formula:
    return Or(Not(left), right)


def eventually(arg: Formula) -> Formula:
    return Until(TrueConst(), arg)


def globally(arg: Formula) -> Formula:
    return Not(eventually(Not(arg)))


def weak_next(arg: Formula) -> Formula:
    return Not(Next(Not(arg)))


def subformulas(formula: Formula) -> Iterator[Formula]:
    """Percorre a fórmula em pré-ordem"""
    stack = [formula]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (Not, Next)):
            stack.append(node.arg)
        elif isinstance(node, (And, Or, Until)):
            stack.append(node.right)
            stack.append(node.left)


def atoms(formula: Formula) -> Set[Activity]:
    """Atividades mencionadas na fórmula (Σ_φ)"""
    return {node.activity for node in subformulas(formula) if isinstance(node, Atom)}


def depth(formula: Formula) -> int:
    if isinstance(formula, (Not, Next)):
        return 1 + depth(formula.arg)
    if isinstance(formula, (And, Or, Until)):
        return 1 + max(depth(formula.left), depth(formula.right))
    return 0


def render(formula: Formula) -> str:
    """
    Renderiza a fórmula na sintaxe textual, totalmente parentizada

    Args:
        formula: Fórmula do núcleo

    Returns:
        str: Texto que, reanalisado, produz a mesma AST
    """
    if isinstance(formula, TrueConst):
        return "true"
    if isinstance(formula, FalseConst):
        return "false"
    if isinstance(formula, Atom):
        return formula.activity.name
    if isinstance(formula, Not):
        return f"!({render(formula.arg)})"
    if isinstance(formula, Next):
        return f"X({render(formula.arg)})"
    if isinstance(formula, And):
        return f"({render(formula.left)} & {render(formula.right)})"
    if isinstance(formula, Or):
        return f"({render(formula.left)} | {render(formula.right)})"
    if isinstance(formula, Until):
        return f"({render(formula.left)} U {render(formula.right)})"
    raise TypeError(f"Nó de fórmula desconhecido: {type(formula).__name__}")


class FormulaSignature(BaseModel):
    """Partição do alfabeto entre atividades ativas (Σ_φ) e demais (Θ_other)"""
    model_config = ConfigDict(frozen=True)

    active: FrozenSet[int]
    other: FrozenSet[int]

    @model_validator(mode="after")
    def validate_partition(self) -> "FormulaSignature":
        if self.active & self.other:
            raise ValueError("Atividades ativas e demais devem ser disjuntas")
        return self

    def is_active(self, activity_id: int) -> bool:
        return activity_id in self.active

    def coverage(self) -> float:
        """Cobertura |Σ_φ| / |Σ|"""
        return len(self.active) / (len(self.active) + len(self.other))


def signature(formula: Formula, alphabet: Alphabet) -> FormulaSignature:
    """
    Calcula a assinatura da fórmula sobre o alfabeto

    Args:
        formula: Fórmula do núcleo
        alphabet: Alfabeto Σ

    Returns:
        FormulaSignature: Σ_φ e Θ_other, que particionam Σ
    """
    active = frozenset(a.id for a in atoms(formula))
    for activity in atoms(formula):
        if activity.id >= len(alphabet) or alphabet.activities[activity.id] != activity:
            raise AlphabetMismatchError(f"Atividade '{activity.name}' não pertence ao alfabeto")
    return FormulaSignature(active=active, other=frozenset(alphabet.ids) - active)
