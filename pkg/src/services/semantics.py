from typing import Dict, Tuple

from ..models.entities import Trace
from ..models.errors import AlphabetMismatchError
from ..models.formula import (
    And,
    Atom,
    FalseConst,
    Formula,
    Next,
    Not,
    Or,
    TrueConst,
    Until,
    atoms,
)


class TraceEvaluator:
    """
    Avaliador posicional da semântica LTLp sobre um único trace

    Implementa diretamente a definição indutiva de τ,i ⊨ φ, com memoização por
    (nó, instante). Não usa autômatos: é o oráculo independente do compilador.
    """

    def __init__(self, trace: Trace):
        self.trace = trace
        self.length = len(trace)
        self._memo: Dict[Tuple[int, int], bool] = {}

    def holds(self, formula: Formula, instant: int) -> bool:
        """
        Verifica τ,i ⊨ φ

        Args:
            formula: Fórmula do núcleo
            instant: Instante 1-based, 1 <= instant <= len(τ)

        Returns:
            bool: True se a fórmula vale no instante
        """
        key = (id(formula), instant)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        result = self._holds(formula, instant)
        self._memo[key] = result
        return result

    def _holds(self, formula: Formula, instant: int) -> bool:
        if isinstance(formula, TrueConst):
            return True
        if isinstance(formula, FalseConst):
            return False
        if isinstance(formula, Atom):
            return self.trace.at(instant) == formula.activity.id
        if isinstance(formula, Not):
            return not self.holds(formula.arg, instant)
        if isinstance(formula, And):
            return self.holds(formula.left, instant) and self.holds(formula.right, instant)
        if isinstance(formula, Or):
            return self.holds(formula.left, instant) or self.holds(formula.right, instant)
        if isinstance(formula, Next):
            # next forte: falha no último instante
            return instant < self.length and self.holds(formula.arg, instant + 1)
        if isinstance(formula, Until):
            for j in range(instant, self.length + 1):
                if self.holds(formula.right, j):
                    return True
                if not self.holds(formula.left, j):
                    return False
            return False
        raise TypeError(f"Nó de fórmula desconhecido: {type(formula).__name__}")


def _check_alphabet(trace: Trace, formula: Formula) -> None:
    alphabet = trace.alphabet
    for activity in atoms(formula):
        if activity.id >= len(alphabet) or alphabet.activities[activity.id] != activity:
            raise AlphabetMismatchError(
                f"Atividade '{activity.name}' da fórmula não pertence ao alfabeto do trace"
            )


def holds_at(trace: Trace, instant: int, formula: Formula) -> bool:
    """Verifica τ,i ⊨ φ para um instante 1-based"""
    _check_alphabet(trace, formula)
    if not 1 <= instant <= len(trace):
        raise ValueError(f"Instante {instant} fora do trace de tamanho {len(trace)}")
    return TraceEvaluator(trace).holds(formula, instant)


def evaluate(trace: Trace, formula: Formula) -> bool:
    """
    Verifica se o trace satisfaz a fórmula (τ ⊨ φ, avaliado no instante 1)

    Args:
        trace: Trace não vazio
        formula: Fórmula do núcleo sobre o mesmo alfabeto

    Returns:
        bool: True se τ ⊨ φ
    """
    return holds_at(trace, 1, formula)
