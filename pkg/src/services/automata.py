from collections import deque
from typing import Dict, FrozenSet, List, Sequence, Set, Tuple

from loguru import logger

from ..models.entities import Alphabet, Trace
from ..models.errors import StateBudgetExceeded
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
    signature,
)

DEFAULT_MAX_STATES = 100_000


class Dfa:
    """
    Autômato finito determinístico sobre traces de processo

    Cada transição é rotulada por uma única atividade. A tabela `delta` é densa
    (num_states x |Σ|) e total.
    """

    def __init__(
        self,
        alphabet: Alphabet,
        delta: Sequence[Sequence[int]],
        initial: int,
        accepting: Sequence[bool],
    ):
        self.alphabet = alphabet
        self.delta: Tuple[Tuple[int, ...], ...] = tuple(tuple(row) for row in delta)
        self.initial = initial
        self.accepting: Tuple[bool, ...] = tuple(bool(a) for a in accepting)
        self._validate()

    def _validate(self) -> None:
        n = len(self.delta)
        if n == 0:
            raise ValueError("DFA sem estados")
        if len(self.accepting) != n:
            raise ValueError("Marcação de aceitação com tamanho diferente do número de estados")
        if not 0 <= self.initial < n:
            raise ValueError(f"Estado inicial {self.initial} inválido")
        width = len(self.alphabet)
        for state, row in enumerate(self.delta):
            if len(row) != width:
                raise ValueError(f"Transições incompletas no estado {state}")
            for target in row:
                if not 0 <= target < n:
                    raise ValueError(f"Transição do estado {state} para estado inexistente {target}")

    @property
    def num_states(self) -> int:
        return len(self.delta)

    @property
    def accepting_states(self) -> List[int]:
        return [q for q, acc in enumerate(self.accepting) if acc]

    @property
    def num_accepting(self) -> int:
        return sum(self.accepting)

    def step(self, state: int, activity: int) -> int:
        return self.delta[state][activity]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dfa):
            return NotImplemented
        return (
            self.alphabet.names == other.alphabet.names
            and self.delta == other.delta
            and self.initial == other.initial
            and self.accepting == other.accepting
        )

    def __hash__(self) -> int:
        return hash((self.alphabet.names, self.delta, self.initial, self.accepting))

    def __repr__(self) -> str:
        return f"Dfa(states={self.num_states}, accepting={self.num_accepting}, |Σ|={len(self.alphabet)})"


# Resíduos: forma normal disjuntiva absorvida sobre obrigações.
# Literal k+1 (positivo) ou -(k+1) (negativo) para a obrigação k, que significa
# "o sufixo restante é não vazio e satisfaz a subfórmula k".
Cube = FrozenSet[int]
Residual = FrozenSet[Cube]

TOP: Residual = frozenset({frozenset()})
BOTTOM: Residual = frozenset()


def _absorb(cubes: Set[Cube]) -> Residual:
    kept: List[Cube] = []
    for cube in sorted(cubes, key=len):
        if not any(k <= cube for k in kept):
            kept.append(cube)
    return frozenset(kept)


def _or(left: Residual, right: Residual) -> Residual:
    if left == TOP or right == TOP:
        return TOP
    if not left:
        return right
    if not right:
        return left
    return _absorb(set(left) | set(right))


def _and(left: Residual, right: Residual) -> Residual:
    if not left or not right:
        return BOTTOM
    if left == TOP:
        return right
    if right == TOP:
        return left
    cubes: Set[Cube] = set()
    for a in left:
        for b in right:
            cube = a | b
            if not any(-lit in cube for lit in cube):
                cubes.add(cube)
    return _absorb(cubes)


def _not(residual: Residual) -> Residual:
    result = TOP
    for cube in residual:
        if not cube:
            return BOTTOM
        clause = frozenset(frozenset({-lit}) for lit in cube)
        result = _and(result, clause)
        if not result:
            break
    return result


def _end_value(residual: Residual) -> bool:
    """Valoração de fim de trace: obrigações pendentes valem falso"""
    return any(all(lit < 0 for lit in cube) for cube in residual)


class _DerivativeCompiler:
    """Construção do DFA por derivadas de fórmulas com letras de uma única atividade"""

    def __init__(self, alphabet: Alphabet, max_states: int):
        self.alphabet = alphabet
        self.max_states = max_states
        self.obligations: List[Formula] = []
        self._obligation_ids: Dict[Formula, int] = {}
        self._formula_derivatives: Dict[Tuple[int, int], Residual] = {}
        self._literal_derivatives: Dict[Tuple[int, int], Residual] = {}

    def _literal(self, formula: Formula) -> int:
        index = self._obligation_ids.get(formula)
        if index is None:
            index = len(self.obligations)
            self.obligations.append(formula)
            self._obligation_ids[formula] = index
        return index + 1

    def derive_formula(self, formula: Formula, activity: int) -> Residual:
        key = (id(formula), activity)
        cached = self._formula_derivatives.get(key)
        if cached is not None:
            return cached
        result = self._derive_formula(formula, activity)
        self._formula_derivatives[key] = result
        return result

    def _derive_formula(self, formula: Formula, activity: int) -> Residual:
        if isinstance(formula, TrueConst):
            return TOP
        if isinstance(formula, FalseConst):
            return BOTTOM
        if isinstance(formula, Atom):
            return TOP if formula.activity.id == activity else BOTTOM
        if isinstance(formula, Not):
            return _not(self.derive_formula(formula.arg, activity))
        if isinstance(formula, And):
            return _and(
                self.derive_formula(formula.left, activity),
                self.derive_formula(formula.right, activity),
            )
        if isinstance(formula, Or):
            return _or(
                self.derive_formula(formula.left, activity),
                self.derive_formula(formula.right, activity),
            )
        if isinstance(formula, Next):
            return frozenset({frozenset({self._literal(formula.arg)})})
        if isinstance(formula, Until):
            pending = frozenset({frozenset({self._literal(formula)})})
            return _or(
                self.derive_formula(formula.right, activity),
                _and(self.derive_formula(formula.left, activity), pending),
            )
        raise TypeError(f"Nó de fórmula desconhecido: {type(formula).__name__}")

    def _derive_literal(self, literal: int, activity: int) -> Residual:
        key = (literal, activity)
        cached = self._literal_derivatives.get(key)
        if cached is not None:
            return cached
        result = self.derive_formula(self.obligations[abs(literal) - 1], activity)
        if literal < 0:
            result = _not(result)
        self._literal_derivatives[key] = result
        return result

    def derive(self, residual: Residual, activity: int) -> Residual:
        result = BOTTOM
        for cube in residual:
            conj = TOP
            for literal in sorted(cube):
                conj = _and(conj, self._derive_literal(literal, activity))
                if not conj:
                    break
            result = _or(result, conj)
            if result == TOP:
                break
        return result

    def build(self, formula: Formula) -> Dfa:
        initial = frozenset({frozenset({self._literal(formula)})})
        index: Dict[Residual, int] = {initial: 0}
        states: List[Residual] = [initial]
        delta: List[List[int]] = []
        queue = deque([initial])
        while queue:
            residual = queue.popleft()
            row = []
            for activity in self.alphabet.ids:
                target = self.derive(residual, activity)
                target_id = index.get(target)
                if target_id is None:
                    if len(states) >= self.max_states:
                        raise StateBudgetExceeded(self.max_states)
                    target_id = len(states)
                    index[target] = target_id
                    states.append(target)
                    queue.append(target)
                row.append(target_id)
            delta.append(row)
        accepting = [_end_value(r) for r in states]
        return Dfa(self.alphabet, delta, 0, accepting)


def compile_formula(
    formula: Formula,
    alphabet: Alphabet,
    max_states: int = DEFAULT_MAX_STATES,
    minimized: bool = True,
) -> Dfa:
    """
    Compila uma fórmula LTLp em um DFA sobre traces de processo

    Args:
        formula: Fórmula do núcleo
        alphabet: Alfabeto Σ dos rótulos de transição
        max_states: Limite de estados da construção por derivadas
        minimized: Se True, aplica a minimização de Hopcroft

    Returns:
        Dfa: Autômato que aceita exatamente os traces não vazios que satisfazem a fórmula
    """
    signature(formula, alphabet)
    dfa = _DerivativeCompiler(alphabet, max_states).build(formula)
    logger.debug(f"Construção por derivadas gerou {dfa.num_states} estados")
    if minimized:
        dfa = minimize(dfa)
    logger.info(f"DFA compilado: {dfa.num_states} estados, {dfa.num_accepting} de aceitação")
    return dfa


def _reachable(dfa: Dfa) -> List[int]:
    seen = {dfa.initial}
    order = [dfa.initial]
    queue = deque([dfa.initial])
    while queue:
        state = queue.popleft()
        for target in dfa.delta[state]:
            if target not in seen:
                seen.add(target)
                order.append(target)
                queue.append(target)
    return order


def _renumber(dfa: Dfa, block_of: Dict[int, int]) -> Dfa:
    """Reconstrói o DFA sobre os blocos, numerando os estados em BFS a partir do inicial"""
    representative: Dict[int, int] = {}
    for state in sorted(block_of):
        representative.setdefault(block_of[state], state)
    numbering = {block_of[dfa.initial]: 0}
    order = [block_of[dfa.initial]]
    queue = deque(order)
    while queue:
        block = queue.popleft()
        for target in dfa.delta[representative[block]]:
            target_block = block_of[target]
            if target_block not in numbering:
                numbering[target_block] = len(order)
                order.append(target_block)
                queue.append(target_block)
    delta = [
        [numbering[block_of[t]] for t in dfa.delta[representative[block]]] for block in order
    ]
    accepting = [dfa.accepting[representative[block]] for block in order]
    return Dfa(dfa.alphabet, delta, 0, accepting)


def minimize(dfa: Dfa) -> Dfa:
    """
    Minimiza o DFA por refinamento de partições (Hopcroft)

    Remove estados inalcançáveis antes de refinar. A numeração final segue a ordem de
    visita em largura a partir do estado inicial, então minimize é idempotente.

    Args:
        dfa: DFA total

    Returns:
        Dfa: DFA equivalente com o menor número de estados
    """
    states = _reachable(dfa)
    alphabet_size = len(dfa.alphabet)
    inverse: List[Dict[int, List[int]]] = [dict() for _ in range(alphabet_size)]
    for state in states:
        for activity, target in enumerate(dfa.delta[state]):
            inverse[activity].setdefault(target, []).append(state)

    accepting = {q for q in states if dfa.accepting[q]}
    rejecting = {q for q in states if not dfa.accepting[q]}
    blocks: List[Set[int]] = [b for b in (accepting, rejecting) if b]
    block_of: Dict[int, int] = {}
    for block_id, block in enumerate(blocks):
        for state in block:
            block_of[state] = block_id

    worklist: List[int] = []
    if len(blocks) == 2:
        worklist.append(0 if len(blocks[0]) <= len(blocks[1]) else 1)
    in_worklist = set(worklist)

    while worklist:
        splitter_id = worklist.pop()
        in_worklist.discard(splitter_id)
        splitter = set(blocks[splitter_id])
        for activity in range(alphabet_size):
            predecessors: Set[int] = set()
            for target in splitter:
                predecessors.update(inverse[activity].get(target, ()))
            if not predecessors:
                continue
            touched = sorted({block_of[q] for q in predecessors})
            for block_id in touched:
                block = blocks[block_id]
                inside = block & predecessors
                if len(inside) == len(block):
                    continue
                outside = block - inside
                blocks[block_id] = inside
                new_id = len(blocks)
                blocks.append(outside)
                for state in outside:
                    block_of[state] = new_id
                if block_id in in_worklist:
                    worklist.append(new_id)
                    in_worklist.add(new_id)
                else:
                    smaller = block_id if len(inside) <= len(outside) else new_id
                    worklist.append(smaller)
                    in_worklist.add(smaller)

    return _renumber(dfa, block_of)


def run_path(dfa: Dfa, trace: Trace) -> List[int]:
    """
    Sequência de estados visitados ao ler o trace

    Args:
        dfa: DFA sobre o alfabeto do trace
        trace: Trace não vazio

    Returns:
        List[int]: len(trace)+1 estados, começando pelo inicial
    """
    trace.check_alphabet(dfa.alphabet)
    path = [dfa.initial]
    state = dfa.initial
    for activity in trace.activities:
        state = dfa.delta[state][activity]
        path.append(state)
    return path


def accepts(dfa: Dfa, trace: Trace) -> bool:
    """Verifica se a execução do DFA sobre o trace termina em estado de aceitação"""
    trace.check_alphabet(dfa.alphabet)
    state = dfa.initial
    for activity in trace.activities:
        state = dfa.delta[state][activity]
    return dfa.accepting[state]


def safe_activities(dfa: Dfa, trace: Trace, instant: int) -> FrozenSet[int]:
    """
    Atividades que, no lugar de τ(i), levam o DFA ao mesmo próximo estado

    Args:
        dfa: DFA A_φ
        trace: Trace atual
        instant: Instante 1-based

    Returns:
        FrozenSet[int]: Conjunto seguro; sempre contém τ(i)
    """
    if not 1 <= instant <= len(trace):
        raise ValueError(f"Instante {instant} fora do trace de tamanho {len(trace)}")
    trace.check_alphabet(dfa.alphabet)
    state = dfa.initial
    for activity in trace.activities[: instant - 1]:
        state = dfa.delta[state][activity]
    row = dfa.delta[state]
    target = row[trace.at(instant)]
    return frozenset(a for a, t in enumerate(row) if t == target)


def is_trap(dfa: Dfa, state: int) -> bool:
    """Verifica se nenhum estado de aceitação é alcançável a partir de `state`"""
    seen = {state}
    queue = deque([state])
    while queue:
        current = queue.popleft()
        if dfa.accepting[current]:
            return False
        for target in dfa.delta[current]:
            if target not in seen:
                seen.add(target)
                queue.append(target)
    return True


def export_dot(dfa: Dfa, name: str = "dfa") -> str:
    """
    Exporta o DFA em Graphviz DOT

    Transições entre o mesmo par de estados são agrupadas em uma aresta rotulada
    com o conjunto de atividades. A ordem de saída é determinística.

    Args:
        dfa: DFA a exportar
        name: Nome do grafo

    Returns:
        str: Texto DOT
    """
    lines = [
        f'digraph "{name}" {{',
        "  rankdir=LR;",
        '  __start [shape=point, label=""];',
    ]
    for state in range(dfa.num_states):
        shape = "doublecircle" if dfa.accepting[state] else "circle"
        lines.append(f'  q{state} [shape={shape}, label="q{state}"];')
    lines.append(f"  __start -> q{dfa.initial};")
    for state in range(dfa.num_states):
        grouped: Dict[int, List[str]] = {}
        for activity, target in enumerate(dfa.delta[state]):
            grouped.setdefault(target, []).append(dfa.alphabet.name_of(activity))
        for target in sorted(grouped):
            label = ", ".join(grouped[target])
            lines.append(f'  q{state} -> q{target} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

