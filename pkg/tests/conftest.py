import sys
from pathlib import Path

import numpy as np
import pytest

# Adiciona o diretório raiz ao PYTHONPATH
workspace_root = Path(__file__).parent.parent
sys.path.insert(0, str(workspace_root))

from src.models.entities import Activity, Alphabet, EventLog, LabeledCase, Trace  # noqa: E402
from src.models.formula import (  # noqa: E402
    And,
    Atom,
    FalseConst,
    Next,
    Not,
    Or,
    TrueConst,
    Until,
    eventually,
    globally,
    implies,
    weak_next,
)
from src.services.parser import parse_formula  # noqa: E402

LOAN_ACTIVITIES = ["apply", "aut_chk", "man_chk", "phone", "ok", "offer", "book", "send_doc", "sms", "email"]

PHI_CHK = "(!man_chk) U aut_chk"
PHI_COMM = "!(F phone & F sms) & !(F phone & F email) & !(F sms & F email)"


@pytest.fixture
def loan_alphabet():
    """Fixture para o alfabeto do processo de empréstimo"""
    return Alphabet.from_names(LOAN_ACTIVITIES)


@pytest.fixture
def loan_traces(loan_alphabet):
    """Fixture para a query τ1 e os contrafactuais de exemplo"""
    raw = {
        "tau1": "apply,aut_chk,man_chk,phone,ok,offer,phone,book",
        "c1": "apply,man_chk,aut_chk,phone,ok,offer,phone,send_doc",
        "c2": "apply,aut_chk,man_chk,phone,ok,offer,phone,send_doc",
        "c3": "apply,aut_chk,phone,ok,offer,sms,send_doc",
        "c4": "apply,aut_chk,phone,phone,ok,offer,phone,send_doc,book",
        "c5": "apply,aut_chk,man_chk,phone,ok,offer,email,send_doc",
    }
    return {k: Trace.from_names(v.split(","), loan_alphabet) for k, v in raw.items()}


@pytest.fixture
def phi_chk(loan_alphabet):
    """Fixture para φ_chk: nenhuma verificação manual antes da automática"""
    return parse_formula(PHI_CHK, loan_alphabet)


@pytest.fixture
def phi_comm(loan_alphabet):
    """Fixture para φ_comm: no máximo um canal de comunicação"""
    return parse_formula(PHI_COMM, loan_alphabet)


@pytest.fixture
def loan_log(loan_alphabet, loan_traces):
    """Fixture para um log pequeno com os traces de exemplo"""
    cases = [
        LabeledCase(case_id=f"loan_{i}", trace=trace, label=trace.at(len(trace)) == loan_alphabet.index("book"))
        for i, trace in enumerate(loan_traces.values(), start=1)
    ]
    return EventLog(alphabet=loan_alphabet, cases=tuple(cases))


def make_random_formula(rng: np.random.Generator, alphabet: Alphabet, depth: int):
    """Sorteia uma fórmula de profundidade até `depth` sobre o alfabeto"""
    if depth == 0 or rng.random() < 0.25:
        roll = rng.random()
        if roll < 0.06:
            return TrueConst()
        if roll < 0.1:
            return FalseConst()
        return Atom(alphabet.activities[int(rng.integers(len(alphabet)))])
    kind = int(rng.integers(10))
    sub = lambda: make_random_formula(rng, alphabet, depth - 1)  # noqa: E731
    if kind == 0:
        return Not(sub())
    if kind == 1:
        return And(sub(), sub())
    if kind == 2:
        return Or(sub(), sub())
    if kind == 3:
        return Next(sub())
    if kind == 4:
        return Until(sub(), sub())
    if kind == 5:
        return eventually(sub())
    if kind == 6:
        return globally(sub())
    if kind == 7:
        return implies(sub(), sub())
    if kind == 8:
        return weak_next(sub())
    return Not(Until(sub(), sub()))


@pytest.fixture
def random_formula():
    """Fixture para o gerador de fórmulas aleatórias"""
    return make_random_formula


@pytest.fixture
def random_trace():
    """Fixture para o gerador de traces aleatórios"""

    def build(rng: np.random.Generator, alphabet: Alphabet, length: int) -> Trace:
        return Trace(tuple(int(a) for a in rng.integers(len(alphabet), size=length)), alphabet)

    return build


@pytest.fixture
def small_alphabet():
    """Fixture para um alfabeto de três atividades"""
    return Alphabet(activities=tuple(Activity(id=i, name=n) for i, n in enumerate(["a", "b", "c"])))
