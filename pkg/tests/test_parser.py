import numpy as np
import pytest

from src.models.entities import Alphabet
from src.models.errors import FormulaSyntaxError, UnknownActivityError
from src.models.formula import (
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
    render,
    weak_next,
)
from src.services.parser import parse_formula, tokenize


@pytest.fixture
def alphabet():
    """Fixture para um alfabeto com nome hifenizado"""
    return Alphabet.from_names(["a", "b", "c", "send-doc"])


def atom(alphabet, name):
    return Atom(alphabet.get(name))


def test_parse_atoms_and_constants(alphabet):
    """Testa átomos e constantes"""
    assert parse_formula("a", alphabet) == atom(alphabet, "a")
    assert parse_formula("true", alphabet) == TrueConst()
    assert parse_formula("false", alphabet) == FalseConst()


def test_precedence(alphabet):
    """Testa a precedência ! > X,F,G > U > & > | > ->"""
    a, b, c = (atom(alphabet, n) for n in "abc")
    assert parse_formula("!a U b", alphabet) == Until(Not(a), b)
    assert parse_formula("X a & b", alphabet) == And(Next(a), b)
    assert parse_formula("a & b | c", alphabet) == Or(And(a, b), c)
    assert parse_formula("a | b -> c", alphabet) == implies(Or(a, b), c)
    assert parse_formula("a U b & c", alphabet) == And(Until(a, b), c)
    assert parse_formula("F a | G b", alphabet) == Or(eventually(a), globally(b))


def test_right_associativity(alphabet):
    """Testa a associatividade à direita de U e ->"""
    a, b, c = (atom(alphabet, n) for n in "abc")
    assert parse_formula("a U b U c", alphabet) == Until(a, Until(b, c))
    assert parse_formula("a -> b -> c", alphabet) == implies(a, implies(b, c))


def test_derived_forms_are_desugared(alphabet):
    """Testa que F, G, N e -> viram nós do núcleo"""
    a, b = atom(alphabet, "a"), atom(alphabet, "b")
    assert parse_formula("F a", alphabet) == Until(TrueConst(), a)
    assert parse_formula("G a", alphabet) == Not(Until(TrueConst(), Not(a)))
    assert parse_formula("N a", alphabet) == weak_next(a) == Not(Next(Not(a)))
    assert parse_formula("a -> b", alphabet) == Or(Not(a), b)


def test_hyphenated_identifier_and_arrow(alphabet):
    """Testa identificadores com hífen sem confundir com ->"""
    a, doc = atom(alphabet, "a"), atom(alphabet, "send-doc")
    assert parse_formula("send-doc", alphabet) == doc
    assert parse_formula("a->send-doc", alphabet) == implies(a, doc)


def test_comments_and_newlines(alphabet):
    """Testa comentários e fórmulas em várias linhas"""
    text = "# comentário\n(a\n  & b) # fim\n"
    assert parse_formula(text, alphabet) == And(atom(alphabet, "a"), atom(alphabet, "b"))


def test_unknown_activity(alphabet):
    """Testa erro para atividade fora do alfabeto"""
    with pytest.raises(UnknownActivityError) as exc:
        parse_formula("a & zzz", alphabet)
    assert exc.value.token == "zzz"
    assert exc.value.column == 5


def test_syntax_errors_report_position(alphabet):
    """Testa erros de sintaxe com linha e coluna"""
    with pytest.raises(FormulaSyntaxError) as exc:
        parse_formula("(a & b", alphabet)
    assert exc.value.line == 1

    with pytest.raises(FormulaSyntaxError) as exc:
        parse_formula("a\n& $", alphabet)
    assert (exc.value.line, exc.value.column) == (2, 3)

    with pytest.raises(FormulaSyntaxError):
        parse_formula("a b", alphabet)

    with pytest.raises(FormulaSyntaxError):
        parse_formula("", alphabet)


def test_tokenize_keywords():
    """Testa a classificação das palavras reservadas"""
    kinds = [t.kind for t in tokenize("X N U F G true false x")]
    assert kinds == ["NEXT", "WEAK_NEXT", "UNTIL", "EVENTUALLY", "GLOBALLY", "TRUE", "FALSE", "IDENT", "EOF"]


def test_render_round_trip(random_formula):
    """Testa que render produz texto que reanalisa para a mesma AST"""
    alphabet = Alphabet.from_names(["a", "b", "c"])
    rng = np.random.default_rng(11)
    for _ in range(200):
        formula = random_formula(rng, alphabet, 4)
        assert parse_formula(render(formula), alphabet) == formula
