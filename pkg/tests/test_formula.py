import pytest
from pydantic import ValidationError

from src.models.entities import Alphabet
from src.models.errors import AlphabetMismatchError
from src.models.formula import (
    And,
    Atom,
    FormulaSignature,
    Next,
    Not,
    TrueConst,
    Until,
    atoms,
    depth,
    eventually,
    render,
    signature,
    subformulas,
)
from src.services.parser import parse_formula


def test_signature_partitions_alphabet(loan_alphabet, phi_chk, phi_comm):
    """Testa Σ_φ e Θ_other das fórmulas de exemplo"""
    sig = signature(phi_chk, loan_alphabet)
    assert sig.active == loan_alphabet.ids_of(["aut_chk", "man_chk"])
    assert sig.other == frozenset(loan_alphabet.ids) - sig.active
    assert sig.coverage() == pytest.approx(0.2)
    assert sig.is_active(loan_alphabet.index("man_chk"))
    assert not sig.is_active(loan_alphabet.index("apply"))

    comm = signature(phi_comm, loan_alphabet)
    assert comm.active == loan_alphabet.ids_of(["phone", "sms", "email"])


def test_signature_of_constant_formula(loan_alphabet):
    """Testa que fórmulas sem átomos têm Σ_φ vazio"""
    sig = signature(TrueConst(), loan_alphabet)
    assert sig.active == frozenset()
    assert sig.coverage() == 0.0


def test_signature_must_be_disjoint():
    """Testa a validação de partição disjunta"""
    with pytest.raises(ValidationError):
        FormulaSignature(active=frozenset({0, 1}), other=frozenset({1, 2}))


def test_signature_rejects_foreign_atoms(loan_alphabet):
    """Testa erro para átomos de outro alfabeto"""
    other = Alphabet.from_names(["apply", "zzz"])
    formula = parse_formula("zzz", other)
    with pytest.raises(AlphabetMismatchError):
        signature(formula, loan_alphabet)


def test_atoms_depth_and_subformulas(small_alphabet):
    """Testa as funções estruturais sobre a AST"""
    a, b = Atom(small_alphabet.get("a")), Atom(small_alphabet.get("b"))
    formula = And(Not(a), Until(a, Next(b)))
    assert atoms(formula) == {small_alphabet.get("a"), small_alphabet.get("b")}
    assert depth(formula) == 3
    assert depth(a) == 0
    nodes = list(subformulas(formula))
    assert nodes[0] == formula
    assert nodes[1] == Not(a)
    assert len(nodes) == 7


def test_render_derived_forms(small_alphabet):
    """Testa o texto gerado para formas derivadas"""
    a = Atom(small_alphabet.get("a"))
    assert render(eventually(a)) == "(true U a)"
    assert render(Not(Next(a))) == "!(X(a))"


def test_formula_nodes_are_hashable(small_alphabet):
    """Testa igualdade estrutural e hash dos nós"""
    a1 = Atom(small_alphabet.get("a"))
    a2 = Atom(small_alphabet.get("a"))
    assert a1 == a2
    assert len({Until(a1, a2), Until(a2, a1)}) == 1
