import re
from dataclasses import dataclass
from typing import List, Optional

from loguru import logger

from ..models.entities import Alphabet
from ..models.errors import FormulaSyntaxError, UnknownActivityError
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
    eventually,
    globally,
    implies,
    weak_next,
)

# Um "-" seguido de ">" encerra o identificador, para que "a->b" seja uma implicação
_IDENT = r"[a-zA-Z_][a-zA-Z0-9_]*(?:-(?!>)[a-zA-Z0-9_]*)*"

_TOKEN_SPEC = [
    ("COMMENT", r"\#[^\n]*"),
    ("NEWLINE", r"\n"),
    ("SPACE", r"[ \t\r]+"),
    ("ARROW", r"->"),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("NOT", r"!"),
    ("AND", r"&"),
    ("OR", r"\|"),
    ("IDENT", _IDENT),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))

KEYWORDS = {"X": "NEXT", "N": "WEAK_NEXT", "U": "UNTIL", "F": "EVENTUALLY", "G": "GLOBALLY",
            "true": "TRUE", "false": "FALSE"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    """
    Quebra o texto da fórmula em tokens

    Args:
        text: Texto da fórmula

    Returns:
        List[Token]: Tokens, terminando com um token EOF
    """
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise FormulaSyntaxError(f"Caractere inesperado '{text[pos]}'", line, pos - line_start + 1)
        kind = match.lastgroup
        value = match.group()
        column = pos - line_start + 1
        if kind == "NEWLINE":
            line += 1
            line_start = match.end()
        elif kind == "IDENT":
            tokens.append(Token(KEYWORDS.get(value, "IDENT"), value, line, column))
        elif kind not in ("SPACE", "COMMENT"):
            tokens.append(Token(kind, value, line, column))
        pos = match.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class FormulaParser:
    """Parser descendente recursivo da gramática LTLp"""

    def __init__(self, text: str, alphabet: Alphabet):
        self.alphabet = alphabet
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _accept(self, kind: str) -> Optional[Token]:
        if self.current.kind == kind:
            return self._advance()
        return None

    def _expect(self, kind: str, description: str) -> Token:
        token = self._accept(kind)
        if token is None:
            found = self.current.text or "fim da fórmula"
            raise FormulaSyntaxError(
                f"Esperado {description}, encontrado '{found}'", self.current.line, self.current.column
            )
        return token

    def parse(self) -> Formula:
        formula = self._implied()
        if self.current.kind != "EOF":
            raise FormulaSyntaxError(
                f"Token inesperado '{self.current.text}'", self.current.line, self.current.column
            )
        return formula

    def _implied(self) -> Formula:
        left = self._ored()
        if self._accept("ARROW"):
            return implies(left, self._implied())
        return left

    def _ored(self) -> Formula:
        left = self._anded()
        while self._accept("OR"):
            left = Or(left, self._anded())
        return left

    def _anded(self) -> Formula:
        left = self._until()
        while self._accept("AND"):
            left = And(left, self._until())
        return left

    def _until(self) -> Formula:
        left = self._unary()
        if self._accept("UNTIL"):
            return Until(left, self._until())
        return left

    def _unary(self) -> Formula:
        if self._accept("NOT"):
            return Not(self._unary())
        if self._accept("NEXT"):
            return Next(self._unary())
        if self._accept("WEAK_NEXT"):
            return weak_next(self._unary())
        if self._accept("EVENTUALLY"):
            return eventually(self._unary())
        if self._accept("GLOBALLY"):
            return globally(self._unary())
        return self._atom()

    def _atom(self) -> Formula:
        if self._accept("TRUE"):
            return TrueConst()
        if self._accept("FALSE"):
            return FalseConst()
        if self._accept("LPAREN"):
            formula = self._implied()
            self._expect("RPAREN", "')'")
            return formula
        token = self._expect("IDENT", "atividade, constante ou '('")
        if not self.alphabet.contains(token.text):
            raise UnknownActivityError(token.text, token.line, token.column)
        return Atom(self.alphabet.get(token.text))


def parse_formula(text: str, alphabet: Alphabet) -> Formula:
    """
    Analisa o texto de uma fórmula LTLp sobre o alfabeto dado

    Args:
        text: Texto na sintaxe `! & | -> X N U F G`, com `#` iniciando comentários
        alphabet: Alfabeto declarado pelo log; o parser nunca o estende

    Returns:
        Formula: AST do núcleo, já sem formas derivadas
    """
    formula = FormulaParser(text, alphabet).parse()
    logger.debug(f"Fórmula analisada: {text.strip()}")
    return formula
