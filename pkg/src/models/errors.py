from typing import Optional


class TempoCfError(Exception):
    """Erro base do tempocf"""


class InputError(TempoCfError, ValueError):
    """Argumento ou valor de entrada inválido fornecido pelo usuário"""


class FormulaSyntaxError(TempoCfError, ValueError):
    """Erro de sintaxe em uma fórmula LTLp"""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (linha {line}, coluna {column})")


class UnknownActivityError(TempoCfError, ValueError):
    """Fórmula cita uma atividade que não existe no alfabeto"""

    def __init__(self, token: str, line: Optional[int] = None, column: Optional[int] = None):
        self.token = token
        self.line = line
        self.column = column
        where = f" (linha {line}, coluna {column})" if line is not None else ""
        super().__init__(f"Atividade desconhecida: '{token}'{where}")


class AlphabetMismatchError(TempoCfError, ValueError):
    """Trace, fórmula ou autômato definidos sobre alfabetos diferentes"""


class LogFormatError(TempoCfError, ValueError):
    """Arquivo de log fora do contrato CSV"""


class DomainError(TempoCfError, ValueError):
    """Posição sem nenhum trace que a alcance"""

    def __init__(self, position: int):
        self.position = position
        super().__init__(f"Nenhum trace do log alcança a posição {position}")


class TrainingError(TempoCfError, ValueError):
    """Dados insuficientes para treinar o classificador"""


class StateBudgetExceeded(TempoCfError, RuntimeError):
    """A compilação da fórmula excedeu o limite de estados"""

    def __init__(self, max_states: int):
        self.max_states = max_states
        super().__init__(f"Compilação excedeu o limite de {max_states} estados")


class PredictorError(TempoCfError, RuntimeError):
    """Falha na comunicação com o preditor externo"""


class PredictorSpawnError(PredictorError):
    """Não foi possível iniciar o processo do preditor"""


class ProtocolViolation(PredictorError):
    """Resposta do preditor fora do protocolo"""


class PredictorTimeout(PredictorError):
    """Preditor não respondeu dentro do tempo limite"""


class HypothesisViolation(TempoCfError, ValueError):
    """Query não satisfaz a fórmula exigida pelas estratégias restritas"""


class NothingToExplain(TempoCfError, ValueError):
    """A predição da query já é igual ao rótulo desejado"""
