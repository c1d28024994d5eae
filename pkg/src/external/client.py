import queue
import shlex
import subprocess
import threading
import time
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, ValidationError

from ..models.entities import Alphabet, Trace
from ..models.errors import PredictorError, PredictorSpawnError, PredictorTimeout, ProtocolViolation
from ..services.classifier import Classifier

DEFAULT_TIMEOUT = 30.0
DEFAULT_BATCH_SIZE = 256


class PredictorRequest(BaseModel):
    """Requisição do protocolo de linha: um trace por linha"""

    id: int
    trace: List[str]


class PredictorResponse(BaseModel):
    """Resposta do protocolo de linha"""

    id: int
    score: float = Field(..., ge=0.0, le=1.0)


class ExternalClassifier(Classifier):
    """Cliente para um preditor externo que fala JSON por linha via stdin/stdout"""

    def __init__(
        self,
        command: Union[str, Sequence[str]],
        alphabet: Alphabet,
        prefix_length: Optional[int] = None,
        timeout: float = DEFAULT_TIMEOUT,
        batch_size: int = DEFAULT_BATCH_SIZE,
    ):
        """
        Inicializa o cliente; o processo é iniciado na primeira requisição

        Args:
            command: Comando do preditor (string no estilo shell ou lista de argumentos)
            alphabet: Alfabeto dos traces enviados
            prefix_length: Tamanho esperado dos traces, se o preditor for de prefixo fixo
            timeout: Tempo máximo em segundos por lote
            batch_size: Número máximo de traces por lote
        """
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.alphabet = alphabet
        self.prefix_length = prefix_length
        self.timeout = timeout
        self.batch_size = batch_size
        self._process: Optional[subprocess.Popen] = None
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()
        self._lock = threading.Lock()
        self._next_id = 0

    def start(self) -> None:
        """Inicia o processo do preditor e a thread de leitura"""
        if self._process is not None:
            return
        try:
            self._process = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except (OSError, ValueError) as e:
            raise PredictorSpawnError(f"Não foi possível iniciar o preditor {self.command}: {e}") from e
        # cada processo tem sua própria fila; leitores antigos não alcançam a nova
        self._lines = queue.Queue()
        reader = threading.Thread(
            target=self._read_lines,
            args=(self._process, self._lines),
            name="predictor-reader",
            daemon=True,
        )
        reader.start()
        logger.info(f"Preditor externo iniciado: {' '.join(self.command)}")

    @staticmethod
    def _read_lines(process: subprocess.Popen, lines: "queue.Queue[Optional[str]]") -> None:
        assert process.stdout is not None
        for line in process.stdout:
            lines.put(line)
        lines.put(None)

    def close(self) -> None:
        """Encerra o processo do preditor"""
        if self._process is None:
            return
        try:
            if self._process.stdin:
                self._process.stdin.close()
            self._process.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            self._process.kill()
        finally:
            self._process = None
            logger.debug("Preditor externo encerrado")

    def _abort(self) -> None:
        """Mata o processo após uma falha; o próximo lote inicia um processo novo"""
        if self._process is None:
            return
        try:
            self._process.kill()
            self._process.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            pass
        finally:
            self._process = None
            logger.warning("Preditor externo encerrado após falha no protocolo")

    def __enter__(self) -> "ExternalClassifier":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def score(self, trace: Trace) -> float:
        return float(self.score_batch([trace])[0])

    def score_batch(self, traces: Sequence[Trace]) -> np.ndarray:
        """
        Envia os traces em lotes e devolve os scores na ordem de entrada

        Args:
            traces: Traces a pontuar

        Returns:
            np.ndarray: Scores em [0, 1]
        """
        for trace in traces:
            self.check_length(trace)
            trace.check_alphabet(self.alphabet)
        scores: List[float] = []
        with self._lock:
            self.start()
            try:
                for start in range(0, len(traces), self.batch_size):
                    scores.extend(self._round_trip(traces[start:start + self.batch_size]))
            except PredictorError:
                # respostas atrasadas do lote abandonado não podem contaminar o próximo
                self._abort()
                raise
        return np.array(scores, dtype=float)

    def _round_trip(self, traces: Sequence[Trace]) -> List[float]:
        assert self._process is not None and self._process.stdin is not None
        ids = list(range(self._next_id, self._next_id + len(traces)))
        self._next_id += len(traces)
        payload = "".join(
            PredictorRequest(id=i, trace=t.names()).model_dump_json() + "\n" for i, t in zip(ids, traces)
        )
        try:
            self._process.stdin.write(payload)
            self._process.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise PredictorError(f"Falha ao enviar traces ao preditor: {e}") from e

        pending = set(ids)
        received: Dict[int, float] = {}
        deadline = time.monotonic() + self.timeout
        while pending:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise PredictorTimeout(f"Preditor não respondeu em {self.timeout}s ({len(pending)} pendentes)")
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                raise PredictorTimeout(
                    f"Preditor não respondeu em {self.timeout}s ({len(pending)} pendentes)"
                ) from None
            if line is None:
                raise ProtocolViolation("Preditor encerrou antes de responder todas as requisições")
            if not line.strip():
                continue
            response = self._parse(line)
            if response.id not in pending:
                raise ProtocolViolation(f"Resposta com id inesperado: {response.id}")
            pending.discard(response.id)
            received[response.id] = response.score
        return [received[i] for i in ids]

    @staticmethod
    def _parse(line: str) -> PredictorResponse:
        try:
            return PredictorResponse.model_validate_json(line)
        except ValidationError as e:
            raise ProtocolViolation(f"Resposta inválida do preditor: {line.strip()[:200]}") from e
