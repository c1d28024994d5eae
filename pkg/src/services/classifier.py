from abc import ABC, abstractmethod
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, model_validator

from ..models.config import TrainConfig
from ..models.entities import Alphabet, EventLog, Trace
from ..models.errors import AlphabetMismatchError, InputError, TrainingError
from ..models.formula import Atom, Formula, eventually
from .event_log import prefixes, split_chronological
from .semantics import evaluate

DECISION_THRESHOLD = 0.5


class Classifier(ABC):
    """
    Preditor caixa-preta h_θ

    O rótulo é True somente quando o score é estritamente maior que 0.5; um score de
    exatamente 0.5 resulta em False.
    """

    prefix_length: Optional[int] = None

    @abstractmethod
    def score(self, trace: Trace) -> float:
        """Probabilidade da classe positiva, em [0, 1]"""

    def score_batch(self, traces: Sequence[Trace]) -> np.ndarray:
        return np.array([self.score(t) for t in traces], dtype=float)

    def predict(self, trace: Trace) -> bool:
        return self.score(trace) > DECISION_THRESHOLD

    def predict_batch(self, traces: Sequence[Trace]) -> np.ndarray:
        return self.score_batch(traces) > DECISION_THRESHOLD

    def check_length(self, trace: Trace) -> None:
        if self.prefix_length is not None and len(trace) != self.prefix_length:
            raise InputError(
                f"Trace de tamanho {len(trace)} incompatível com o modelo de prefixo {self.prefix_length}"
            )


class RuleClassifier(Classifier):
    """Classificador determinístico: o rótulo é o valor de verdade de uma fórmula"""

    def __init__(self, rule: Formula, prefix_length: Optional[int] = None):
        self.rule = rule
        self.prefix_length = prefix_length

    @classmethod
    def contains(cls, activity: str, alphabet: Alphabet, prefix_length: Optional[int] = None) -> "RuleClassifier":
        """Regra "o trace contém `activity`" (F activity)"""
        return cls(eventually(Atom(alphabet.get(activity))), prefix_length)

    def score(self, trace: Trace) -> float:
        self.check_length(trace)
        return 1.0 if evaluate(trace, self.rule) else 0.0


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def encode(traces: Sequence[Trace], prefix_length: int, alphabet_size: int) -> np.ndarray:
    """
    Codificação one-hot posicional (posição x atividade)

    Args:
        traces: Traces de tamanho `prefix_length`
        prefix_length: n
        alphabet_size: |Σ|

    Returns:
        np.ndarray: Matriz (len(traces), n * |Σ|)
    """
    features = np.zeros((len(traces), prefix_length * alphabet_size), dtype=float)
    if not traces:
        return features
    for trace in traces:
        if len(trace) != prefix_length:
            raise ValueError(f"Trace de tamanho {len(trace)}, esperado {prefix_length}")
    ids = np.array([t.activities for t in traces], dtype=int)
    columns = np.arange(prefix_length) * alphabet_size + ids
    rows = np.repeat(np.arange(len(traces)), prefix_length)
    features[rows, columns.ravel()] = 1.0
    return features


def logistic_loss_and_gradient(
    weights: np.ndarray, features: np.ndarray, labels: np.ndarray, l2: float
) -> Tuple[float, np.ndarray]:
    """
    Perda logística média com regularização L2 e seu gradiente

    Args:
        weights: Vetor de tamanho d + 1; o último elemento é o bias (não regularizado)
        features: Matriz (m, d)
        labels: Vetor (m,) com 0/1
        l2: Coeficiente de regularização

    Returns:
        Tuple[float, np.ndarray]: perda e gradiente com o formato de `weights`
    """
    w, b = weights[:-1], weights[-1]
    z = features @ w + b
    m = max(len(labels), 1)
    loss = float(np.sum(np.logaddexp(0.0, z) - labels * z) / m + 0.5 * l2 * np.dot(w, w))
    residual = _sigmoid(z) - labels
    gradient = np.empty_like(weights)
    gradient[:-1] = features.T @ residual / m + l2 * w
    gradient[-1] = np.sum(residual) / m
    return loss, gradient


class TrainedModel(BaseModel):
    """Parâmetros e metadados de um classificador linear treinado"""

    prefix_length: int = Field(..., ge=1)
    alphabet_names: List[str]
    weights: List[float]
    seed: int = 42
    epochs: int = 0
    learning_rate: float = 0.5
    l2: float = 0.0
    train_size: int = 0
    validation_size: int = 0
    test_size: int = 0
    train_accuracy: Optional[float] = None
    validation_accuracy: Optional[float] = None
    test_accuracy: Optional[float] = None

    @model_validator(mode="after")
    def validate_weights(self) -> "TrainedModel":
        """Valida que há n x |Σ| pesos mais o bias"""
        expected = self.prefix_length * len(self.alphabet_names) + 1
        if len(self.weights) != expected:
            raise ValueError(f"Esperados {expected} pesos, recebidos {len(self.weights)}")
        return self

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet.from_names(self.alphabet_names)

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2), encoding="utf-8")
        logger.info(f"Modelo salvo em {path}")
        return path

    @classmethod
    def load(cls, path: Path) -> "TrainedModel":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Modelo não encontrado: {path}")
        return cls.model_validate_json(path.read_text(encoding="utf-8"))


class LinearClassifier(Classifier):
    """Regressão logística sobre a codificação one-hot posicional"""

    def __init__(self, model: TrainedModel, alphabet: Optional[Alphabet] = None):
        self.model = model
        self.alphabet = alphabet or model.alphabet
        if self.alphabet.names != tuple(model.alphabet_names):
            raise AlphabetMismatchError("Alfabeto do modelo difere do alfabeto do log")
        self.prefix_length = model.prefix_length
        params = np.asarray(model.weights, dtype=float)
        self._weights = params[:-1]
        self._bias = float(params[-1])

    def _check(self, trace: Trace) -> None:
        self.check_length(trace)
        trace.check_alphabet(self.alphabet)

    def score(self, trace: Trace) -> float:
        return float(self.score_batch([trace])[0])

    def score_batch(self, traces: Sequence[Trace]) -> np.ndarray:
        for trace in traces:
            self._check(trace)
        features = encode(traces, self.model.prefix_length, len(self.alphabet))
        return _sigmoid(features @ self._weights + self._bias)


def _accuracy(weights: np.ndarray, features: np.ndarray, labels: np.ndarray) -> Optional[float]:
    if len(labels) == 0:
        return None
    predicted = _sigmoid(features @ weights[:-1] + weights[-1]) > DECISION_THRESHOLD
    return float(np.mean(predicted == labels.astype(bool)))


def train_linear(log: EventLog, prefix_length: int, config: Optional[TrainConfig] = None) -> TrainedModel:
    """
    Treina o classificador linear por gradiente descendente em mini-lotes

    Usa a divisão cronológica 70/10/20 do log prefixado; treina apenas com os 70%.

    Args:
        log: Log rotulado
        prefix_length: Tamanho do prefixo n
        config: Hiperparâmetros

    Returns:
        TrainedModel: Pesos e acurácias de treino, validação e teste
    """
    config = config or TrainConfig()
    prefixed = prefixes(log, prefix_length)
    if prefixed.is_empty:
        raise TrainingError(f"Nenhum trace do log alcança o tamanho {prefix_length}")
    train, validation, test = split_chronological(prefixed)
    if len(set(train.labels())) < 2:
        raise TrainingError("O conjunto de treino tem apenas uma classe")

    k = len(log.alphabet)

    def arrays(part: EventLog) -> Tuple[np.ndarray, np.ndarray]:
        return encode(part.traces(), prefix_length, k), np.array(part.labels(), dtype=float)

    x_train, y_train = arrays(train)
    weights = np.zeros(prefix_length * k + 1, dtype=float)
    rng = np.random.default_rng(config.seed)
    m = len(y_train)
    for epoch in range(config.epochs):
        order = rng.permutation(m)
        for start in range(0, m, config.batch_size):
            batch = order[start:start + config.batch_size]
            _, gradient = logistic_loss_and_gradient(weights, x_train[batch], y_train[batch], config.l2)
            weights -= config.learning_rate * gradient
        if epoch % 50 == 0:
            loss, _ = logistic_loss_and_gradient(weights, x_train, y_train, config.l2)
            logger.debug(f"Época {epoch}: perda {loss:.5f}")

    x_val, y_val = arrays(validation)
    x_test, y_test = arrays(test)
    model = TrainedModel(
        prefix_length=prefix_length,
        alphabet_names=list(log.alphabet.names),
        weights=weights.tolist(),
        seed=config.seed,
        epochs=config.epochs,
        learning_rate=config.learning_rate,
        l2=config.l2,
        train_size=len(train),
        validation_size=len(validation),
        test_size=len(test),
        train_accuracy=_accuracy(weights, x_train, y_train),
        validation_accuracy=_accuracy(weights, x_val, y_val),
        test_accuracy=_accuracy(weights, x_test, y_test),
    )
    logger.info(
        f"Modelo treinado (prefixo {prefix_length}): acurácia treino {model.train_accuracy}, "
        f"validação {model.validation_accuracy}, teste {model.test_accuracy}"
    )
    return model
