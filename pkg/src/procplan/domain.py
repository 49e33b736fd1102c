"""Core vocabulary, plan, and embedding types shared across the package.

Action ids are dense integers. Real actions occupy 0..n-1, the END token id
is n (END is predictable like any action), and START sits one past END
(START is an input marker only and is never scored or predicted).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

END_NAME = "END"
START_NAME = "START"


class DegenerateEmbeddingError(ValueError):
    pass


class UnknownActionError(KeyError):
    pass


def check_embedding(v: np.ndarray, d_model: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"embedding must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("embedding has non-finite entries")
    if d_model is not None and v.shape[0] != d_model:
        raise ValueError(f"embedding dimension {v.shape[0]} != d_model {d_model}")
    return v


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """a.b / (|a||b|), defined only for nonzero vectors of equal dimension."""
    a = check_embedding(a)
    b = check_embedding(b, a.shape[0])
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateEmbeddingError("degenerate embedding: zero norm")
    return float(np.dot(a, b) / (na * nb))


@dataclass(frozen=True)
class ActionVocabulary:
    """Dense action ids with per-action language embeddings.

    `names[i]` and `embeddings[i]` describe action id i. The prediction
    vocabulary (everything the planner may emit, END included) is
    ids 0..end_id; START is excluded from scoring.
    """

    names: tuple[str, ...]
    embeddings: np.ndarray  # (num_entries, d_model), row i belongs to id i

    def __post_init__(self):
        if len(self.names) != self.embeddings.shape[0]:
            raise ValueError("names/embeddings length mismatch")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate action names")
        if END_NAME not in self.names or START_NAME not in self.names:
            raise ValueError("vocabulary must contain START and END entries")
        if not np.all(np.isfinite(self.embeddings)):
            raise ValueError("vocabulary embeddings must be finite")

    @property
    def d_model(self) -> int:
        return self.embeddings.shape[1]

    @property
    def end_id(self) -> int:
        return self.names.index(END_NAME)

    @property
    def start_id(self) -> int:
        return self.names.index(START_NAME)

    @property
    def num_predictable(self) -> int:
        """Size of the prediction vocabulary (actions plus END)."""
        return self.end_id + 1

    @property
    def num_actions(self) -> int:
        """Number of real actions (no START, no END)."""
        return self.end_id

    def lookup(self, name: str) -> int:
        """Name -> id; unknown names raise with the closest registered names."""
        try:
            return self.names.index(name)
        except ValueError:
            near = sorted(self.names, key=lambda n: _name_distance(name, n))[:3]
            raise UnknownActionError(
                f"unknown action {name!r}; nearest registered: {near}"
            ) from None

    def name_of(self, action_id: int) -> str:
        return self.names[action_id]

    def embedding_of(self, action_id: int) -> np.ndarray:
        return self.embeddings[action_id]

    def prediction_matrix(self) -> np.ndarray:
        """Embeddings of the prediction vocabulary, row index = action id."""
        return self.embeddings[: self.num_predictable]


def _name_distance(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[-1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


@dataclass(frozen=True)
class Plan:
    """Ordered action sequence with its task label. Never stores START/END;
    termination is the end of the list."""

    task_id: int
    actions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))

    @property
    def horizon(self) -> int:
        return len(self.actions)

    def validate(self, vocab: ActionVocabulary) -> "Plan":
        if self.horizon < 1:
            raise ValueError("plan must contain at least one action")
        for a in self.actions:
            if a == vocab.start_id or a == vocab.end_id:
                raise ValueError("plan must not contain START/END ids")
            if not 0 <= a < vocab.num_actions:
                raise ValueError(f"action id {a} outside vocabulary")
        return self


@dataclass(frozen=True)
class Observation:
    """Start/goal state embeddings; the task label is ground truth used only
    for classifier training and evaluation."""

    start_embedding: np.ndarray
    goal_embedding: np.ndarray
    task_id: int

    def __post_init__(self):
        s = check_embedding(self.start_embedding)
        check_embedding(self.goal_embedding, s.shape[0])


@dataclass(frozen=True)
class Sample:
    observation: Observation
    plan: Plan
    source_id: int = -1


def check_distribution(probs: np.ndarray, atol: float = 1e-9) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    if np.any(probs < 0):
        raise ValueError("distribution has negative entries")
    if abs(float(probs.sum()) - 1.0) > atol:
        raise ValueError(f"distribution sums to {probs.sum()}, not 1")
    return probs


def stable_softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def nearest_action(embedding: np.ndarray, vocab: ActionVocabulary) -> tuple[int, np.ndarray]:
    """Score an output embedding against the prediction vocabulary.

    Returns (argmax id, softmax distribution over ids 0..end_id). Logits are
    raw dot products; ties resolve to the lowest id.
    """
    e = check_embedding(embedding, vocab.d_model)
    logits = vocab.prediction_matrix() @ e
    probs = stable_softmax(logits)
    return int(np.argmax(logits)), probs
