"""Word vectors trained on the unlabeled corpus, plus sentence-vector
providers for the sequence model.

Word vectors are fit with weighted least squares on co-occurrence counts
(the GloVe objective): minimize sum over pairs of
f(X_ij) * (w_i . w~_j + b_i + b~_j - log X_ij)^2 with f(x) = min(1, (x/x_max)^alpha),
using per-element AdaGrad updates. The final vector for a word is w + w~.

Sentence vectors come from one of two providers: a mean-pool over word
vectors, or a file of precomputed vectors keyed by the sha-256 of the
normalized sentence text (for externally trained sentence encoders).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimMismatch, MissingSentenceVector, ParseError
from .textprep import PAD_INDEX, Vocabulary


class CooccurrenceTable:
    """Sparse symmetric (i, j) -> weighted count map."""

    def __init__(self, window: int):
        self.window = window
        self.counts: dict[tuple[int, int], float] = {}

    def add(self, i: int, j: int, weight: float) -> None:
        key = (i, j)
        self.counts[key] = self.counts.get(key, 0.0) + weight

    def get(self, i: int, j: int) -> float:
        return self.counts.get((i, j), 0.0)

    def __len__(self) -> int:
        return len(self.counts)

    def items(self):
        return self.counts.items()


def build_cooccurrence(token_streams: Iterable[Sequence[str]], vocab: Vocabulary,
                       window: int = 10) -> CooccurrenceTable:
    """Count co-occurrences of in-vocabulary tokens with 1/distance weighting.

    Out-of-vocabulary tokens are removed before distances are measured. Each
    ordered position pair within the window adds to both symmetric entries
    (a pair of equal tokens adds twice to its single diagonal cell).
    """
    table = CooccurrenceTable(window=window)
    for stream in token_streams:
        idxs = [vocab.get(t) for t in stream]
        idxs = [i for i in idxs if i is not None and i != PAD_INDEX]
        for pos, i in enumerate(idxs):
            hi = min(len(idxs), pos + window + 1)
            for other in range(pos + 1, hi):
                w = 1.0 / (other - pos)
                j = idxs[other]
                table.add(i, j, w)
                table.add(j, i, w)
    return table


@dataclass
class EmbeddingMatrix:
    """Row-per-token dense vectors; row 0 (PAD) is all zeros."""

    vocab: Vocabulary
    vectors: np.ndarray  # (V, dim) float64

    def __post_init__(self):
        if self.vectors.shape[0] != len(self.vocab):
            raise DimMismatch(f"{self.vectors.shape[0]} rows != vocabulary "
                              f"size {len(self.vocab)}")
        self.vectors = np.ascontiguousarray(self.vectors, dtype=np.float64)
        self.vectors[PAD_INDEX, :] = 0.0

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def lookup(self, token: str) -> np.ndarray:
        """Vector for a token; zero vector when out of vocabulary."""
        idx = self.vocab.get(token)
        if idx is None:
            return np.zeros(self.dim)
        return self.vectors[idx]

    def take(self, indices: np.ndarray) -> np.ndarray:
        """Rows for an index array; PAD (0) and OOV (-1) map to zero rows."""
        safe = np.where(indices < 0, PAD_INDEX, indices)
        return self.vectors[safe]


def glove_objective(table: CooccurrenceTable, w: np.ndarray, w_ctx: np.ndarray,
                    b: np.ndarray, b_ctx: np.ndarray,
                    x_max: float = 100.0, alpha: float = 0.75) -> float:
    total = 0.0
    for (i, j), x in table.items():
        weight = min(1.0, (x / x_max) ** alpha)
        diff = float(w[i] @ w_ctx[j]) + b[i] + b_ctx[j] - math.log(x)
        total += weight * diff * diff
    return total


def train_word_vectors(table: CooccurrenceTable, vocab: Vocabulary, dim: int,
                       epochs: int = 25, seed: int = 0, x_max: float = 100.0,
                       alpha: float = 0.75, lr: float = 0.05,
                       ) -> tuple[EmbeddingMatrix, list[float]]:
    """Fit word vectors to the co-occurrence table; returns the matrix and the
    per-epoch objective history (accumulated before each pair update)."""
    if len(table) == 0:
        raise ValueError("co-occurrence table is empty")
    rng = np.random.default_rng(seed)
    v = len(vocab)
    w = (rng.random((v, dim)) - 0.5) / dim
    w_ctx = (rng.random((v, dim)) - 0.5) / dim
    # Warm-start biases at the independence solution b_i + b_j ~ log X_ij
    # (b_i = log row_i - log(total)/2) so the vectors fit the informative
    # residual instead of absorbing the rank-one frequency structure.
    row = np.zeros(v)
    total = 0.0
    for (i, _), x in table.items():
        row[i] += x
        total += x
    with np.errstate(divide="ignore"):
        b = np.where(row > 0, np.log(np.maximum(row, 1e-12)) - 0.5 * np.log(total), 0.0)
    b = b + (rng.random(v) - 0.5) / dim
    b_ctx = b.copy()
    # AdaGrad accumulators start at 1 so early steps are bounded by lr.
    gw = np.ones((v, dim))
    gw_ctx = np.ones((v, dim))
    gb = np.ones(v)
    gb_ctx = np.ones(v)

    pairs = sorted(table.items())
    order = rng.permutation(len(pairs))  # one fixed shuffle for all epochs
    history = []
    for _ in range(epochs):
        epoch_cost = 0.0
        for k in order:
            (i, j), x = pairs[k]
            weight = min(1.0, (x / x_max) ** alpha)
            diff = float(w[i] @ w_ctx[j]) + b[i] + b_ctx[j] - math.log(x)
            epoch_cost += weight * diff * diff
            g = weight * diff
            grad_wi = g * w_ctx[j]
            grad_wj = g * w[i]
            w[i] -= lr * grad_wi / np.sqrt(gw[i])
            w_ctx[j] -= lr * grad_wj / np.sqrt(gw_ctx[j])
            gw[i] += grad_wi * grad_wi
            gw_ctx[j] += grad_wj * grad_wj
            b[i] -= lr * g / math.sqrt(gb[i])
            b_ctx[j] -= lr * g / math.sqrt(gb_ctx[j])
            gb[i] += g * g
            gb_ctx[j] += g * g
        history.append(epoch_cost)
    return EmbeddingMatrix(vocab=vocab, vectors=w + w_ctx), history


def save_vectors(matrix: EmbeddingMatrix, path) -> None:
    """Text format: one line per token, `token v1 v2 ... vd` (PAD excluded)."""
    with open(path, "w", encoding="utf-8") as fh:
        for idx in range(1, len(matrix.vocab)):
            tok = matrix.vocab.token(idx)
            vals = " ".join(repr(float(x)) for x in matrix.vectors[idx])
            fh.write(f"{tok} {vals}\n")


def load_vectors(path, vocab: Vocabulary | None = None) -> EmbeddingMatrix:
    """Load a vector text file. With a vocabulary, rows are placed by its
    indices (missing tokens stay zero); otherwise a vocabulary is built from
    the file order."""
    rows: list[tuple[str, np.ndarray]] = []
    dim = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) < 2:
                raise ParseError(line_no, "expected `token v1 ... vd`")
            try:
                vec = np.array([float(x) for x in parts[1:]])
            except ValueError:
                raise ParseError(line_no, "non-numeric vector component") from None
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise DimMismatch(f"line {line_no}: {vec.size} components, expected {dim}")
            rows.append((parts[0], vec))
    if not rows:
        raise ParseError(0, f"{path}: empty vector file")
    if vocab is None:
        vocab = Vocabulary([(tok, 1) for tok, _ in rows])
    vectors = np.zeros((len(vocab), dim))
    for tok, vec in rows:
        idx = vocab.get(tok)
        if idx is not None and idx != PAD_INDEX:
            vectors[idx] = vec
    return EmbeddingMatrix(vocab=vocab, vectors=vectors)


# --- sentence vectors ---------------------------------------------------------

def sentence_key(tokens: Sequence[str]) -> str:
    """Stable lookup key: sha-256 hex of the space-joined token sequence."""
    return hashlib.sha256(" ".join(tokens).encode("utf-8")).hexdigest()


class SentenceVectorProvider:
    """Source of per-sentence vectors: mean-pool over word vectors, or exact
    lookups in a file of precomputed vectors."""

    def __init__(self, mode: str, dim: int, matrix: EmbeddingMatrix | None = None,
                 store: dict[str, np.ndarray] | None = None):
        if mode not in ("mean_pool", "file"):
            raise ValueError(f"unknown provider mode {mode!r}")
        self.mode = mode
        self.dim = dim
        self._matrix = matrix
        self._store = store

    @classmethod
    def mean_pool(cls, matrix: EmbeddingMatrix) -> "SentenceVectorProvider":
        return cls("mean_pool", matrix.dim, matrix=matrix)

    @classmethod
    def from_file(cls, path) -> "SentenceVectorProvider":
        store: dict[str, np.ndarray] = {}
        dim = None
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    key, vec = obj["key"], np.array(obj["vec"], dtype=np.float64)
                except (json.JSONDecodeError, KeyError, TypeError):
                    raise ParseError(line_no, "expected {\"key\":..., \"vec\":[...]}")
                if dim is None:
                    dim = vec.size
                elif vec.size != dim:
                    raise DimMismatch(f"line {line_no}: {vec.size} components, expected {dim}")
                store[key] = vec
        if dim is None:
            raise ParseError(0, f"{path}: empty sentence-vector file")
        return cls("file", dim, store=store)

    def embed_sentence(self, tokens: Sequence[str]) -> np.ndarray:
        if self.mode == "mean_pool":
            idxs = [self._matrix.vocab.get(t) for t in tokens]
            idxs = [i for i in idxs if i is not None and i != PAD_INDEX]
            if not idxs:
                return np.zeros(self.dim)
            return self._matrix.vectors[idxs].mean(axis=0)
        key = sentence_key(tokens)
        if key not in self._store:
            raise MissingSentenceVector(f"no stored vector for sentence key {key}")
        return self._store[key]


def save_sentence_vectors(entries: dict[str, np.ndarray], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(entries):
            fh.write(json.dumps({"key": key, "vec": [float(x) for x in entries[key]]}) + "\n")


def embed_sentence(provider: SentenceVectorProvider, tokens: Sequence[str]) -> np.ndarray:
    return provider.embed_sentence(tokens)
