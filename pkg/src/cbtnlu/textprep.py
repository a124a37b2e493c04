"""Tokenization, sentence segmentation, vocabulary and bag-of-words features.

Deliberately rule-based and deterministic: lowercase, whitespace split with
punctuation detached (contractions kept intact), sentence breaks at . ! ?
followed by whitespace or end of text.
"""

from __future__ import annotations

import re
from collections import Counter
from typing import Iterable, Sequence

from .errors import EmptyVocabulary, ParseError

PAD_TOKEN = "<pad>"
PAD_INDEX = 0
OOV_INDEX = -1

MAX_SENTENCE_TOKENS = 50
MAX_SENTENCES = 30

# A token is a run of word chars (apostrophes allowed inside, so "don't"
# survives) or a single non-space, non-word char.
_TOKEN_RE = re.compile(r"[\w']+|[^\w\s]")
_SENT_BREAK_RE = re.compile(r"(?<=[.!?])\s+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split into tokens; punctuation becomes its own token."""
    if not text:
        return []
    return _TOKEN_RE.findall(text.lower())


def split_sentences(text: str, max_sentences: int = MAX_SENTENCES) -> list[str]:
    """Split at sentence terminators; a trailing fragment is its own sentence.

    At most `max_sentences` sentences are kept (the first ones).
    """
    if not text or not text.strip():
        return []
    pieces = [p.strip() for p in _SENT_BREAK_RE.split(text.strip())]
    return [p for p in pieces if p][:max_sentences]


def bound_length(tokens: Sequence[str], max_tokens: int = MAX_SENTENCE_TOKENS) -> list[str]:
    """Keep at most the first `max_tokens` tokens."""
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    return list(tokens[:max_tokens])


class Vocabulary:
    """Dense token index, frequency-descending then lexicographic; index 0 is PAD."""

    def __init__(self, tokens_with_counts: Sequence[tuple[str, int]], min_count: int = 1):
        self.min_count = min_count
        self._index_to_token = [PAD_TOKEN]
        self._counts = [0]
        for tok, cnt in tokens_with_counts:
            self._index_to_token.append(tok)
            self._counts.append(cnt)
        self._token_to_index = {t: i for i, t in enumerate(self._index_to_token)}

    def __len__(self) -> int:
        return len(self._index_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_index

    def get(self, token: str) -> int | None:
        return self._token_to_index.get(token)

    def index(self, token: str) -> int:
        """Index of a token; OOV_INDEX (-1) for unknown tokens."""
        return self._token_to_index.get(token, OOV_INDEX)

    def token(self, index: int) -> str:
        return self._index_to_token[index]

    def count(self, token: str) -> int:
        idx = self._token_to_index.get(token)
        return 0 if idx is None else self._counts[idx]

    @property
    def tokens(self) -> list[str]:
        return list(self._index_to_token)

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.index(t) for t in tokens]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for i, tok in enumerate(self._index_to_token):
                fh.write(f"{tok}\t{i}\t{self._counts[i]}\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ParseError(line_no, "expected token<TAB>index<TAB>count")
                rows.append((parts[0], int(parts[1]), int(parts[2])))
        rows.sort(key=lambda r: r[1])
        if not rows or rows[0][0] != PAD_TOKEN or rows[0][1] != 0:
            raise ParseError(1, "vocabulary file must start with the PAD token at index 0")
        vocab = cls.__new__(cls)
        vocab.min_count = 1
        vocab._index_to_token = [r[0] for r in rows]
        vocab._counts = [r[2] for r in rows]
        vocab._token_to_index = {t: i for i, t in enumerate(vocab._index_to_token)}
        return vocab


def build_vocab(texts: Iterable[str], min_count: int = 1) -> Vocabulary:
    """Count tokens over the corpus and keep those with frequency >= min_count."""
    counts = Counter()
    for text in texts:
        counts.update(tokenize(text))
    kept = [(t, c) for t, c in counts.items() if c >= min_count]
    if not kept:
        raise EmptyVocabulary(f"no token reached min_count={min_count}")
    kept.sort(key=lambda tc: (-tc[1], tc[0]))
    return Vocabulary(kept, min_count=min_count)


def bow_featurize(tokens: Iterable[str], vocab: Vocabulary) -> dict[int, int]:
    """Sparse token-index -> count map; out-of-vocabulary tokens are dropped."""
    vec: dict[int, int] = {}
    for tok in tokens:
        idx = vocab.get(tok)
        if idx is not None:
            vec[idx] = vec.get(idx, 0) + 1
    return vec


def post_tokens(problem: str, negative_take: str, field_cap: int = 200) -> tuple[list[str], list[str]]:
    """Token sequences for the two text fields, each capped at `field_cap` tokens."""
    return (bound_length(tokenize(problem), field_cap),
            bound_length(tokenize(negative_take), field_cap) if negative_take else [])


def post_sentences(problem: str, negative_take: str,
                   max_tokens: int = MAX_SENTENCE_TOKENS) -> list[list[str]]:
    """Tokenized, length-bounded sentences of a post: problem first, negative take last."""
    out: list[list[str]] = []
    for field in (problem, negative_take):
        if not field:
            continue
        for sent in split_sentences(field):
            toks = bound_length(tokenize(sent), max_tokens)
            if toks:
                out.append(toks)
    return out
