"""Post data model, corpus file ingestion, fold splitting, oversampling,
and a seeded synthetic-corpus generator.

Corpus file format: UTF-8, one JSON object per line,
``{"id": str, "problem": str, "negative_take": str, "labels": [str]?}``.
Posts without a ``labels`` key are unlabeled (absent from ``Dataset.gold``).

The synthetic generator plants a disjoint signal-keyword set per label and
samples labels independently with probability equal to the catalog prior,
so empirical label frequencies converge to the priors and every label is
learnable from surface keywords alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DuplicateId, NoNegatives, NoPositives, ParseError, TooSmall
from .ontology import LabelCatalog, require_known


@dataclass(frozen=True)
class Post:
    id: str
    problem: str
    negative_take: str

    def __post_init__(self):
        if not self.problem:
            raise ValueError(f"post {self.id!r}: problem text must be nonempty")


@dataclass
class Dataset:
    posts: list[Post]
    gold: dict[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        ids = {p.id for p in self.posts}
        missing = set(self.gold) - ids
        if missing:
            raise ValueError(f"gold labels reference unknown posts: {sorted(missing)[:5]}")

    def __len__(self) -> int:
        return len(self.posts)

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.posts]

    def by_id(self, post_id: str) -> Post:
        if not hasattr(self, "_by_id"):
            self._by_id = {p.id: p for p in self.posts}
        return self._by_id[post_id]

    def labeled_ids(self) -> list[str]:
        return [p.id for p in self.posts if p.id in self.gold]


@dataclass(frozen=True)
class FoldAssignment:
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    folds: tuple[FoldAssignment, ...]

    def to_json(self) -> str:
        return json.dumps({
            "k": self.k,
            "seed": self.seed,
            "folds": [{"train": list(f.train), "val": list(f.val), "test": list(f.test)}
                      for f in self.folds],
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FoldPlan":
        obj = json.loads(text)
        folds = tuple(FoldAssignment(tuple(f["train"]), tuple(f["val"]), tuple(f["test"]))
                      for f in obj["folds"])
        return cls(k=obj["k"], seed=obj["seed"], folds=folds)


_ALLOWED_RATIOS = {(1, 1), (1, 3), (1, 5), (1, 7)}


@dataclass(frozen=True)
class OversampleSpec:
    """Target positive:negative proportion for the training stream."""
    pos_units: int = 1
    neg_units: int = 1
    allow_any: bool = False

    def __post_init__(self):
        if self.pos_units < 1 or self.neg_units < 1:
            raise ValueError("ratio units must be positive")
        if not self.allow_any and (self.pos_units, self.neg_units) not in _ALLOWED_RATIOS:
            raise ValueError(f"ratio {self.pos_units}:{self.neg_units} outside the "
                             f"explored set 1:1, 1:3, 1:5, 1:7 (set allow_any to override)")

    @classmethod
    def parse(cls, text: str, allow_any: bool = False) -> "OversampleSpec":
        try:
            pos, neg = text.split(":")
            return cls(int(pos), int(neg), allow_any=allow_any)
        except ValueError as exc:
            raise ValueError(f"cannot parse oversample ratio {text!r}: {exc}") from None

    def __str__(self) -> str:
        return f"{self.pos_units}:{self.neg_units}"


def ingest(path, catalog: LabelCatalog | None = None) -> Dataset:
    """Read a corpus file; validates labels against the catalog when given."""
    posts: list[Post] = []
    gold: dict[str, frozenset[str]] = {}
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(line_no, f"invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise ParseError(line_no, "expected a JSON object")
            for key in ("id", "problem", "negative_take"):
                if key not in obj:
                    raise ParseError(line_no, f"missing field {key!r}")
            pid = str(obj["id"])
            if pid in seen:
                raise DuplicateId(f"duplicate post id {pid!r} at line {line_no}")
            seen.add(pid)
            try:
                posts.append(Post(id=pid, problem=obj["problem"],
                                  negative_take=obj["negative_take"]))
            except ValueError as exc:
                raise ParseError(line_no, str(exc)) from None
            if "labels" in obj and obj["labels"] is not None:
                members = frozenset(obj["labels"])
                if catalog is not None:
                    members = require_known(members, catalog)
                gold[pid] = members
    return Dataset(posts=posts, gold=gold)


def export(dataset: Dataset, path) -> None:
    """Write a dataset back to corpus format (labels sorted for stable bytes)."""
    with open(path, "w", encoding="utf-8") as fh:
        for post in dataset.posts:
            obj: dict = {"id": post.id, "problem": post.problem,
                         "negative_take": post.negative_take}
            if post.id in dataset.gold:
                obj["labels"] = sorted(dataset.gold[post.id])
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def split_folds(dataset: Dataset, k: int = 10, seed: int = 0) -> FoldPlan:
    """Rotate contiguous chunks of one seeded shuffle into k train/val/test folds.

    Fold i tests on chunk i and validates on chunk i+1 (mod k); the remaining
    chunks train. Sizes approximate 8:1:1 for k=10 and every post appears in
    exactly one test partition.
    """
    ids = dataset.ids
    if len(ids) < k * 10:
        raise TooSmall(f"need at least {k * 10} posts for {k} folds, got {len(ids)}")
    rng = np.random.default_rng(seed)
    order = [ids[i] for i in rng.permutation(len(ids))]
    chunks = [list(c) for c in np.array_split(np.arange(len(order)), k)]
    folds = []
    for i in range(k):
        test_idx = chunks[i]
        val_idx = chunks[(i + 1) % k]
        held = set(test_idx) | set(val_idx)
        train = tuple(order[j] for j in range(len(order)) if j not in held)
        folds.append(FoldAssignment(
            train=train,
            val=tuple(order[j] for j in val_idx),
            test=tuple(order[j] for j in test_idx),
        ))
    return FoldPlan(k=k, seed=seed, folds=tuple(folds))


def oversample(train_ids: Sequence[str], gold: Mapping[str, frozenset[str]],
               label: str, spec: OversampleSpec, seed: int) -> list[str]:
    """Duplicate positives until pos:neg is within one item of the target ratio.

    Whole copies of the positive set come first, then a seeded random sample
    without replacement for the remainder. Negatives are never dropped and
    the returned stream is shuffled with the seed.
    """
    pos = [pid for pid in train_ids if label in gold.get(pid, frozenset())]
    neg = [pid for pid in train_ids if label not in gold.get(pid, frozenset())]
    if not pos:
        raise NoPositives(f"label {label!r}: no positive training example")
    if not neg:
        raise NoNegatives(f"label {label!r}: no negative training example")
    target = max(len(pos), round(len(neg) * spec.pos_units / spec.neg_units))
    rng = np.random.default_rng(seed)
    whole, rem = divmod(target, len(pos))
    stream = list(neg) + pos * whole
    if rem:
        extra_idx = rng.choice(len(pos), size=rem, replace=False)
        stream.extend(pos[i] for i in sorted(extra_idx))
    perm = rng.permutation(len(stream))
    return [stream[i] for i in perm]


# --- synthetic corpus -------------------------------------------------------

# Disjoint signal keywords per label. Any post carrying a label contains at
# least one of its keywords (guaranteed in the negative take), so each label
# is learnable from text alone.
SIGNAL_KEYWORDS: dict[str, tuple[str, ...]] = {
    "black_and_white": ("absolute", "entirely", "totally"),
    "blaming": ("blame", "fault", "accusing"),
    "catastrophising": ("disaster", "catastrophe", "doomed"),
    "comparing": ("comparing", "inferior", "lesser"),
    "disqualifying_the_positive": ("dismiss", "discount", "unimportant"),
    "emotional_reasoning": ("feelings", "instinct", "gut"),
    "fortune_telling": ("predict", "foresee", "inevitably"),
    "jumping_to_negative_conclusions": ("conclude", "assume", "surely"),
    "labelling": ("loser", "idiot", "stupid"),
    "low_frustration_tolerance": ("unbearable", "stand", "tolerate"),
    "inflexibility": ("should", "must", "ought"),
    "mental_filtering": ("filter", "ignore", "overlook"),
    "mind_reading": ("thinks", "secretly", "despises"),
    "over_generalising": ("everyone", "nobody", "everything"),
    "personalising": ("personally", "myself", "responsible"),
    "anger": ("angry", "furious", "irritated"),
    "anxiety": ("anxious", "worried", "panic"),
    "depression": ("depressed", "hopeless", "numb"),
    "grief_sadness": ("grieving", "mourning", "loss"),
    "guilt": ("guilty", "remorse", "regret"),
    "hurt": ("hurt", "wounded", "betrayed"),
    "jealousy": ("jealous", "envious", "resentful"),
    "loneliness": ("lonely", "isolated", "alone"),
    "shame": ("ashamed", "embarrassed", "humiliated"),
    "bereavement": ("funeral", "died", "passed"),
    "existential": ("meaning", "purpose", "existence"),
    "health": ("illness", "doctor", "sick"),
    "relationships": ("boyfriend", "girlfriend", "marriage"),
    "school_college": ("school", "college", "exams"),
    "work": ("job", "boss", "workplace"),
    "other": ("unusual", "odd", "peculiar"),
}

FILLER_VOCAB: tuple[str, ...] = (
    "i", "i'm", "my", "me", "the", "a", "to", "and", "of", "in", "it", "is",
    "was", "that", "this", "we", "they", "been", "have", "has", "had", "not",
    "so", "very", "really", "just", "today", "yesterday", "week", "month",
    "year", "time", "day", "night", "home", "went", "going", "felt", "feel",
    "think", "know", "people", "things", "stuff", "maybe", "still", "again",
    "picnic", "coffee", "walk", "talk", "about", "with", "because", "then",
    "now", "here", "there",
)


def _check_lexicon() -> None:
    seen: dict[str, str] = {}
    for label, words in SIGNAL_KEYWORDS.items():
        if len(words) != 3:  # the generator draws keyword indices in [0, 3)
            raise ValueError(f"label {label} must have exactly 3 keywords")
        for w in words:
            if w in seen:
                raise ValueError(f"keyword {w!r} assigned to both {seen[w]} and {label}")
            seen[w] = label
    overlap = set(seen) & set(FILLER_VOCAB)
    if overlap:
        raise ValueError(f"filler words collide with keywords: {sorted(overlap)}")


_check_lexicon()


def synth_generate(catalog: LabelCatalog, n_posts: int, seed: int = 0) -> Dataset:
    """Generate a keyword-planted corpus whose label frequencies follow the priors."""
    if n_posts < 1:
        raise ValueError("n_posts must be >= 1")
    missing = [lab.id for lab in catalog if lab.id not in SIGNAL_KEYWORDS]
    if missing:
        raise ValueError(f"no signal keywords defined for labels: {missing}")
    rng = np.random.default_rng(seed)
    filler = list(FILLER_VOCAB)
    label_ids = [lab.id for lab in catalog]
    priors = np.array([lab.prior for lab in catalog])
    posts: list[Post] = []
    gold: dict[str, frozenset[str]] = {}
    for i in range(n_posts):
        labels = [label_ids[j] for j in np.nonzero(rng.random(len(priors)) < priors)[0]]
        pool = [kw for lab in labels for kw in SIGNAL_KEYWORDS[lab]]
        sentences = []
        for _ in range(int(rng.integers(2, 6))):
            n_tok = int(rng.integers(4, 11))
            fill_idx = rng.integers(0, len(filler), size=n_tok)
            if pool:
                use_kw = rng.random(n_tok) < 0.5
                kw_idx = rng.integers(0, len(pool), size=n_tok)
                toks = [pool[kw_idx[t]] if use_kw[t] else filler[fill_idx[t]]
                        for t in range(n_tok)]
            else:
                toks = [filler[t] for t in fill_idx]
            sentences.append(" ".join(toks).capitalize() + ".")
        problem = " ".join(sentences)
        # The negative take carries at least one keyword per sampled label.
        take_toks = [SIGNAL_KEYWORDS[lab][int(k)]
                     for lab, k in zip(labels, rng.integers(0, 3, size=len(labels)))]
        take_toks += [filler[int(k)]
                      for k in rng.integers(0, len(filler), size=int(rng.integers(1, 3)))]
        perm = rng.permutation(len(take_toks))
        negative_take = " ".join(take_toks[j] for j in perm).capitalize() + "."
        pid = f"synth-{i:06d}"
        posts.append(Post(id=pid, problem=problem, negative_take=negative_take))
        gold[pid] = frozenset(labels)
    return Dataset(posts=posts, gold=gold)
