"""The fixed CBT concept catalog: thinking errors, emotions and situations.

31 labels in three categories. Each label carries a prior: the fraction of
posts in the reference annotation effort that exhibited it. Priors are
corpus-level metadata (labels co-occur freely, so priors do not sum to 1)
and are never enforced on datasets.

Label ids are lowercase snake_case and are the stable keys used in corpus
files, checkpoints, reports and the HTTP API.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .errors import UnknownLabel


class Category(str, Enum):
    THINKING_ERROR = "thinking_error"
    EMOTION = "emotion"
    SITUATION = "situation"


@dataclass(frozen=True)
class Label:
    id: str
    category: Category
    display_name: str
    description: str
    prior: float


# (id, display name, description, prior), in canonical catalog order:
# thinking errors, then emotions, then situations.
_THINKING_ERRORS = [
    ("black_and_white", "Black and white (or all or nothing) thinking",
     "Only seeing things in absolutes, no shades of grey", 0.2082),
    ("blaming", "Blaming",
     "Holding others responsible for your pain rather than your own part in the situation", 0.0805),
    ("catastrophising", "Catastrophising",
     "Magnifying a (sometimes minor) negative event into potential disaster", 0.1187),
    ("comparing", "Comparing",
     "Making dissatisfied comparison of self versus others", 0.0327),
    ("disqualifying_the_positive", "Disqualifying the positive",
     "Dismissing or discounting positive aspects of a situation or experience", 0.0615),
    ("emotional_reasoning", "Emotional reasoning",
     "Assuming feelings represent fact", 0.1331),
    ("fortune_telling", "Fortune telling",
     "Predicting how things will be, unduly negatively", 0.2570),
    ("jumping_to_negative_conclusions", "Jumping to negative conclusions",
     "Anticipating something will turn out badly, with little evidence to support it", 0.4416),
    ("labelling", "Labelling",
     "Using negative, highly coloured language to describe self or other", 0.1051),
    ("low_frustration_tolerance", "Low frustration tolerance (\"I can't bear it\")",
     "Assuming something is intolerable, rather than difficult or a temporary discomfort", 0.1603),
    ("inflexibility", "Inflexibility (should/need/ought)",
     "Holding rigid beliefs about how things or people must or ought to be", 0.0808),
    ("mental_filtering", "Mental filtering",
     "Focusing on the negative, filtering out all positive aspects of a situation", 0.0550),
    ("mind_reading", "Mind-reading",
     "Assuming others think negative things or have negative motives and intentions", 0.1460),
    ("over_generalising", "Over-generalising",
     "Generalising negatively, using words like always, nobody, never", 0.1269),
    ("personalising", "Personalising",
     "Interpreting events as being related to you personally, overlooking other factors", 0.0585),
]

_EMOTIONS = [
    ("anger", "Anger (/frustration)",
     "Feelings of frustration, annoyance, irritation, resentment, fury, outrage", 0.1476),
    ("anxiety", "Anxiety",
     "Any expression of fear, worry or anxiety", 0.6312),
    ("depression", "Depression",
     "Feeling down, hopeless, joyless, negative about self or life in general", 0.2072),
    ("grief_sadness", "Grief/sadness",
     "Feeling sad, upset, bereft in relation to a major loss", 0.0570),
    ("guilt", "Guilt",
     "Feeling blameworthy for a wrongdoing or something not done", 0.0337),
    ("hurt", "Hurt",
     "Feeling wounded and/or badly treated", 0.1988),
    ("jealousy", "Jealousy",
     "Antagonistic feeling towards another: wishing to be like them or have what they have", 0.0312),
    ("loneliness", "Loneliness",
     "Feeling of aloneness, isolation, friendlessness, not being understood by anyone", 0.0741),
    ("shame", "Shame",
     "Feeling distress, humiliation, disgrace in relation to own behaviour or feelings", 0.0568),
]

_SITUATIONS = [
    ("bereavement", "Bereavement", "Loss of a person close to the writer", 0.0265),
    ("existential", "Existential", "Meaning, purpose, identity and direction of life", 0.2193),
    ("health", "Health", "Physical or mental health, illness, treatment", 0.1061),
    ("relationships", "Relationships", "Romantic, family or friendship relationships", 0.6758),
    ("school_college", "School/College", "Studies, exams, school or college life", 0.0828),
    ("work", "Work", "Job, workplace, colleagues, career", 0.0610),
    ("other", "Other", "Situations outside the named groups", 0.0553),
]


class LabelCatalog:
    """Ordered, immutable collection of labels with id and category lookup."""

    def __init__(self, labels: Iterable[Label]):
        self._labels = tuple(labels)
        self._by_id = {lab.id: lab for lab in self._labels}
        if len(self._by_id) != len(self._labels):
            raise ValueError("duplicate label ids in catalog")

    def __iter__(self) -> Iterator[Label]:
        return iter(self._labels)

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, label_id: str) -> bool:
        return label_id in self._by_id

    def get(self, label_id: str) -> Label:
        try:
            return self._by_id[label_id]
        except KeyError:
            raise UnknownLabel(label_id) from None

    def prior(self, label_id: str) -> float:
        return self.get(label_id).prior

    @property
    def ids(self) -> list[str]:
        return [lab.id for lab in self._labels]

    def by_category(self, category: Category) -> list[Label]:
        return [lab for lab in self._labels if lab.category is category]

    def to_json(self) -> str:
        rows = [
            {"category": lab.category.value, "id": lab.id,
             "display_name": lab.display_name, "description": lab.description,
             "prior": lab.prior}
            for lab in self._labels
        ]
        return json.dumps(rows, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "LabelCatalog":
        rows = json.loads(text)
        return cls(
            Label(id=r["id"], category=Category(r["category"]),
                  display_name=r["display_name"], description=r["description"],
                  prior=float(r["prior"]))
            for r in rows
        )


def catalog_load() -> LabelCatalog:
    """Return the built-in 31-label catalog (15 thinking errors, 9 emotions, 7 situations)."""
    labels = []
    for cat, table in ((Category.THINKING_ERROR, _THINKING_ERRORS),
                       (Category.EMOTION, _EMOTIONS),
                       (Category.SITUATION, _SITUATIONS)):
        for lid, name, desc, prior in table:
            labels.append(Label(id=lid, category=cat, display_name=name,
                                description=desc, prior=prior))
    return LabelCatalog(labels)


def labels_of(category: Category, catalog: LabelCatalog) -> list[Label]:
    """Labels of one category, in catalog order."""
    return catalog.by_category(category)


def validate_labelset(members: Iterable[str], catalog: LabelCatalog) -> list[str]:
    """Return the sorted list of member ids not present in the catalog (empty = valid)."""
    return sorted({m for m in members if m not in catalog})


def require_known(members: Iterable[str], catalog: LabelCatalog) -> frozenset[str]:
    """Validate and normalize a label set; raise UnknownLabel listing all offenders."""
    members = frozenset(members)
    unknown = validate_labelset(members, catalog)
    if unknown:
        raise UnknownLabel(unknown)
    return members
