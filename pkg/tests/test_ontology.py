import pytest

from cbtnlu.errors import UnknownLabel
from cbtnlu.ontology import (Category, LabelCatalog, catalog_load, labels_of,
                             require_known, validate_labelset)


@pytest.fixture(scope="module")
def catalog():
    return catalog_load()


def test_category_counts(catalog):
    assert len(catalog) == 31
    assert len(catalog.by_category(Category.THINKING_ERROR)) == 15
    assert len(catalog.by_category(Category.EMOTION)) == 9
    assert len(catalog.by_category(Category.SITUATION)) == 7


def test_known_priors(catalog):
    assert catalog.prior("jumping_to_negative_conclusions") == pytest.approx(0.4416)
    assert catalog.prior("relationships") == pytest.approx(0.6758)
    assert catalog.prior("anxiety") == pytest.approx(0.6312)


def test_emotion_priors_sum(catalog):
    total = sum(lab.prior for lab in catalog.by_category(Category.EMOTION))
    assert abs(total - 1.4376) < 1e-4


def test_priors_are_fractions(catalog):
    assert all(0.0 < lab.prior < 1.0 for lab in catalog)


def test_catalog_order(catalog):
    emotions = labels_of(Category.EMOTION, catalog)
    assert emotions[0].id == "anger"
    errors = labels_of(Category.THINKING_ERROR, catalog)
    assert errors[-1].id == "personalising"
    assert errors[0].id == "black_and_white"
    # category blocks appear in fixed order
    cats = [lab.category for lab in catalog]
    assert cats == sorted(cats, key=[Category.THINKING_ERROR, Category.EMOTION,
                                     Category.SITUATION].index)


def test_catalog_load_pure():
    a, b = catalog_load(), catalog_load()
    assert [lab for lab in a] == [lab for lab in b]


def test_unique_ids(catalog):
    assert len(set(catalog.ids)) == 31


def test_validate_labelset(catalog):
    assert validate_labelset({"anxiety", "work"}, catalog) == []
    assert validate_labelset(set(), catalog) == []
    assert validate_labelset({"happiness"}, catalog) == ["happiness"]
    with pytest.raises(UnknownLabel) as err:
        require_known({"happiness", "anxiety"}, catalog)
    assert err.value.label_ids == ["happiness"]


def test_labelset_allows_multiple_same_category(catalog):
    members = require_known({"anxiety", "depression", "loneliness"}, catalog)
    assert len(members) == 3


def test_json_round_trip(catalog):
    clone = LabelCatalog.from_json(catalog.to_json())
    assert [lab for lab in clone] == [lab for lab in catalog]


def test_lookup_unknown_raises(catalog):
    with pytest.raises(UnknownLabel):
        catalog.get("nope")
