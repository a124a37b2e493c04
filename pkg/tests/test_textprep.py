import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbtnlu.errors import EmptyVocabulary
from cbtnlu.textprep import (PAD_TOKEN, Vocabulary, bound_length, bow_featurize,
                             build_vocab, post_sentences, split_sentences,
                             tokenize)


def test_tokenize_basic():
    assert tokenize("I'm so depressed.") == ["i'm", "so", "depressed", "."]
    assert tokenize("") == []
    assert tokenize("don't worry—really") == ["don't", "worry", "—", "really"]


def test_tokenize_punctuation_detached():
    assert tokenize("Hello, world!") == ["hello", ",", "world", "!"]
    assert tokenize("wait...") == ["wait", ".", ".", "."]


@given(st.text(max_size=200))
@settings(max_examples=200, deadline=None)
def test_tokenize_idempotent_under_rejoin(text):
    toks = tokenize(text)
    assert tokenize(" ".join(toks)) == toks


def test_split_sentences():
    assert split_sentences("I failed. Everyone saw.") == ["I failed.", "Everyone saw."]
    assert split_sentences("no terminator") == ["no terminator"]
    assert split_sentences("Hi! There? Ok") == ["Hi!", "There?", "Ok"]
    assert split_sentences("") == []


def test_split_sentences_cap():
    text = " ".join(f"s{i}." for i in range(40))
    sents = split_sentences(text)
    assert len(sents) == 30
    assert sents[0] == "s0."
    assert sents[-1] == "s29."


def test_bound_length():
    toks = [f"t{i}" for i in range(60)]
    assert bound_length(toks, 50) == toks[:50]
    assert bound_length(toks[:10], 50) == toks[:10]
    assert bound_length(toks[:50], 50) == toks[:50]


@given(st.lists(st.text(min_size=1, max_size=5), max_size=80),
       st.integers(min_value=1, max_value=60))
@settings(max_examples=100, deadline=None)
def test_bound_length_property(tokens, m):
    assert len(bound_length(tokens, m)) <= m


def test_build_vocab_min_count():
    vocab = build_vocab(["a a b"], min_count=2)
    assert vocab.tokens == [PAD_TOKEN, "a"]
    assert vocab.count("a") == 2


def test_build_vocab_all_tokens():
    vocab = build_vocab(["a b c c"], min_count=1)
    assert set(vocab.tokens) == {PAD_TOKEN, "a", "b", "c"}
    assert vocab.index("c") == 1  # highest frequency first


def test_build_vocab_deterministic():
    texts = ["the cat sat", "the dog sat down"]
    v1, v2 = build_vocab(texts), build_vocab(texts)
    assert v1.tokens == v2.tokens


def test_build_vocab_empty_raises():
    with pytest.raises(EmptyVocabulary):
        build_vocab(["a b"], min_count=5)


def test_vocab_save_load(tmp_path):
    vocab = build_vocab(["x y y z?!"], min_count=1)
    path = tmp_path / "vocab.tsv"
    vocab.save(path)
    clone = Vocabulary.load(path)
    assert clone.tokens == vocab.tokens
    assert all(clone.count(t) == vocab.count(t) for t in vocab.tokens)


def test_bow_featurize():
    vocab = build_vocab(["sad day sad"], min_count=1)
    vec = bow_featurize(["sad", "sad", "day"], vocab)
    assert vec == {vocab.index("sad"): 2, vocab.index("day"): 1}
    assert bow_featurize(["zzz", "qqq"], vocab) == {}


def test_bow_additive_over_concatenation():
    vocab = build_vocab(["a b c d"], min_count=1)
    left, right = ["a", "b", "a"], ["b", "c"]
    combined = bow_featurize(left + right, vocab)
    l, r = bow_featurize(left, vocab), bow_featurize(right, vocab)
    summed = {k: l.get(k, 0) + r.get(k, 0) for k in set(l) | set(r)}
    assert combined == summed


@given(st.lists(st.sampled_from(["a", "b", "c", "zzz"]), max_size=40))
@settings(max_examples=100, deadline=None)
def test_bow_l1_norm(tokens):
    vocab = build_vocab(["a b c"], min_count=1)
    vec = bow_featurize(tokens, vocab)
    in_vocab = sum(1 for t in tokens if t in ("a", "b", "c"))
    assert sum(vec.values()) == in_vocab


def test_post_sentences_order_and_bound():
    sents = post_sentences("First one. Second one.", "The take.")
    assert sents == [["first", "one", "."], ["second", "one", "."],
                     ["the", "take", "."]]
    long_sentence = " ".join(["w"] * 80)
    bounded = post_sentences(long_sentence, "")
    assert len(bounded) == 1 and len(bounded[0]) == 50
