"""Acceptance suite: one test per criterion, each printing a pass line with
the measured values (run with -s or read the captured output).

The heavyweight end-to-end fixtures (5000-post corpus, trained word vectors)
are module-scoped and shared between the learnability and sweep criteria.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from cbtnlu.corpus import (Dataset, OversampleSpec, oversample, split_folds,
                           synth_generate)
from cbtnlu.embeddings import (SentenceVectorProvider, build_cooccurrence,
                               train_word_vectors)
from cbtnlu.evaluation import (ContingencyTable, aggregate, analytic_report,
                               binary_counts, chance_f1, cohen_kappa, prf1)
from cbtnlu.experiment import cross_validate, sweep_csv, sweep_ratios
from cbtnlu.models import (FeatureCache, GatedCnn, GatedCnnConfig,
                           GruClassifier, GruClassifierConfig, TrainConfig,
                           build_cnn_features, build_gru_features,
                           chance_predict, load_bundle)
from cbtnlu.numerics import (GruWeights, add_l2_grads, gate_combine,
                             grad_check, gru_step, l2_penalty, sigmoid,
                             stable_bce)
from cbtnlu.ontology import catalog_load
from cbtnlu.service import AnnotationStore
from cbtnlu.textprep import build_vocab, tokenize


@pytest.fixture(scope="module")
def catalog():
    return catalog_load()


@pytest.fixture(scope="module")
def pipeline(catalog):
    """Seeded 5000-post corpus with corpus-trained 100-dim word vectors."""
    t0 = time.time()
    ds = synth_generate(catalog, 5000, seed=11)
    texts = [p.problem + " " + p.negative_take for p in ds.posts]
    vocab = build_vocab(texts)
    table = build_cooccurrence([tokenize(t) for t in texts], vocab, window=10)
    matrix, _ = train_word_vectors(table, vocab, dim=100, epochs=30, seed=11)
    provider = SentenceVectorProvider.mean_pool(matrix)
    print(f"\n[pipeline fixture] corpus + vectors ready in {time.time() - t0:.0f}s")
    return ds, vocab, matrix, provider


LEARNABILITY_LABELS = ["anxiety", "relationships", "jumping_to_negative_conclusions"]


def test_criterion_1_majority_reproduction(catalog):
    t0 = time.time()
    report = analytic_report("majority", catalog)
    assert abs(report.macro_f1 - 0.24) <= 0.01
    assert abs(report.weighted_f1 - 0.432) <= 0.01
    assert time.time() - t0 < 1.0
    print(f"PASS criterion 1: majority macro {report.macro_f1:.4f} (0.24±0.01), "
          f"weighted {report.weighted_f1:.4f} (0.432±0.01)")


def test_criterion_2_chance_reproduction(catalog):
    t0 = time.time()
    report = analytic_report("chance", catalog)
    assert abs(report.macro_f1 - 0.203) <= 0.01
    assert abs(report.weighted_f1 - 0.337) <= 0.01

    # seeded fair-coin simulation over >= 20000 synthetic posts
    ds = synth_generate(catalog, 20000, seed=29)
    per_label = {}
    for i, lab in enumerate(catalog):
        pred = chance_predict(ds.ids, seed=1000 + i)
        positives = {pid for pid in ds.ids if lab.id in ds.gold[pid]}
        per_label[lab.id] = [prf1(binary_counts(pred, positives, ds.ids),
                                  label=lab.id)]
    empirical = aggregate(per_label, catalog, model="chance(mc)")
    assert abs(empirical.macro_f1 - report.macro_f1) <= 0.01
    assert abs(empirical.weighted_f1 - report.weighted_f1) <= 0.01
    elapsed = time.time() - t0
    assert elapsed < 30.0
    print(f"PASS criterion 2: chance analytic macro {report.macro_f1:.4f} "
          f"weighted {report.weighted_f1:.4f}; Monte Carlo macro "
          f"{empirical.macro_f1:.4f} weighted {empirical.weighted_f1:.4f} "
          f"({elapsed:.0f}s)")


def test_criterion_3_gradient_correctness():
    t0 = time.time()
    words = ("alpha bravo charlie delta echo foxtrot golf hotel india "
             "juliet kilo lima").split()
    vocab = build_vocab([" ".join(words)])
    rng = np.random.default_rng(0)
    from cbtnlu.embeddings import EmbeddingMatrix
    matrix = EmbeddingMatrix(vocab, rng.normal(scale=0.4,
                                               size=(len(vocab), 16)))
    provider = SentenceVectorProvider.mean_pool(matrix)
    worst = {}

    def check_cnn(posts, y, tag):
        from cbtnlu.corpus import Post
        ds = Dataset(posts=[Post(f"p{i}", prob, neg)
                            for i, (prob, neg) in enumerate(posts)])
        cache = FeatureCache()
        build_cnn_features(ds, vocab, cache)
        from cbtnlu.models import collate_cnn
        batch = collate_cnn(ds.ids, cache)
        model = GatedCnn(GatedCnnConfig(embed_dim=16), matrix, seed=1)
        # keep conv pre-activations away from the ReLU/max-pool switching
        # points that a finite-difference probe would straddle
        nudge = np.random.default_rng(99)
        for w, bias in model.biases_p.items():
            bias.value[:] = nudge.uniform(0.05, 0.15, size=bias.value.shape)
        params = model.params()

        def loss_fn():
            logits, fwd = model.forward_batch(batch, train=False)
            loss = float(stable_bce(logits, np.asarray(y)).mean())
            loss += l2_penalty(params, 1e-4)
            model.backward_batch((sigmoid(logits) - y) / len(y), fwd)
            add_l2_grads(params, 1e-4)
            return loss

        worst[tag] = grad_check(loss_fn, params, eps=1e-5, max_elements=200,
                                seed=7)

    check_cnn([("alpha bravo charlie. delta echo.", "foxtrot golf hotel"),
               ("india juliet kilo", "lima alpha")], np.array([1.0, 0.0]),
              "cnn")
    check_cnn([("alpha bravo charlie delta", ""),
               ("echo foxtrot golf", "")], np.array([0.0, 1.0]),
              "cnn_empty_negtake")

    def check_gru(n_sentences, tag):
        from cbtnlu.corpus import Post
        problem = " ".join(f"{words[2 * i]} {words[2 * i + 1]}."
                           for i in range(n_sentences))
        ds = Dataset(posts=[Post("p0", problem, ""),
                            Post("p1", "alpha charlie.", "echo golf")])
        cache = FeatureCache()
        build_gru_features(ds, provider, cache)
        from cbtnlu.models import collate_gru
        batch = collate_gru(ds.ids, cache)
        model = GruClassifier(GruClassifierConfig(input_dim=16), seed=2)
        params = model.params()
        y = np.array([1.0, 0.0])

        def loss_fn():
            logits, fwd = model.forward_batch(batch, train=False)
            loss = float(stable_bce(logits, y).mean()) + l2_penalty(params, 1e-4)
            model.backward_batch((sigmoid(logits) - y) / len(y), fwd)
            add_l2_grads(params, 1e-4)
            return loss

        worst[tag] = grad_check(loss_fn, params, eps=1e-5, max_elements=200,
                                seed=8)

    check_gru(1, "gru_T1")
    check_gru(5, "gru_T5")

    elapsed = time.time() - t0
    assert all(err < 1e-4 for err in worst.values()), worst
    assert elapsed < 120.0
    summary = ", ".join(f"{k}={v:.2e}" for k, v in worst.items())
    print(f"PASS criterion 3: max relative gradient errors {summary} "
          f"(< 1e-4, {elapsed:.0f}s)")


def test_criterion_4_equation_identities():
    rng = np.random.default_rng(3)
    p = rng.random(8) + 0.5
    n = rng.random(8) + 0.5
    zeros = np.zeros((8, 8))
    assert np.array_equal(gate_combine(p, n, zeros, zeros, np.full(8, 50.0)), p)
    assert np.array_equal(gate_combine(p, n, zeros, zeros, np.full(8, -50.0)), n)

    h_prev = rng.normal(size=4)
    e = rng.normal(size=3)
    weights = GruWeights(
        rng.normal(scale=0.1, size=(4, 4)), rng.normal(scale=0.1, size=(4, 3)),
        np.full(4, 50.0),
        rng.normal(scale=0.1, size=(4, 4)), rng.normal(scale=0.1, size=(4, 3)),
        np.zeros(4),
        rng.normal(scale=0.1, size=(4, 4)), rng.normal(scale=0.1, size=(4, 3)),
        np.zeros(4))
    assert np.array_equal(gru_step(h_prev, e, weights), h_prev)

    ones = np.full((1, 1), 0.5)
    scalar = GruWeights(ones, ones.copy(), np.zeros(1), ones.copy(),
                        ones.copy(), np.zeros(1), ones.copy(), ones.copy(),
                        np.zeros(1))
    h = gru_step(np.zeros(1), np.ones(1), scalar)
    assert abs(h[0] - 0.1745) <= 1e-4
    print(f"PASS criterion 4: forced-gate identities exact; "
          f"scalar GRU step {h[0]:.6f} (0.1745±1e-4)")


def test_criterion_5_learnability_above_chance(catalog, pipeline):
    ds, vocab, matrix, provider = pipeline
    t0 = time.time()
    config = TrainConfig(max_epochs=6, patience=2, seed=3,
                         ratio=OversampleSpec(1, 1))
    chance_macro = float(np.mean([chance_f1(catalog.prior(lab))
                                  for lab in LEARNABILITY_LABELS]))
    results = {}
    for kind in ("cnn", "gru", "lr", "svm"):
        res = cross_validate(kind, LEARNABILITY_LABELS, ds, config, catalog,
                             vocab=vocab, matrix=matrix, provider=provider,
                             k=10)
        assert not res.errors, res.errors
        results[kind] = res.report.macro_f1

    elapsed = time.time() - t0
    for kind in ("cnn", "gru"):
        assert results[kind] >= 0.85, f"{kind} macro {results[kind]:.3f}"
        assert results[kind] - chance_macro >= 0.3
    for kind in ("lr", "svm"):
        assert results[kind] > chance_macro
    assert elapsed < 1200.0, f"learnability run took {elapsed:.0f}s"
    print(f"PASS criterion 5: macro F1 cnn {results['cnn']:.3f}, "
          f"gru {results['gru']:.3f} (both >= 0.85 and >= chance "
          f"{chance_macro:.3f} + 0.3); lr {results['lr']:.3f}, "
          f"svm {results['svm']:.3f} exceed chance ({elapsed:.0f}s)")


def test_criterion_6_oversampling_ratio_sweep(catalog):
    t0 = time.time()
    ds = synth_generate(catalog, 1500, seed=23)
    texts = [p.problem + " " + p.negative_take for p in ds.posts]
    vocab = build_vocab(texts)
    table = build_cooccurrence([tokenize(t) for t in texts], vocab, window=10)
    matrix, _ = train_word_vectors(table, vocab, dim=50, epochs=20, seed=23)
    ratios = [OversampleSpec.parse(r) for r in ("1:1", "1:3", "1:5", "1:7")]
    results = sweep_ratios("cnn", ["work"], ds,
                           TrainConfig(max_epochs=3, patience=2, seed=23),
                           catalog, ratios, vocab=vocab, matrix=matrix, k=5)
    assert len(results) == 4
    csv = sweep_csv(results)
    assert len(csv.strip().splitlines()) == 5
    by_ratio = {res.ratio: res.report.weighted_f1 for res in results}
    assert by_ratio["1:1"] >= by_ratio["1:7"]
    print(f"PASS criterion 6: weighted F1 by ratio "
          f"{ {k: round(v, 3) for k, v in by_ratio.items()} }; "
          f"1:1 >= 1:7 ({time.time() - t0:.0f}s)")


def test_criterion_7_kappa_correctness():
    exact = cohen_kappa(ContingencyTable(25, 0, 0, 25))
    assert exact.kappa == 1.0
    hand = cohen_kappa(ContingencyTable(20, 5, 10, 15))
    assert abs(hand.kappa - 0.40) <= 1e-9

    # B copies A (fair coin per decision) with prob 0.9, else flips:
    # true kappa = 2*0.9 - 1 = 0.8
    rng_master = np.random.default_rng(123)
    true_kappa = 0.8
    hits = 0
    for _ in range(100):
        rng = np.random.default_rng(rng_master.integers(2 ** 32))
        a = rng.random(400) < 0.5
        copy = rng.random(400) < 0.9
        b = np.where(copy, a, ~a)
        table = ContingencyTable(int(np.sum(a & b)), int(np.sum(a & ~b)),
                                 int(np.sum(~a & b)), int(np.sum(~a & ~b)))
        res = cohen_kappa(table)
        if res.ci_low <= true_kappa <= res.ci_high:
            hits += 1
    assert hits >= 90
    print(f"PASS criterion 7: exact kappas 1.0 and 0.40; CI coverage "
          f"{hits}/100 trials (>= 90)")


def _run_cli(*args):
    return subprocess.run([sys.executable, "-m", "cbtnlu.cli", *args],
                          capture_output=True, text=True)


def test_criterion_8_determinism_and_persistence(tmp_path, catalog):
    corpus = tmp_path / "corpus.jsonl"
    res = _run_cli("synth", "--n", "120", "--seed", "5", "--out", str(corpus))
    assert res.returncode == 0, res.stderr

    # train twice: byte-identical checkpoints and bundle manifests
    bundles = []
    for tag in ("one", "two"):
        out = tmp_path / f"bundle_{tag}"
        res = _run_cli("train", "--model", "cnn", "--label", "anxiety",
                       "--corpus", str(corpus), "--dim", "32",
                       "--embed-epochs", "5", "--epochs", "2", "--seed", "5",
                       "--out", str(out))
        assert res.returncode == 0, res.stderr
        bundles.append(out)
    ckpt = "ckpt/anxiety.ckpt"
    assert (bundles[0] / ckpt).read_bytes() == (bundles[1] / ckpt).read_bytes()
    assert (bundles[0] / "manifest.json").read_bytes() == \
           (bundles[1] / "manifest.json").read_bytes()

    # cv twice: byte-identical reports
    cvs = []
    for tag in ("one", "two"):
        out = tmp_path / f"cv_{tag}"
        res = _run_cli("cv", "--model", "lr", "--corpus", str(corpus),
                       "--label", "anxiety", "--folds", "5", "--epochs", "3",
                       "--seed", "9", "--out", str(out))
        assert res.returncode == 0, res.stderr
        cvs.append(out)
    for name in ("report_1-1.csv", "report_1-1.txt", "sweep.csv", "folds.json"):
        assert (cvs[0] / name).read_bytes() == (cvs[1] / name).read_bytes()

    # checkpoint save -> load -> forward is bit-exact
    from cbtnlu.corpus import ingest
    ds = ingest(corpus, catalog)
    predictor_a = load_bundle(bundles[0])
    predictor_b = load_bundle(bundles[1])
    posts = ds.posts[:20]
    scores_a = predictor_a.score_posts(posts)
    scores_b = predictor_b.score_posts(posts)
    assert all(scores_a[p.id]["anxiety"] == scores_b[p.id]["anxiety"]
               for p in posts)

    # journal replay reproduces the store after a simulated crash
    store_dir = tmp_path / "store"
    store = AnnotationStore.create_dir(store_dir,
                                       Dataset(posts=list(ds.posts)), catalog)
    store.put_labels(ds.posts[0].id, "alice", frozenset({"anxiety"}),
                     frozenset())
    store.put_labels(ds.posts[1].id, "alice", frozenset({"work", "hurt"}),
                     frozenset())
    store.put_labels(ds.posts[0].id, "alice", frozenset(),
                     frozenset({"anxiety"}))
    state = {key: ann.labels for key, ann in store._annotations.items()}
    recovered = AnnotationStore.open_dir(store_dir, catalog)  # crash + reopen
    recovered_state = {key: ann.labels
                       for key, ann in recovered._annotations.items()}
    assert recovered_state == state
    store.close()
    recovered.close()
    print("PASS criterion 8: byte-identical checkpoints and reports across "
          "reruns; checkpoint round-trip forward bit-exact; journal replay "
          "reproduces store state")


def test_criterion_9_split_oversample_invariants(catalog):
    ds = synth_generate(catalog, 730, seed=37)
    plan = split_folds(ds, k=10, seed=4)
    seen = set()
    for fold in plan.folds:
        train, val, test = set(fold.train), set(fold.val), set(fold.test)
        assert not (train & val or train & test or val & test)
        assert train | val | test == set(ds.ids)
        assert not seen & test
        seen |= test
    assert seen == set(ds.ids)

    for fold_i, fold in enumerate(plan.folds):
        stream = oversample(fold.train, ds.gold, "anxiety",
                            OversampleSpec(1, 1), seed=fold_i)
        stream_ids = set(stream)
        assert stream_ids <= set(fold.train)
        assert not stream_ids & set(fold.test)
        assert not stream_ids & set(fold.val)
    print("PASS criterion 9: fold partitions form a disjoint cover; "
          "oversampled streams draw only from training partitions")
