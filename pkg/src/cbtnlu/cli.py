"""Command-line entry point.

Subcommands: synth, embed, train, cv, eval, kappa, predict, serve. Every
artifact-producing command writes a run manifest (command, config, seeds,
input digests, outputs, wall time) next to its outputs; reports and
checkpoints themselves are byte-reproducible for a fixed seed, the manifest
carries the timing and is not.

Usage errors exit 2 (argparse default); data errors exit 1 with the error
class name on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

DATA_DIR_ENV = "CBTNLU_DATA_DIR"
_PATH_OPTIONS = ("corpus", "vectors", "out", "report", "store", "config", "in")

from .corpus import OversampleSpec, export, ingest, split_folds, synth_generate
from .embeddings import (SentenceVectorProvider, build_cooccurrence,
                         load_vectors, save_vectors, train_word_vectors)
from .errors import CbtnluError
from .evaluation import aggregate, analytic_report, binary_counts, prf1
from .experiment import labeled_subset, sweep_csv, sweep_ratios
from .evaluation.agreement import agreement_report
from .models import (GatedCnn, GatedCnnConfig, GruClassifier,
                     GruClassifierConfig, TrainConfig, load_bundle,
                     save_bundle, train_binary, train_linear)
from .models.common import FeatureCache, build_bow_features, build_cnn_features, build_gru_features
from .ontology import Category, catalog_load
from .textprep import build_vocab, tokenize

log = logging.getLogger("cbtnlu")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir: Path, command: str, args: argparse.Namespace,
                    inputs: list, outputs: list, started: float,
                    extra: dict | None = None) -> None:
    manifest = {
        "command": command,
        "argv": sys.argv[1:],
        "options": {k: v for k, v in vars(args).items() if k != "func"},
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "wall_time_s": round(time.time() - started, 3),
    }
    if extra:
        manifest.update(extra)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "run_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _corpus_texts(dataset):
    for post in dataset.posts:
        yield post.problem
        if post.negative_take:
            yield post.negative_take


def _token_streams(dataset):
    for text in _corpus_texts(dataset):
        yield tokenize(text)


def _train_config(args) -> TrainConfig:
    cfg = (TrainConfig.from_json_file(args.config) if getattr(args, "config", None)
           else TrainConfig())
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "ratio", None):
        updates["ratio"] = OversampleSpec.parse(args.ratio)
    if getattr(args, "epochs", None):
        updates["max_epochs"] = args.epochs
    if getattr(args, "patience", None):
        updates["patience"] = args.patience
    if getattr(args, "batch", None):
        updates["batch"] = args.batch
    return replace(cfg, **updates) if updates else cfg


def _resolve_labels(args, catalog) -> list[str]:
    if getattr(args, "label", None):
        labels = [s.strip() for s in args.label.split(",") if s.strip()]
        for lab in labels:
            catalog.get(lab)
        return labels
    if getattr(args, "category", None):
        cat = Category(args.category)
        return [lab.id for lab in catalog.by_category(cat)]
    return catalog.ids


def _prepare_vectors(args, dataset, vocab):
    if getattr(args, "vectors", None):
        return load_vectors(args.vectors, vocab)
    dim = getattr(args, "dim", None) or 100
    log.info("no --vectors given; training %d-dim word vectors on the corpus", dim)
    table = build_cooccurrence(_token_streams(dataset), vocab)
    matrix, _ = train_word_vectors(table, vocab, dim=dim,
                                   epochs=getattr(args, "embed_epochs", None) or 15,
                                   seed=getattr(args, "seed", 0) or 0)
    return matrix


# --- subcommands --------------------------------------------------------------

def cmd_synth(args) -> int:
    started = time.time()
    catalog = catalog_load()
    dataset = synth_generate(catalog, n_posts=args.n, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    export(dataset, out)
    _write_manifest(out.parent, "synth", args, [], [out], started,
                    {"seeds": {"generator": args.seed}})
    print(f"wrote {len(dataset)} posts to {out}")
    return 0


def cmd_embed(args) -> int:
    started = time.time()
    catalog = catalog_load()
    dataset = ingest(args.corpus, catalog)
    vocab = build_vocab(_corpus_texts(dataset), min_count=args.min_count)
    table = build_cooccurrence(_token_streams(dataset), vocab, window=args.window)
    matrix, history = train_word_vectors(table, vocab, dim=args.dim,
                                         epochs=args.epochs, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_vectors(matrix, out)
    vocab.save(out.with_suffix(".vocab.tsv"))
    _write_manifest(out.parent, "embed", args, [args.corpus],
                    [out, out.with_suffix(".vocab.tsv")], started,
                    {"seeds": {"vectors": args.seed},
                     "objective": {"first": history[0], "last": history[-1]}})
    print(f"trained {len(vocab) - 1} vectors of dim {args.dim}; "
          f"objective {history[0]:.3f} -> {history[-1]:.3f}")
    return 0


def cmd_train(args) -> int:
    started = time.time()
    catalog = catalog_load()
    dataset = ingest(args.corpus, catalog)
    config = _train_config(args)
    labels = _resolve_labels(args, catalog)
    vocab = build_vocab(_corpus_texts(dataset), min_count=1)

    matrix = None
    provider = None
    features = FeatureCache()
    if args.model in ("cnn", "gru"):
        matrix = _prepare_vectors(args, dataset, vocab)
        provider = SentenceVectorProvider.mean_pool(matrix)
        if args.model == "cnn":
            build_cnn_features(dataset, vocab, features)
        else:
            build_gru_features(dataset, provider, features)
    else:
        build_bow_features(dataset, vocab, features)

    labeled = [pid for pid in dataset.ids if pid in dataset.gold]
    import numpy as np
    rng = np.random.default_rng(config.seed)
    order = [labeled[i] for i in rng.permutation(len(labeled))]
    n_val = max(1, len(order) // 10)
    val_ids, train_ids = order[:n_val], order[n_val:]

    label_models = {}
    metrics = {}
    for label in labels:
        if args.model == "cnn":
            model = GatedCnn(GatedCnnConfig(embed_dim=matrix.dim), matrix,
                             seed=config.seed)
            result = train_binary(model, "cnn", label, train_ids, val_ids,
                                  dataset.gold, features, config)
            label_models[label] = model
        elif args.model == "gru":
            model = GruClassifier(GruClassifierConfig(input_dim=provider.dim),
                                  seed=config.seed)
            result = train_binary(model, "gru", label, train_ids, val_ids,
                                  dataset.gold, features, config)
            label_models[label] = model
        else:
            mode = "logistic" if args.model == "lr" else "hinge"
            params, result = train_linear(mode, label, train_ids, val_ids,
                                          dataset.gold, features, config,
                                          len(vocab))
            label_models[label] = params
        metrics[label] = {"val_f1": result.best_val_f1,
                          "best_epoch": result.best_epoch,
                          "epochs_run": len(result.history)}
        log.info("label %s: best val F1 %.3f at epoch %d", label,
                 result.best_val_f1, result.best_epoch)

    if args.model == "cnn":
        model_config = GatedCnnConfig(embed_dim=matrix.dim).to_dict()
    elif args.model == "gru":
        model_config = GruClassifierConfig(input_dim=provider.dim).to_dict()
    else:
        model_config = {"vocab_size": len(vocab)}
    out = Path(args.out)
    save_bundle(out, args.model, label_models, vocab, matrix, model_config,
                config.to_dict(), metrics)
    _write_manifest(out, "train", args, [args.corpus], [out], started,
                    {"seeds": {"train": config.seed}, "metrics": metrics})
    print(f"trained {len(label_models)} {args.model} model(s) -> {out}")
    return 0


def cmd_cv(args) -> int:
    started = time.time()
    catalog = catalog_load()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.analytic:
        if args.model not in ("chance", "majority"):
            raise ValueError("--analytic supports only chance and majority")
        report = analytic_report(args.model, catalog)
        (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
        (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
        _write_manifest(out, "cv", args, [], [out / "report.csv", out / "report.txt"],
                        started)
        print(report.to_text())
        return 0

    dataset = ingest(args.corpus, catalog)
    config = _train_config(args)
    labels = _resolve_labels(args, catalog)
    vocab = build_vocab(_corpus_texts(dataset), min_count=1)
    matrix = provider = None
    if args.model in ("cnn", "gru"):
        matrix = _prepare_vectors(args, dataset, vocab)
        provider = SentenceVectorProvider.mean_pool(matrix)

    ratios = [OversampleSpec.parse(r) for r in args.ratios.split(",")]
    results = sweep_ratios(args.model, labels, dataset, config, ratios=ratios,
                           catalog=catalog, vocab=vocab, matrix=matrix,
                           provider=provider, k=args.folds, jobs=args.jobs)
    outputs = []
    for res in results:
        tag = res.ratio.replace(":", "-")
        (out / f"report_{tag}.csv").write_text(res.report.to_csv(), encoding="utf-8")
        (out / f"report_{tag}.txt").write_text(res.report.to_text(), encoding="utf-8")
        outputs += [out / f"report_{tag}.csv", out / f"report_{tag}.txt"]
        if res.errors:
            log.warning("ratio %s: %d failed job(s)", res.ratio, len(res.errors))
    (out / "sweep.csv").write_text(sweep_csv(results), encoding="utf-8")
    plan = split_folds(labeled_subset(dataset), k=args.folds, seed=config.seed)
    (out / "folds.json").write_text(plan.to_json(), encoding="utf-8")
    outputs += [out / "sweep.csv", out / "folds.json"]
    _write_manifest(out, "cv", args, [args.corpus], outputs, started,
                    {"seeds": {"cv": config.seed}})
    for res in results:
        print(f"ratio {res.ratio}: macro F1 {res.report.macro_f1:.3f}, "
              f"weighted F1 {res.report.weighted_f1:.3f}")
    return 0


def cmd_eval(args) -> int:
    started = time.time()
    catalog = catalog_load()
    dataset = ingest(args.corpus, catalog)
    predictor = load_bundle(args.models)
    labeled = [p for p in dataset.posts if p.id in dataset.gold]
    predictions = predictor.predict_posts(labeled)
    metrics_by_label = {}
    ids = [p.id for p in labeled]
    for label in predictor.labels:
        pred = {pid: label in predictions[pid][0] for pid in ids}
        positives = {pid for pid in ids
                     if label in dataset.gold.get(pid, frozenset())}
        metrics_by_label[label] = [prf1(binary_counts(pred, positives, ids),
                                        label=label)]
    report = aggregate(metrics_by_label, catalog, model=predictor.kind,
                       labels=predictor.labels)
    out = Path(args.report)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_csv(), encoding="utf-8")
    out.with_suffix(".txt").write_text(report.to_text(), encoding="utf-8")
    _write_manifest(out.parent, "eval", args, [args.corpus],
                    [out, out.with_suffix(".txt")], started)
    print(report.to_text())
    return 0


def cmd_kappa(args) -> int:
    from .service import AnnotationStore
    catalog = catalog_load()
    store = AnnotationStore.open_dir(args.store, catalog)
    try:
        report = agreement_report(store.annotations_by(args.a),
                                  store.annotations_by(args.b), catalog)
    finally:
        store.close()
    print(f"doubly annotated posts: {report.n_posts}")
    for cat, res in report.per_category.items():
        print(f"{cat:<16} kappa {res.kappa:6.3f}  "
              f"95% CI [{res.ci_low:6.3f}, {res.ci_high:6.3f}]  n={res.n}")
    return 0


def cmd_predict(args) -> int:
    started = time.time()
    catalog = catalog_load()
    dataset = ingest(getattr(args, "in"), catalog)
    predictor = load_bundle(args.models)
    missing = predictor.missing_labels(catalog)
    if missing:
        log.warning("bundle has no model for %d label(s): %s",
                    len(missing), ", ".join(missing[:5]) + ("..." if len(missing) > 5 else ""))
    predictions = predictor.predict_posts(dataset.posts)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        for post in dataset.posts:
            chosen, scores = predictions[post.id]
            fh.write(json.dumps({
                "id": post.id,
                "labels": sorted(chosen),
                "scores": {k: round(v, 6) for k, v in sorted(scores.items())},
            }) + "\n")
    _write_manifest(out.parent, "predict", args, [getattr(args, "in")], [out],
                    started)
    print(f"wrote predictions for {len(dataset)} posts to {out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import AnnotationStore, create_app
    store = AnnotationStore.open_dir(args.store, catalog_load())
    app = create_app(store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbtnlu",
        description="CBT concept classification: data, training, evaluation, "
                    "annotation service")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic keyword-planted corpus")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("embed", help="train word vectors on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--dim", type=int, choices=[100, 300], default=100)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--epochs", type=int, default=25)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    def train_like(p, model_choices=("cnn", "gru", "lr", "svm")):
        p.add_argument("--model", required=True, choices=list(model_choices))
        p.add_argument("--label")
        p.add_argument("--category",
                       choices=[c.value for c in Category])
        p.add_argument("--corpus", required=True)
        p.add_argument("--vectors")
        p.add_argument("--dim", type=int, default=100,
                       help="dimension when vectors are trained on the fly")
        p.add_argument("--embed-epochs", type=int, default=15)
        p.add_argument("--ratio", default="1:1")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--epochs", type=int)
        p.add_argument("--patience", type=int)
        p.add_argument("--batch", type=int)
        p.add_argument("--config", help="TrainConfig JSON file")

    p = sub.add_parser("train", help="train per-label classifiers into a bundle")
    train_like(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cv", help="k-fold cross-validation with ratio sweep")
    train_like(p, model_choices=("cnn", "gru", "lr", "svm", "chance", "majority"))
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--ratios", default="1:1")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--analytic", action="store_true",
                   help="closed-form chance/majority report from catalog priors")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("eval", help="evaluate a bundle against a labeled corpus")
    p.add_argument("--models", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("kappa", help="inter-annotator agreement from a store")
    p.add_argument("--store", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("predict", help="label new posts with a bundle")
    p.add_argument("--models", required=True)
    p.add_argument("--in", dest="in", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def _apply_data_dir(args: argparse.Namespace) -> None:
    """Relative path options resolve under $CBTNLU_DATA_DIR when it is set."""
    base = os.environ.get(DATA_DIR_ENV)
    if not base:
        return
    for name in _PATH_OPTIONS:
        value = getattr(args, name, None)
        if value and not Path(value).is_absolute():
            setattr(args, name, str(Path(base) / value))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    _apply_data_dir(args)
    try:
        return args.func(args)
    except CbtnluError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
