"""Annotation backend: a journaled store of per-annotator label sets over a
post collection, exposed over HTTP for the review tool.

Persistence is an append-only JSONL journal plus an optional snapshot;
replaying the journal from empty reproduces the store, so acknowledged
writes survive a crash. Writes are serialized through one lock and flushed
to disk before the call returns.

Endpoints (all JSON responses use a {"data": ..., "error": ...} envelope):

    GET  /api/posts?page=&page_size=&status=&annotator=
    GET  /api/posts/{id}?annotator=
    POST /api/posts/{id}/labels   {"annotator":, "add": [], "remove": []}
    GET  /api/catalog
    GET  /api/agreement?a=&b=
    GET  /api/export?policy=union|primary&annotator=   (NDJSON body)
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .corpus import Dataset, Post, export, ingest
from .errors import (CbtnluError, ConflictingRequest, NoDoublyAnnotatedPosts,
                     UnknownLabel, UnknownPost)
from .evaluation.agreement import agreement_report
from .ontology import LabelCatalog, catalog_load, require_known

DEFAULT_PAGE_SIZE = 50
MAX_PAGE_SIZE = 200


@dataclass(frozen=True)
class Annotation:
    post_id: str
    annotator_id: str
    labels: frozenset[str]
    timestamp: float


class AnnotationStore:
    """Posts plus per-(post, annotator) label sets backed by a journal file.

    A post is pending for an annotator until that annotator has written at
    least one event for it (an empty-set write counts as reviewed).
    """

    def __init__(self, dataset: Dataset, journal_path, catalog: LabelCatalog | None = None):
        self.catalog = catalog or catalog_load()
        self.dataset = dataset
        self.journal_path = Path(journal_path)
        self.snapshot_path = self.journal_path.with_name("snapshot.json")
        self._annotations: dict[tuple[str, str], Annotation] = {}
        self._journal_lines = 0
        self._lock = threading.Lock()
        self._journal_fh = None
        skip = self._load_snapshot()
        if self.journal_path.exists():
            self._replay(skip)
        self._journal_fh = open(self.journal_path, "a", encoding="utf-8")

    @classmethod
    def open_dir(cls, store_dir, catalog: LabelCatalog | None = None) -> "AnnotationStore":
        """Open a store directory: posts.jsonl + journal.jsonl."""
        store = Path(store_dir)
        dataset = ingest(store / "posts.jsonl", catalog)
        return cls(dataset, store / "journal.jsonl", catalog)

    @classmethod
    def create_dir(cls, store_dir, dataset: Dataset,
                   catalog: LabelCatalog | None = None) -> "AnnotationStore":
        store = Path(store_dir)
        store.mkdir(parents=True, exist_ok=True)
        export(dataset, store / "posts.jsonl")
        return cls(dataset, store / "journal.jsonl", catalog)

    def close(self) -> None:
        if self._journal_fh is not None:
            self._journal_fh.close()
            self._journal_fh = None

    # --- journal + snapshot --------------------------------------------------

    def _load_snapshot(self) -> int:
        """Restore state from the snapshot, if any; returns the number of
        journal lines it already covers."""
        if not self.snapshot_path.exists():
            return 0
        with open(self.snapshot_path, encoding="utf-8") as fh:
            snap = json.load(fh)
        for row in snap["annotations"]:
            key = (row["post_id"], row["annotator"])
            self._annotations[key] = Annotation(
                post_id=row["post_id"], annotator_id=row["annotator"],
                labels=frozenset(row["labels"]), timestamp=row["ts"])
        self._journal_lines = snap["journal_lines"]
        return snap["journal_lines"]

    def save_snapshot(self) -> None:
        """Write the materialized state; replay then skips the covered
        journal prefix. Written atomically so a crash never truncates it."""
        with self._lock:
            snap = {
                "journal_lines": self._journal_lines,
                "annotations": [
                    {"post_id": ann.post_id, "annotator": ann.annotator_id,
                     "labels": sorted(ann.labels), "ts": ann.timestamp}
                    for ann in self._annotations.values()
                ],
            }
            tmp = self.snapshot_path.with_suffix(".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(snap, fh)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.snapshot_path)

    def _replay(self, skip: int = 0) -> None:
        with open(self.journal_path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh):
                if line_no < skip:
                    continue
                self._journal_lines += 1
                if line.strip():
                    self._apply(json.loads(line))

    def _apply(self, event: dict) -> Annotation:
        key = (event["post_id"], event["annotator"])
        prev = self._annotations.get(key)
        current = prev.labels if prev else frozenset()
        labels = (current | frozenset(event["add"])) - frozenset(event["remove"])
        ann = Annotation(post_id=event["post_id"], annotator_id=event["annotator"],
                         labels=labels, timestamp=event["ts"])
        self._annotations[key] = ann
        return ann

    # --- queries -----------------------------------------------------------

    def annotation(self, post_id: str, annotator_id: str) -> Annotation | None:
        return self._annotations.get((post_id, annotator_id))

    def labels_for(self, post_id: str, annotator_id: str) -> frozenset[str]:
        ann = self.annotation(post_id, annotator_id)
        return ann.labels if ann else frozenset()

    def is_pending(self, post_id: str, annotator_id: str) -> bool:
        return (post_id, annotator_id) not in self._annotations

    def pending_count(self, annotator_id: str) -> int:
        return sum(1 for p in self.dataset.posts if self.is_pending(p.id, annotator_id))

    def annotations_by(self, annotator_id: str) -> dict[str, frozenset[str]]:
        return {pid: ann.labels for (pid, aid), ann in self._annotations.items()
                if aid == annotator_id}

    def list_posts(self, page: int = 1, page_size: int = DEFAULT_PAGE_SIZE,
                   status: str = "all", annotator_id: str | None = None):
        """One page of post summaries in ingestion order plus totals."""
        if page < 1:
            raise ValueError("page must be >= 1")
        if not 1 <= page_size <= MAX_PAGE_SIZE:
            raise ValueError(f"page_size must be in 1..{MAX_PAGE_SIZE}")
        if status not in ("all", "pending", "annotated"):
            raise ValueError(f"unknown status filter {status!r}")
        if status != "all" and not annotator_id:
            raise ValueError("status filter requires an annotator id")
        posts = self.dataset.posts
        if status == "pending":
            posts = [p for p in posts if self.is_pending(p.id, annotator_id)]
        elif status == "annotated":
            posts = [p for p in posts if not self.is_pending(p.id, annotator_id)]
        total = len(posts)
        lo = (page - 1) * page_size
        items = posts[lo:lo + page_size]
        return items, total

    # --- mutation ----------------------------------------------------------

    def put_labels(self, post_id: str, annotator_id: str,
                   add: frozenset[str], remove: frozenset[str]) -> Annotation:
        """Apply (current | add) - remove; append and flush the journal event
        before acknowledging."""
        try:
            self.dataset.by_id(post_id)
        except KeyError:
            raise UnknownPost(f"no post with id {post_id!r}") from None
        overlap = add & remove
        if overlap:
            raise ConflictingRequest(f"labels both added and removed: {sorted(overlap)}")
        require_known(add | remove, self.catalog)
        event = {"ts": time.time(), "post_id": post_id, "annotator": annotator_id,
                 "add": sorted(add), "remove": sorted(remove)}
        with self._lock:
            self._journal_fh.write(json.dumps(event) + "\n")
            self._journal_fh.flush()
            os.fsync(self._journal_fh.fileno())
            self._journal_lines += 1
            return self._apply(event)

    # --- export ------------------------------------------------------------

    def export_gold(self, policy: str = "union",
                    annotator_id: str | None = None) -> Dataset:
        """Merged gold dataset: `union` over all annotators, or the label
        sets of one designated `primary` annotator. Unreviewed posts carry
        no labels key."""
        if policy not in ("union", "primary"):
            raise ValueError(f"unknown merge policy {policy!r}")
        if policy == "primary" and not annotator_id:
            raise ValueError("primary policy requires an annotator id")
        gold: dict[str, frozenset[str]] = {}
        for (pid, aid), ann in self._annotations.items():
            if policy == "primary" and aid != annotator_id:
                continue
            gold[pid] = gold.get(pid, frozenset()) | ann.labels
        return Dataset(posts=list(self.dataset.posts), gold=gold)


# --- HTTP layer -------------------------------------------------------------

def _ok(data) -> JSONResponse:
    return JSONResponse({"data": data, "error": None})


def _err(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse({"data": None, "error": {"code": code, "message": message}},
                        status_code=status)


_STATUS_BY_ERROR = {
    UnknownPost: 404,
    NoDoublyAnnotatedPosts: 404,
    UnknownLabel: 422,
    ConflictingRequest: 422,
}


def _post_summary(store: AnnotationStore, post: Post, annotator: str | None) -> dict:
    out = {"id": post.id, "problem": post.problem,
           "negative_take": post.negative_take}
    if annotator:
        out["labels"] = sorted(store.labels_for(post.id, annotator))
        out["pending"] = store.is_pending(post.id, annotator)
    return out


def create_app(store: AnnotationStore) -> FastAPI:
    app = FastAPI(title="annotation service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(CbtnluError)
    async def _handle_known(request: Request, exc: CbtnluError):
        return _err(_STATUS_BY_ERROR.get(type(exc), 400),
                    type(exc).__name__, str(exc))

    @app.exception_handler(RequestValidationError)
    async def _handle_validation(request: Request, exc: RequestValidationError):
        return _err(422, "BadRequest", str(exc.errors()))

    @app.exception_handler(ValueError)
    async def _handle_value(request: Request, exc: ValueError):
        return _err(422, "BadRequest", str(exc))

    @app.get("/api/catalog")
    async def get_catalog():
        return _ok(json.loads(store.catalog.to_json()))

    @app.get("/api/posts")
    async def get_posts(page: int = 1, page_size: int = DEFAULT_PAGE_SIZE,
                        status: str = "all", annotator: str | None = None):
        with store._lock:
            items, total = store.list_posts(page, page_size, status, annotator)
            data = {
                "items": [_post_summary(store, p, annotator) for p in items],
                "page": page, "page_size": page_size, "total": total,
                "total_posts": len(store.dataset.posts),
            }
            if annotator:
                data["pending_count"] = store.pending_count(annotator)
        return _ok(data)

    @app.get("/api/posts/{post_id}")
    async def get_post(post_id: str, annotator: str | None = None):
        with store._lock:
            try:
                post = store.dataset.by_id(post_id)
            except KeyError:
                raise UnknownPost(f"no post with id {post_id!r}") from None
            return _ok(_post_summary(store, post, annotator))

    @app.post("/api/posts/{post_id}/labels")
    async def post_labels(post_id: str, body: dict):
        for key in ("annotator",):
            if key not in body or not body[key]:
                raise ValueError(f"missing field {key!r}")
        ann = store.put_labels(post_id, body["annotator"],
                               frozenset(body.get("add") or []),
                               frozenset(body.get("remove") or []))
        return _ok({"post_id": ann.post_id, "annotator": ann.annotator_id,
                    "labels": sorted(ann.labels), "ts": ann.timestamp})

    @app.get("/api/agreement")
    async def get_agreement(a: str, b: str):
        with store._lock:
            report = agreement_report(store.annotations_by(a),
                                      store.annotations_by(b), store.catalog)
        return _ok({
            "n_posts": report.n_posts,
            "per_category": {
                cat: {"kappa": res.kappa, "se": res.se, "ci_low": res.ci_low,
                      "ci_high": res.ci_high, "n_decisions": res.n}
                for cat, res in report.per_category.items()
            },
        })

    @app.get("/api/export")
    async def get_export(policy: str = "union", annotator: str | None = None):
        with store._lock:
            dataset = store.export_gold(policy, annotator)
        lines = []
        for post in dataset.posts:
            obj: dict = {"id": post.id, "problem": post.problem,
                         "negative_take": post.negative_take}
            if post.id in dataset.gold:
                obj["labels"] = sorted(dataset.gold[post.id])
            lines.append(json.dumps(obj, ensure_ascii=False))
        return PlainTextResponse("\n".join(lines) + "\n",
                                 media_type="application/x-ndjson")

    return app
