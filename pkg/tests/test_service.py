import json

import pytest
from fastapi.testclient import TestClient

from cbtnlu.corpus import Dataset, Post, ingest, synth_generate
from cbtnlu.errors import (ConflictingRequest, NoDoublyAnnotatedPosts,
                           UnknownLabel, UnknownPost)
from cbtnlu.ontology import catalog_load
from cbtnlu.service import AnnotationStore, create_app


@pytest.fixture(scope="module")
def catalog():
    return catalog_load()


def _store(tmp_path, catalog, n=120):
    dataset = synth_generate(catalog, n, seed=3)
    # strip gold labels: the annotation workflow starts from raw posts
    dataset = Dataset(posts=list(dataset.posts))
    return AnnotationStore.create_dir(tmp_path / "store", dataset, catalog)


# --- store level -----------------------------------------------------------------

def test_put_and_get_labels(tmp_path, catalog):
    store = _store(tmp_path, catalog, n=120)
    pid = store.dataset.posts[0].id
    ann = store.put_labels(pid, "alice", frozenset({"anxiety"}), frozenset())
    assert ann.labels == {"anxiety"}
    again = store.put_labels(pid, "alice", frozenset({"anxiety"}), frozenset())
    assert again.labels == {"anxiety"}  # idempotent
    removed = store.put_labels(pid, "alice", frozenset(), frozenset({"anxiety"}))
    assert removed.labels == frozenset()
    assert not store.is_pending(pid, "alice")  # reviewed even with no labels
    store.close()


def test_put_labels_errors(tmp_path, catalog):
    store = _store(tmp_path, catalog, n=120)
    pid = store.dataset.posts[0].id
    with pytest.raises(UnknownPost):
        store.put_labels("nope", "alice", frozenset(), frozenset())
    with pytest.raises(UnknownLabel):
        store.put_labels(pid, "alice", frozenset({"happiness"}), frozenset())
    with pytest.raises(ConflictingRequest):
        store.put_labels(pid, "alice", frozenset({"anxiety"}),
                         frozenset({"anxiety"}))
    store.close()


def test_pending_accounting(tmp_path, catalog):
    store = _store(tmp_path, catalog, n=120)
    total = len(store.dataset.posts)
    for i, post in enumerate(store.dataset.posts[:30]):
        store.put_labels(post.id, "alice", frozenset({"work"}), frozenset())
        annotated = total - store.pending_count("alice")
        assert annotated == i + 1
    assert store.pending_count("alice") + 30 == total
    assert store.pending_count("bob") == total
    store.close()


def test_disjoint_adds_commute(tmp_path, catalog):
    store = _store(tmp_path, catalog, n=120)
    pid = store.dataset.posts[5].id
    store.put_labels(pid, "alice", frozenset({"anxiety"}), frozenset())
    store.put_labels(pid, "alice", frozenset({"work"}), frozenset())
    forward = store.labels_for(pid, "alice")
    pid2 = store.dataset.posts[6].id
    store.put_labels(pid2, "alice", frozenset({"work"}), frozenset())
    store.put_labels(pid2, "alice", frozenset({"anxiety"}), frozenset())
    assert forward == store.labels_for(pid2, "alice") == {"anxiety", "work"}
    store.close()


def test_journal_replay_after_crash(tmp_path, catalog):
    store = _store(tmp_path, catalog, n=120)
    posts = store.dataset.posts
    store.put_labels(posts[0].id, "alice", frozenset({"anxiety", "work"}),
                     frozenset())
    store.put_labels(posts[1].id, "alice", frozenset({"hurt"}), frozenset())
    store.put_labels(posts[0].id, "alice", frozenset(), frozenset({"work"}))
    store.put_labels(posts[2].id, "bob", frozenset({"guilt"}), frozenset())
    expected = {(pid, aid): ann.labels
                for (pid, aid), ann in store._annotations.items()}
    # simulated crash: the journal file is all that survives
    recovered = AnnotationStore.open_dir(tmp_path / "store", catalog)
    got = {(pid, aid): ann.labels
           for (pid, aid), ann in recovered._annotations.items()}
    assert got == expected
    assert recovered.labels_for(posts[0].id, "alice") == {"anxiety"}
    store.close()
    recovered.close()


def test_snapshot_plus_journal_tail(tmp_path, catalog):
    store = _store(tmp_path, catalog, n=120)
    posts = store.dataset.posts
    store.put_labels(posts[0].id, "alice", frozenset({"anxiety"}), frozenset())
    store.put_labels(posts[1].id, "alice", frozenset({"work"}), frozenset())
    store.save_snapshot()
    # writes after the snapshot land only in the journal tail
    store.put_labels(posts[2].id, "bob", frozenset({"guilt"}), frozenset())
    store.put_labels(posts[0].id, "alice", frozenset(), frozenset({"anxiety"}))
    expected = {key: ann.labels for key, ann in store._annotations.items()}
    recovered = AnnotationStore.open_dir(tmp_path / "store", catalog)
    assert {k: a.labels for k, a in recovered._annotations.items()} == expected
    store.close()
    recovered.close()


def test_agreement_per_label_mode(tmp_path, catalog):
    from cbtnlu.evaluation.agreement import agreement_report
    ann_a = {f"p{i}": frozenset({"anxiety", "work"}) for i in range(40)}
    report = agreement_report(ann_a, dict(ann_a), catalog, mode="per_label")
    assert report.mode == "per_label"
    for res in report.per_category.values():
        assert res.kappa == pytest.approx(1.0)


def test_export_gold_policies(tmp_path, catalog):
    store = _store(tmp_path, catalog, n=120)
    posts = store.dataset.posts
    store.put_labels(posts[0].id, "alice", frozenset({"anxiety"}), frozenset())
    store.put_labels(posts[0].id, "bob", frozenset({"anxiety", "work"}),
                     frozenset())
    union = store.export_gold("union")
    assert union.gold[posts[0].id] == {"anxiety", "work"}
    primary = store.export_gold("primary", "alice")
    assert primary.gold[posts[0].id] == {"anxiety"}
    assert posts[1].id not in primary.gold  # unreviewed: no labels key
    store.close()


def test_export_round_trip(tmp_path, catalog):
    from cbtnlu.corpus import export
    store = _store(tmp_path, catalog, n=120)
    store.put_labels(store.dataset.posts[0].id, "alice",
                     frozenset({"anxiety"}), frozenset())
    ds = store.export_gold("union")
    out = tmp_path / "gold.jsonl"
    export(ds, out)
    clone = ingest(out, catalog)
    assert clone.gold == ds.gold
    store.close()


# --- HTTP API ----------------------------------------------------------------------

@pytest.fixture()
def client(tmp_path, catalog):
    store = _store(tmp_path, catalog, n=120)
    yield TestClient(create_app(store))
    store.close()


def test_api_catalog(client):
    res = client.get("/api/catalog")
    assert res.status_code == 200
    body = res.json()
    assert body["error"] is None
    assert len(body["data"]) == 31


def test_api_pagination(client):
    res = client.get("/api/posts", params={"page": 1, "page_size": 50})
    body = res.json()["data"]
    assert len(body["items"]) == 50
    assert body["total"] == 120
    res = client.get("/api/posts", params={"page": 3, "page_size": 50})
    assert len(res.json()["data"]["items"]) == 20
    res = client.get("/api/posts", params={"page": 9, "page_size": 50})
    assert res.json()["data"]["items"] == []  # past the end: empty, not error
    res = client.get("/api/posts", params={"page": 0})
    assert res.status_code == 422
    res = client.get("/api/posts", params={"page_size": 500})
    assert res.status_code == 422


def test_api_labels_round_trip(client):
    first = client.get("/api/posts").json()["data"]["items"][0]
    res = client.post(f"/api/posts/{first['id']}/labels",
                      json={"annotator": "alice", "add": ["anxiety"]})
    assert res.status_code == 200
    assert res.json()["data"]["labels"] == ["anxiety"]
    got = client.get(f"/api/posts/{first['id']}",
                     params={"annotator": "alice"}).json()["data"]
    assert got["labels"] == ["anxiety"]
    assert got["pending"] is False


def test_api_pending_filter(client):
    items = client.get("/api/posts").json()["data"]["items"]
    for item in items[:3]:
        client.post(f"/api/posts/{item['id']}/labels",
                    json={"annotator": "alice", "add": []})
    res = client.get("/api/posts", params={"status": "pending",
                                           "annotator": "alice"}).json()["data"]
    assert res["total"] == 117
    assert res["pending_count"] == 117
    res = client.get("/api/posts", params={"status": "annotated",
                                           "annotator": "alice"}).json()["data"]
    assert res["total"] == 3


def test_api_error_codes(client):
    res = client.post("/api/posts/zzz/labels",
                      json={"annotator": "a", "add": ["anxiety"]})
    assert res.status_code == 404
    assert res.json()["error"]["code"] == "UnknownPost"
    first = client.get("/api/posts").json()["data"]["items"][0]
    res = client.post(f"/api/posts/{first['id']}/labels",
                      json={"annotator": "a", "add": ["happiness"]})
    assert res.status_code == 422
    assert res.json()["error"]["code"] == "UnknownLabel"
    res = client.get("/api/posts/zzz")
    assert res.status_code == 404


def test_api_agreement_flow(client):
    items = client.get("/api/posts", params={"page_size": 50}).json()["data"]["items"]
    for item in items:  # 50 doubly-annotated posts
        client.post(f"/api/posts/{item['id']}/labels",
                    json={"annotator": "alice", "add": ["anxiety"]})
        client.post(f"/api/posts/{item['id']}/labels",
                    json={"annotator": "bob", "add": ["anxiety"]})
    res = client.get("/api/agreement", params={"a": "alice", "b": "bob"})
    body = res.json()["data"]
    assert body["n_posts"] == 50
    assert set(body["per_category"]) == {"thinking_error", "emotion", "situation"}
    for cat in body["per_category"].values():
        assert cat["kappa"] == pytest.approx(1.0)
    res = client.get("/api/agreement", params={"a": "alice", "b": "nobody"})
    assert res.status_code == 404
    assert res.json()["error"]["code"] == "NoDoublyAnnotatedPosts"


def test_api_export(client):
    first = client.get("/api/posts").json()["data"]["items"][0]
    client.post(f"/api/posts/{first['id']}/labels",
                json={"annotator": "alice", "add": ["work"]})
    res = client.get("/api/export", params={"policy": "union"})
    assert res.status_code == 200
    lines = [json.loads(ln) for ln in res.text.strip().splitlines()]
    assert len(lines) == 120
    labeled = {ln["id"]: ln.get("labels") for ln in lines}
    assert labeled[first["id"]] == ["work"]
