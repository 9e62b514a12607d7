import json

import pytest
from fastapi.testclient import TestClient

from groupsense import Group, chart_id, chart_from_dict, chart_to_dict, diagnose
from groupsense import generate_random_chart
from groupsense.model import DecisionTree, GroupingModel, TreeNode, save_model
from groupsense.service import create_app


@pytest.fixture()
def client(tmp_path):
    app = create_app(data_dir=tmp_path / "data")
    with TestClient(app) as c:
        yield c


def chart_doc(seed=0, n=6):
    return chart_to_dict(generate_random_chart(n, seed=seed))


def toy_model_doc(model_id="toy-1"):
    tree = DecisionTree(
        nodes=(
            TreeNode(feature="error", threshold=4.0, left=1, right=2),
            TreeNode(prob=0.95),
            TreeNode(prob=0.05),
        )
    )
    model = GroupingModel(
        kind="tree", feature_policy=("error",), tree=tree,
        metadata={"model_id": model_id},
    )
    return save_model(model)


class TestChartStore:
    def test_create_get_round_trip(self, client):
        doc = chart_doc(seed=1)
        created = client.post("/api/charts", json=doc).json()
        fetched = client.get(f"/api/charts/{created['id']}").json()
        assert fetched == created
        assert fetched["chart"]["points"] == doc["points"]

    def test_content_addressed_and_idempotent(self, client):
        doc = chart_doc(seed=2)
        r1 = client.post("/api/charts", json=doc)
        r2 = client.post("/api/charts", json=doc)
        assert r1.json()["id"] == r2.json()["id"] == chart_id(chart_from_dict(doc))
        assert r1.content == r2.content

    def test_list_after_creates(self, client):
        for seed in range(3):
            client.post("/api/charts", json=chart_doc(seed=seed))
        assert len(client.get("/api/charts").json()["charts"]) == 3

    def test_get_unknown_404(self, client):
        assert client.get("/api/charts/nope").status_code == 404

    def test_delete(self, client):
        cid = client.post("/api/charts", json=chart_doc(seed=3)).json()["id"]
        assert client.delete(f"/api/charts/{cid}").status_code == 200
        assert client.get(f"/api/charts/{cid}").status_code == 404
        assert client.delete(f"/api/charts/{cid}").status_code == 404

    def test_random_chart_deterministic(self, client):
        a = client.post("/api/charts/random", params={"n": 6, "seed": 9}).json()
        b = client.post("/api/charts/random", params={"n": 6, "seed": 9}).json()
        assert a == b
        assert len(a["chart"]["points"]) == 6

    def test_malformed_chart_400(self, client):
        r = client.post("/api/charts", json={"points": "nonsense"})
        assert r.status_code == 400

    def test_duplicate_labels_422(self, client):
        doc = {"points": [{"label": "A", "value": 1.0}, {"label": "A", "value": 2.0}]}
        r = client.post("/api/charts", json=doc)
        assert r.status_code == 422
        assert r.json()["path"] == "chart"


class TestModelStore:
    def test_crud(self, client):
        mid = client.post("/api/models", json=toy_model_doc()).json()["id"]
        assert mid == "toy-1"
        doc = client.get(f"/api/models/{mid}").json()
        assert doc["kind"] == "tree"
        ids = [m["id"] for m in client.get("/api/models").json()["models"]]
        assert set(ids) == {"default-v1", "toy-1"}
        assert client.delete(f"/api/models/{mid}").status_code == 200

    def test_default_model_seeded(self, client):
        doc = client.get("/api/models/default-v1").json()
        assert doc["metadata"]["model_id"] == "default-v1"

    def test_invalid_model_document_422(self, client):
        doc = toy_model_doc()
        doc["tree"]["nodes"][0]["feature"] = "hue"
        r = client.post("/api/models", json=doc)
        assert r.status_code == 422
        assert r.json()["code"] == "unknown-feature"

    def test_unknown_version_422(self, client):
        doc = toy_model_doc()
        doc["version"] = 12
        assert client.post("/api/models", json=doc).status_code == 422


class TestDiagnoseEndpoint:
    def test_matches_library(self, client):
        chart = generate_random_chart(6, seed=4)
        from groupsense import default_model

        expected = diagnose(chart, [Group(["A", "B"])], default_model()).to_dict()
        got = client.post(
            "/api/diagnose",
            json={"chart": chart_to_dict(chart), "desired": [["A", "B"]]},
        ).json()
        assert got == json.loads(json.dumps(expected))

    def test_empty_desired_all_violations(self, client):
        got = client.post("/api/diagnose", json={"chart": chart_doc(seed=5)}).json()
        assert all(d["violation"] for d in got["detected"])

    def test_byte_identical_responses(self, client):
        req = {"chart": chart_doc(seed=6), "desired": [["A", "B"]]}
        r1 = client.post("/api/diagnose", json=req)
        r2 = client.post("/api/diagnose", json=req)
        assert r1.content == r2.content

    def test_by_chart_id(self, client):
        cid = client.post("/api/charts", json=chart_doc(seed=7)).json()["id"]
        got = client.post("/api/diagnose", json={"chart_id": cid}).json()
        assert got["chart_id"] == cid

    def test_unknown_model_404(self, client):
        r = client.post(
            "/api/diagnose", json={"chart": chart_doc(seed=8), "model_id": "ghost"}
        )
        assert r.status_code == 404

    def test_unknown_chart_404(self, client):
        assert client.post("/api/diagnose", json={"chart_id": "ghost"}).status_code == 404

    def test_group_size_violation_422(self, client):
        r = client.post(
            "/api/diagnose", json={"chart": chart_doc(seed=9), "desired": [["A"]]}
        )
        assert r.status_code == 422
        assert r.json()["path"] == "desired"

    def test_both_chart_and_id_422(self, client):
        cid = client.post("/api/charts", json=chart_doc(seed=10)).json()["id"]
        r = client.post(
            "/api/diagnose", json={"chart": chart_doc(seed=10), "chart_id": cid}
        )
        assert r.status_code == 422

    def test_two_point_chart_422(self, client):
        r = client.post("/api/diagnose", json={"chart": chart_doc(seed=10, n=2)})
        assert r.status_code == 422

    def test_three_point_chart_works(self, client):
        got = client.post("/api/diagnose", json={"chart": chart_doc(seed=10, n=3)})
        assert got.status_code == 200
        assert all(len(d["members"]) == 2 for d in got.json()["detected"])


class TestRedesignEndpoint:
    def test_examined_720_and_k(self, client):
        got = client.post(
            "/api/redesign",
            json={"chart": chart_doc(seed=11), "desired": [["A", "B"]], "k": 1},
        ).json()
        assert got["examined"] == 720
        assert len(got["results"]) == 1
        best = got["results"][0]
        assert set(best) >= {"order", "s", "s_d", "s_v", "desired_met", "report"}

    def test_matches_library(self, client):
        from groupsense import default_model, redesign

        chart = generate_random_chart(6, seed=12)
        lib = redesign(chart, [Group(["A", "B"])], default_model(), alpha=0.4, k=2)
        got = client.post(
            "/api/redesign",
            json={"chart": chart_to_dict(chart), "desired": [["A", "B"]],
                  "alpha": 0.4, "k": 2},
        ).json()
        assert got["results"] == json.loads(json.dumps([p.to_dict() for p in lib.results]))

    def test_alpha_extremes(self, client):
        doc = chart_doc(seed=13)
        for alpha in (0.0, 1.0):
            got = client.post(
                "/api/redesign",
                json={"chart": doc, "desired": [["A", "B"]], "alpha": alpha, "k": 1},
            ).json()
            best = got["results"][0]
            expected = alpha * best["s_d"] - (1 - alpha) * best["s_v"]
            assert best["s"] == pytest.approx(expected)

    def test_budget_413(self, client):
        r = client.post(
            "/api/redesign", json={"chart": chart_doc(seed=14), "budget": 100}
        )
        assert r.status_code == 413

    def test_include_landscape(self, client):
        got = client.post(
            "/api/redesign",
            json={"chart": chart_doc(seed=15), "k": 1, "include_landscape": True},
        ).json()
        assert got["landscape"]["total"] == 720

    def test_stream_events(self, client):
        with client.stream(
            "POST",
            "/api/redesign/stream",
            json={"chart": chart_doc(seed=16), "desired": [["A", "B"]], "k": 1},
        ) as response:
            assert response.status_code == 200
            assert response.headers["content-type"].startswith("text/event-stream")
            events = []
            kind = None
            for line in response.iter_lines():
                if line.startswith("event: "):
                    kind = line.removeprefix("event: ")
                elif line.startswith("data: "):
                    events.append((kind, json.loads(line.removeprefix("data: "))))
        kinds = [k for k, _ in events]
        assert kinds[-1] == "result"
        assert "progress" in kinds[:-1]
        progress = [p for k, p in events if k == "progress"]
        assert all(p["total"] == 720 for p in progress)
        assert progress[-1]["examined"] == 720
        result = events[-1][1]
        assert result["examined"] == 720
        non_stream = client.post(
            "/api/redesign",
            json={"chart": chart_doc(seed=16), "desired": [["A", "B"]], "k": 1},
        ).json()
        assert result == non_stream

    def test_landscape_get(self, client):
        cid = client.post("/api/charts", json=chart_doc(seed=17)).json()["id"]
        got = client.get(
            "/api/redesign/landscape",
            params={"chart_id": cid, "desired": json.dumps([["A", "B"]])},
        ).json()
        assert got["total"] == 720
        assert sum(c["count"] for c in got["cells"]) == 720

    def test_landscape_get_bad_desired_400(self, client):
        cid = client.post("/api/charts", json=chart_doc(seed=18)).json()["id"]
        r = client.get(
            "/api/redesign/landscape", params={"chart_id": cid, "desired": "not-json"}
        )
        assert r.status_code == 400

    def test_landscape_get_budget_413(self, client):
        cid = client.post("/api/charts", json=chart_doc(seed=18)).json()["id"]
        r = client.get(
            "/api/redesign/landscape", params={"chart_id": cid, "budget": 100}
        )
        assert r.status_code == 413


class TestSessions:
    def test_create_idempotent(self, client):
        req = {"chart": chart_doc(seed=19), "desired": [["A", "B"]], "alpha": 0.6}
        s1 = client.post("/api/sessions", json=req).json()
        s2 = client.post("/api/sessions", json=req).json()
        assert s1 == s2
        assert s1["created"] == s1["updated"]

    def test_update_bumps_updated(self, client):
        sid = client.post(
            "/api/sessions", json={"chart": chart_doc(seed=20), "alpha": 0.5}
        ).json()["id"]
        doc = client.put(f"/api/sessions/{sid}", json={"alpha": 0.9}).json()
        assert doc["alpha"] == 0.9
        assert doc["updated"] >= doc["created"]
        assert client.get(f"/api/sessions/{sid}").json() == doc

    def test_list_and_delete(self, client):
        sid = client.post(
            "/api/sessions", json={"chart": chart_doc(seed=21)}
        ).json()["id"]
        assert sid in [s["id"] for s in client.get("/api/sessions").json()["sessions"]]
        assert client.delete(f"/api/sessions/{sid}").status_code == 200
        assert client.get(f"/api/sessions/{sid}").status_code == 404

    def test_model_delete_conflict_409(self, client):
        client.post("/api/models", json=toy_model_doc("busy"))
        client.post(
            "/api/sessions", json={"chart": chart_doc(seed=22), "model_id": "busy"}
        )
        assert client.delete("/api/models/busy").status_code == 409

    def test_model_delete_after_session_gone(self, client):
        client.post("/api/models", json=toy_model_doc("freeable"))
        sid = client.post(
            "/api/sessions", json={"chart": chart_doc(seed=23), "model_id": "freeable"}
        ).json()["id"]
        client.delete(f"/api/sessions/{sid}")
        assert client.delete("/api/models/freeable").status_code == 200

    def test_unknown_model_404(self, client):
        r = client.post(
            "/api/sessions", json={"chart": chart_doc(seed=24), "model_id": "ghost"}
        )
        assert r.status_code == 404


class TestDataDirEnv:
    def test_env_var_controls_store(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GROUPSENSE_DATA_DIR", str(tmp_path / "envstore"))
        app = create_app()
        with TestClient(app) as c:
            c.post("/api/charts", json=chart_doc(seed=25))
        assert (tmp_path / "envstore" / "charts").exists()
        assert len(list((tmp_path / "envstore" / "charts").glob("*.json"))) == 1
