import importlib

import pytest

from tests.conftest import FIXTURES

BASE = "/api/v1/memsched"


def text(name):
    return (FIXTURES / name).read_text()


def add_request(config="add_h4.cfg"):
    return {"sfg": text("add.sfg"), "map": text("add_1port.map"), "config": text(config)}


def test_memory_table(client):
    response = client.post(f"{BASE}/sfg/table", json={"sfg": text("add.sfg")})
    assert response.status_code == 200
    body = response.get_json()
    assert body["rows"][0] == {"symbol": "A", "accesses": 1, "reads": 1, "writes": 0}
    assert [row["symbol"] for row in body["rows"]] == ["A", "B", "C"]
    assert "bank B0 ports=1" in body["template"]


def test_malformed_graph_is_a_bad_request(client):
    response = client.post(f"{BASE}/sfg/table", json={"sfg": "sfg broken\nedge a -> b\n"})
    assert response.status_code == 400
    assert "sfg:2" in response.get_data(as_text=True)


def test_conflict_graph_edges(client):
    response = client.post(f"{BASE}/sfg/mcg", json={"sfg": text("add.sfg"), "map": text("add_1port.map")})
    assert response.status_code == 200
    assert response.get_json()["edges"] == ["B0: a -- b w=2"]


def test_schedule(client):
    response = client.post(f"{BASE}/schedule/", json=add_request())
    assert response.status_code == 200
    body = response.get_json()
    assert body["latency"] == 4
    assert body["dump"].startswith("schedule add latency=4 entries=4\n")
    assert body["gantt"].splitlines()[1].split() == ["B0.p0:", "a", "b", ".", "y_w"]


def test_infeasible_schedule(client):
    response = client.post(f"{BASE}/schedule/", json=add_request("add_h3.cfg"))
    assert response.status_code == 400
    assert "negative mobility" in response.get_data(as_text=True)


def test_missing_fields(client):
    response = client.post(f"{BASE}/schedule/", json={"sfg": text("add.sfg")})
    assert response.status_code == 400
    assert "Missing required fields: map, config" in response.get_data(as_text=True)


def test_verify(client):
    dump = client.post(f"{BASE}/schedule/", json=add_request()).get_json()["dump"]

    response = client.post(f"{BASE}/schedule/verify", json={**add_request(), "schedule": dump})
    assert response.get_json() == {"ok": True, "verdict": "OK"}

    clashing = dump.replace("sched b start=1 end=2", "sched b start=0 end=1")
    response = client.post(f"{BASE}/schedule/verify", json={**add_request(), "schedule": clashing})
    assert response.status_code == 200
    assert response.get_json() == {"ok": False, "verdict": "FAIL port-capacity cycle=0 vertices=a,b"}


def test_verify_truncated_dump(client):
    response = client.post(f"{BASE}/schedule/verify",
                           json={**add_request(), "schedule": "schedule add latency=4 entries=4\n"})
    assert response.status_code == 400
    assert "truncated dump" in response.get_data(as_text=True)


def test_explore(client):
    payload = {
        "sfg": text("fir4.sfg"),
        "maps": {"one": text("fir4_1bank.map"), "two": text("fir4_2banks.map"), "bad": text("bad_bank.map")},
        "horizons": [16],
        "config": text("fir4.cfg"),
    }
    response = client.post(f"{BASE}/explore/", json=payload)
    assert response.status_code == 200
    rows = response.get_json()["rows"]
    assert [r["label"] for r in rows] == ["two", "one", "bad"]
    assert rows[0]["feasible"] and rows[0]["latency"] == 8
    assert not rows[2]["feasible"] and "bad:2" in rows[2]["reason"]


@pytest.mark.parametrize("horizons", [[0], 5, [True], "16", [16, "x"]])
def test_explore_rejects_bad_horizons(client, horizons):
    payload = {"sfg": text("fir4.sfg"), "maps": {"two": text("fir4_2banks.map")}, "horizons": horizons}
    response = client.post(f"{BASE}/explore/", json=payload)
    assert response.status_code == 400
    assert "positive integers" in response.get_data(as_text=True)


def test_service_imports_from_the_repository_root():
    module = importlib.import_module("api.scheduler.app")
    assert module.API_ROOT == BASE
    assert f"{BASE}/schedule/" in {rule.rule for rule in module.app.url_map.iter_rules()}
